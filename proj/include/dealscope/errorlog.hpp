#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dealscope {

struct RowError {
    std::string file;
    std::size_t line = 0;
    std::string reason;
    std::string detail;
};

// Collects per-row ingest problems. Malformed rows are skipped, logged,
// and counted; a missing required column is a hard error raised by the
// reader instead.
class ErrorLog {
public:
    void add(std::string file, std::size_t line, std::string reason, std::string detail);
    const std::vector<RowError>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    // JSON-lines, one object per row error.
    void write_jsonl(const std::string& path) const;

private:
    std::vector<RowError> entries_;
};

}  // namespace dealscope
