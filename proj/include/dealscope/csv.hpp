#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace dealscope {

// RFC-4180-style CSV: quoted fields may contain commas, quotes ("")
// and newlines. Rows are returned as string vectors; the header is
// parsed into a name -> column index map.
class CsvReader {
public:
    // Throws std::runtime_error if the file cannot be opened or the
    // header is missing a required column.
    CsvReader(const std::string& path, const std::vector<std::string>& required_columns);

    const std::vector<std::string>& header() const { return header_; }
    std::size_t column(const std::string& name) const;
    bool has_column(const std::string& name) const;

    // Reads the next record; false at EOF. `line` receives the 1-based
    // line number where the record started (header is line 1).
    bool next(std::vector<std::string>& fields, std::size_t& line);

    const std::string& path() const { return path_; }

private:
    std::string path_;
    std::string content_;
    std::size_t pos_ = 0;
    std::size_t line_ = 1;
    std::vector<std::string> header_;
    std::unordered_map<std::string, std::size_t> index_;

    bool parse_record(std::vector<std::string>& fields, std::size_t& line);
};

class CsvWriter {
public:
    explicit CsvWriter(const std::string& path);
    ~CsvWriter();

    void write_row(const std::vector<std::string>& fields);
    void close();

    static std::string escape(const std::string& field);

private:
    std::string path_;
    std::string buffer_;
    bool closed_ = false;
};

// Field parsing helpers. Empty string means missing.
std::optional<double> parse_double_field(const std::string& s);
std::optional<long long> parse_int_field(const std::string& s);
std::optional<bool> parse_bool_field(const std::string& s);
std::string format_double(double v);

}  // namespace dealscope
