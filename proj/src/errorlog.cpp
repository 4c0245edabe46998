#include "dealscope/errorlog.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"

namespace dealscope {

void ErrorLog::add(std::string file, std::size_t line, std::string reason, std::string detail) {
    entries_.push_back({std::move(file), line, std::move(reason), std::move(detail)});
}

void ErrorLog::write_jsonl(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    for (const auto& e : entries_) {
        nlohmann::json j;
        j["file"] = e.file;
        j["line"] = e.line;
        j["reason"] = e.reason;
        j["detail"] = e.detail;
        out << j.dump() << '\n';
    }
}

}  // namespace dealscope
