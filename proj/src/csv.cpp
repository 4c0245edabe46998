#include "dealscope/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace dealscope {

CsvReader::CsvReader(const std::string& path, const std::vector<std::string>& required_columns)
    : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    content_ = ss.str();
    // Strip UTF-8 BOM if present.
    if (content_.size() >= 3 && content_[0] == '\xEF' && content_[1] == '\xBB' &&
        content_[2] == '\xBF') {
        pos_ = 3;
    }
    std::size_t line = 0;
    if (!parse_record(header_, line)) throw std::runtime_error(path + ": empty file");
    for (std::size_t i = 0; i < header_.size(); ++i) index_[header_[i]] = i;
    for (const auto& col : required_columns) {
        if (!index_.count(col)) {
            throw std::runtime_error(path + ": missing required column '" + col + "'");
        }
    }
}

std::size_t CsvReader::column(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw std::runtime_error(path_ + ": no column '" + name + "'");
    return it->second;
}

bool CsvReader::has_column(const std::string& name) const { return index_.count(name) > 0; }

bool CsvReader::next(std::vector<std::string>& fields, std::size_t& line) {
    return parse_record(fields, line);
}

bool CsvReader::parse_record(std::vector<std::string>& fields, std::size_t& line) {
    fields.clear();
    if (pos_ >= content_.size()) return false;
    line = line_;
    std::string field;
    bool in_quotes = false;
    bool any = false;
    while (pos_ < content_.size()) {
        const char c = content_[pos_];
        if (in_quotes) {
            if (c == '"') {
                if (pos_ + 1 < content_.size() && content_[pos_ + 1] == '"') {
                    field += '"';
                    pos_ += 2;
                } else {
                    in_quotes = false;
                    ++pos_;
                }
            } else {
                if (c == '\n') ++line_;
                field += c;
                ++pos_;
            }
            any = true;
            continue;
        }
        if (c == '"' && field.empty()) {
            in_quotes = true;
            any = true;
            ++pos_;
        } else if (c == ',') {
            fields.push_back(std::move(field));
            field.clear();
            any = true;
            ++pos_;
        } else if (c == '\r') {
            ++pos_;
        } else if (c == '\n') {
            ++pos_;
            ++line_;
            fields.push_back(std::move(field));
            return true;
        } else {
            field += c;
            any = true;
            ++pos_;
        }
    }
    if (!any && fields.empty()) return false;
    fields.push_back(std::move(field));
    return true;
}

CsvWriter::CsvWriter(const std::string& path) : path_(path) {}

CsvWriter::~CsvWriter() {
    if (!closed_) close();
}

void CsvWriter::write_row(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) buffer_ += ',';
        buffer_ += escape(fields[i]);
    }
    buffer_ += '\n';
}

void CsvWriter::close() {
    if (closed_) return;
    closed_ = true;
    std::ofstream out(path_, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path_);
    out << buffer_;
}

std::string CsvWriter::escape(const std::string& field) {
    bool need = false;
    for (char c : field) {
        if (c == ',' || c == '"' || c == '\n' || c == '\r') {
            need = true;
            break;
        }
    }
    if (!need) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

std::optional<double> parse_double_field(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    if (b == e) return std::nullopt;
    double v;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    if (!std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> parse_int_field(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* b = s.data();
    const char* e = s.data() + s.size();
    while (b < e && (*b == ' ' || *b == '\t')) ++b;
    while (e > b && (e[-1] == ' ' || e[-1] == '\t')) --e;
    if (b == e) return std::nullopt;
    long long v;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return v;
}

std::optional<bool> parse_bool_field(const std::string& s) {
    if (s == "1" || s == "true" || s == "True" || s == "TRUE" || s == "yes") return true;
    if (s == "0" || s == "false" || s == "False" || s == "FALSE" || s == "no") return false;
    return std::nullopt;
}

std::string format_double(double v) {
    if (std::isnan(v)) return "";
    // Shortest round-trip representation.
    char buf[32];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back;
        auto [p, ec] = std::from_chars(buf, buf + std::char_traits<char>::length(buf), back);
        (void)p;
        if (ec == std::errc() && back == v) break;
    }
    return buf;
}

}  // namespace dealscope
