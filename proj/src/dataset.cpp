#include "dealscope/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "dealscope/csv.hpp"
#include "json.hpp"

namespace dealscope {

const char* feature_set_name(FeatureSet s) {
    switch (s) {
        case FeatureSet::financial: return "financial";
        case FeatureSet::director: return "director";
        case FeatureSet::all: return "all";
    }
    return "all";
}

FeatureSet feature_set_from_name(const std::string& name) {
    if (name == "financial") return FeatureSet::financial;
    if (name == "director") return FeatureSet::director;
    if (name == "all") return FeatureSet::all;
    throw std::invalid_argument("unknown feature set '" + name + "'");
}

std::size_t Dataset::positives() const {
    std::size_t c = 0;
    for (int v : y) c += v != 0;
    return c;
}

std::vector<std::size_t> Dataset::columns_for(FeatureSet set) const {
    std::vector<std::size_t> cols;
    for (std::size_t j = 0; j < d(); ++j) {
        if (set == FeatureSet::all || feature_group[j] == (set == FeatureSet::director ? 1 : 0)) {
            cols.push_back(j);
        }
    }
    return cols;
}

Dataset Dataset::select(const std::vector<std::size_t>& rows,
                        const std::vector<std::size_t>& cols) const {
    Dataset out;
    out.feature_names.reserve(cols.size());
    out.feature_group.reserve(cols.size());
    for (std::size_t j : cols) {
        out.feature_names.push_back(feature_names[j]);
        out.feature_group.push_back(feature_group[j]);
    }
    out.ids.reserve(rows.size());
    out.y.reserve(rows.size());
    out.x.reserve(rows.size() * cols.size());
    for (std::size_t i : rows) {
        out.ids.push_back(ids[i]);
        out.y.push_back(y[i]);
        for (std::size_t j : cols) out.x.push_back(at(i, j));
    }
    return out;
}

Dataset Dataset::select_rows(const std::vector<std::size_t>& rows) const {
    std::vector<std::size_t> cols(d());
    for (std::size_t j = 0; j < d(); ++j) cols[j] = j;
    return select(rows, cols);
}

Dataset Dataset::select_columns(const std::vector<std::size_t>& cols) const {
    std::vector<std::size_t> rows(n());
    for (std::size_t i = 0; i < n(); ++i) rows[i] = i;
    return select(rows, cols);
}

std::size_t Dataset::column_index(const std::string& name) const {
    for (std::size_t j = 0; j < d(); ++j) {
        if (feature_names[j] == name) return j;
    }
    throw std::out_of_range("no feature column '" + name + "'");
}

void write_dataset_csv(const Dataset& ds, const std::string& csv_path) {
    CsvWriter w(csv_path);
    std::vector<std::string> row;
    row.push_back("company_id");
    for (const auto& name : ds.feature_names) row.push_back(name);
    row.push_back("label");
    w.write_row(row);
    for (std::size_t i = 0; i < ds.n(); ++i) {
        row.clear();
        row.push_back(ds.ids[i]);
        for (std::size_t j = 0; j < ds.d(); ++j) row.push_back(format_double(ds.at(i, j)));
        row.push_back(ds.y[i] ? "1" : "0");
        w.write_row(row);
    }
    w.close();
}

void write_dataset_sidecar(const Dataset& ds, const std::string& sidecar_path,
                           const std::string& snapshot_date,
                           const std::string& imputation_strategy) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["snapshot_date"] = snapshot_date;
    j["transforms"] = "columns suffixed _log hold sign(x)*ln(1+|x|); *_missing are 0/1 indicators";
    j["imputation"]["strategy"] = imputation_strategy;
    nlohmann::json cols = nlohmann::json::array();
    for (std::size_t c = 0; c < ds.d(); ++c) {
        nlohmann::json col;
        col["name"] = ds.feature_names[c];
        col["group"] = ds.feature_group[c] == 1 ? "director" : "financial";
        std::vector<double> present;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (!std::isnan(ds.at(i, c))) present.push_back(ds.at(i, c));
        }
        col["missing_rate"] =
            ds.n() ? 1.0 - static_cast<double>(present.size()) / static_cast<double>(ds.n()) : 0.0;
        if (!present.empty()) {
            std::sort(present.begin(), present.end());
            const std::size_t n = present.size();
            col["median"] = n % 2 ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
        }
        cols.push_back(col);
    }
    j["columns"] = cols;
    j["rows"] = ds.n();
    j["positives"] = ds.positives();
    std::ofstream out(sidecar_path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + sidecar_path);
    out << j.dump(2) << '\n';
}

namespace {

// Fallback group tags for datasets read without a sidecar.
int default_group(const std::string& name) {
    static const std::unordered_set<std::string> director = {
        "n_active_directors",       "n_director_roles_log",
        "avg_tenure",               "avg_age_at_appointment_log",
        "n_previous_companies_log", "experience_in_company_log",
        "avg_experience_at_appointment_log",
        "ftse_1",                   "ftse_2",
        "ftse_3plus",
    };
    std::string base = name;
    constexpr const char* suffix = "_missing";
    if (base.size() > 8 && base.rfind(suffix) == base.size() - 8) base.resize(base.size() - 8);
    return director.count(base) ? 1 : 0;
}

}  // namespace

Dataset read_dataset_csv(const std::string& csv_path) {
    CsvReader r(csv_path, {"company_id", "label"});
    Dataset ds;
    const auto& header = r.header();
    const std::size_t c_id = r.column("company_id");
    const std::size_t c_label = r.column("label");
    std::vector<std::size_t> feature_cols;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c == c_id || c == c_label) continue;
        feature_cols.push_back(c);
        ds.feature_names.push_back(header[c]);
        ds.feature_group.push_back(default_group(header[c]));
    }
    std::vector<std::string> f;
    std::size_t line;
    while (r.next(f, line)) {
        ds.ids.push_back(c_id < f.size() ? f[c_id] : "");
        const std::string label = c_label < f.size() ? f[c_label] : "";
        auto lab = parse_int_field(label);
        if (!lab || (*lab != 0 && *lab != 1)) {
            throw std::runtime_error(csv_path + ": bad label at line " + std::to_string(line));
        }
        ds.y.push_back(static_cast<int>(*lab));
        for (std::size_t c : feature_cols) {
            const std::string cell = c < f.size() ? f[c] : "";
            if (cell.empty()) {
                ds.x.push_back(std::nan(""));
            } else {
                auto v = parse_double_field(cell);
                if (!v) {
                    throw std::runtime_error(csv_path + ": bad numeric cell at line " +
                                             std::to_string(line));
                }
                ds.x.push_back(*v);
            }
        }
    }
    return ds;
}

}  // namespace dealscope
