#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace dealscope {

enum class FeatureSet { financial, director, all };

const char* feature_set_name(FeatureSet s);
FeatureSet feature_set_from_name(const std::string& name);

// Numeric design matrix plus labels. Missing values are NaN until an
// imputation pass fills them.
struct Dataset {
    std::vector<std::string> ids;            // row identifier (company_id)
    std::vector<std::string> feature_names;  // size d
    std::vector<int> feature_group;          // size d; 0 = financial, 1 = director
    std::vector<double> x;                   // row-major, n * d
    std::vector<int> y;                      // size n, 0/1

    std::size_t n() const { return y.size(); }
    std::size_t d() const { return feature_names.size(); }
    double& at(std::size_t i, std::size_t j) { return x[i * d() + j]; }
    double at(std::size_t i, std::size_t j) const { return x[i * d() + j]; }

    std::size_t positives() const;
    std::vector<std::size_t> columns_for(FeatureSet set) const;
    Dataset select(const std::vector<std::size_t>& rows, const std::vector<std::size_t>& cols) const;
    Dataset select_rows(const std::vector<std::size_t>& rows) const;
    Dataset select_columns(const std::vector<std::size_t>& cols) const;
    std::size_t column_index(const std::string& name) const;  // throws if absent
};

// CSV layout: company_id, <feature columns...>, label. Missing cells are
// written empty. The sidecar JSON (written next to the CSV) records the
// column order, group tags, transforms, and full-data imputation
// statistics needed to score new rows outside the evaluation harness.
void write_dataset_csv(const Dataset& ds, const std::string& csv_path);
void write_dataset_sidecar(const Dataset& ds, const std::string& sidecar_path,
                           const std::string& snapshot_date, const std::string& imputation_strategy);
Dataset read_dataset_csv(const std::string& csv_path);

}  // namespace dealscope
