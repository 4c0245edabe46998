#include "dealscope/imputation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dealscope {

ImputationPolicy::Strategy ImputationPolicy::strategy_from_name(const std::string& name) {
    if (name == "median") return Strategy::median;
    if (name == "zero") return Strategy::zero;
    throw std::invalid_argument("unknown imputation strategy '" + name + "'");
}

const char* ImputationPolicy::strategy_name() const {
    return strategy == Strategy::median ? "median" : "zero";
}

void FittedImputation::apply(Dataset& ds) const {
    if (fill.size() != ds.d()) throw std::invalid_argument("imputation dimension mismatch");
    for (std::size_t i = 0; i < ds.n(); ++i) {
        for (std::size_t j = 0; j < ds.d(); ++j) {
            if (std::isnan(ds.at(i, j))) ds.at(i, j) = fill[j];
        }
    }
}

void FittedImputation::apply_row(std::vector<double>& row) const {
    if (fill.size() != row.size()) throw std::invalid_argument("imputation dimension mismatch");
    for (std::size_t j = 0; j < row.size(); ++j) {
        if (std::isnan(row[j])) row[j] = fill[j];
    }
}

FittedImputation fit_imputation(const Dataset& ds, const std::vector<std::size_t>& rows,
                                const ImputationPolicy& policy) {
    FittedImputation fit;
    fit.fill.assign(ds.d(), 0.0);
    if (policy.strategy == ImputationPolicy::Strategy::zero) return fit;
    std::vector<double> present;
    for (std::size_t j = 0; j < ds.d(); ++j) {
        present.clear();
        for (std::size_t i : rows) {
            const double v = ds.at(i, j);
            if (!std::isnan(v)) present.push_back(v);
        }
        if (present.empty()) {
            throw std::runtime_error("imputation: column '" + ds.feature_names[j] +
                                     "' has no non-missing values to fit on");
        }
        std::sort(present.begin(), present.end());
        const std::size_t n = present.size();
        fit.fill[j] = n % 2 ? present[n / 2] : 0.5 * (present[n / 2 - 1] + present[n / 2]);
    }
    return fit;
}

FittedImputation fit_imputation(const Dataset& ds, const ImputationPolicy& policy) {
    std::vector<std::size_t> rows(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) rows[i] = i;
    return fit_imputation(ds, rows, policy);
}

}  // namespace dealscope
