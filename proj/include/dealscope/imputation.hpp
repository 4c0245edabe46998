#pragma once

#include <string>
#include <vector>

#include "dealscope/dataset.hpp"

namespace dealscope {

struct ImputationPolicy {
    enum class Strategy { median, zero };
    Strategy strategy = Strategy::median;
    bool add_missing_indicators = true;

    static Strategy strategy_from_name(const std::string& name);
    const char* strategy_name() const;
};

// Fill values per column, learned from a row subset (training folds
// only, to keep evaluation data out of the statistics).
struct FittedImputation {
    std::vector<double> fill;  // size d

    void apply(Dataset& ds) const;
    void apply_row(std::vector<double>& row) const;
};

// Throws std::runtime_error naming the column when the median strategy
// finds no non-missing value to learn from.
FittedImputation fit_imputation(const Dataset& ds, const std::vector<std::size_t>& rows,
                                const ImputationPolicy& policy);
FittedImputation fit_imputation(const Dataset& ds, const ImputationPolicy& policy);

}  // namespace dealscope
