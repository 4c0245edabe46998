#pragma once

#include <vector>

#include "dealscope/models/common.hpp"

namespace dealscope::models {

struct KnnParams {
    int k = 5;
};

// Stores the standardized training matrix; prediction is the positive
// fraction among the k nearest neighbours by Euclidean distance, with
// distance ties resolved toward the lower training-row index.
struct KnnFit {
    Standardizer scaler;
    int k = 5;
    std::vector<double> x;  // row-major, standardized
    std::vector<int> y;
    std::size_t n = 0;
    std::size_t d = 0;

    double predict_proba(const double* row) const;
    std::vector<int> neighbors(const double* row) const;  // sorted (distance, index)
    nlohmann::json to_json() const;
    static KnnFit from_json(const nlohmann::json& j);
};

KnnFit train_knn(const MatrixView& x, const std::vector<int>& y, const KnnParams& params);

}  // namespace dealscope::models
