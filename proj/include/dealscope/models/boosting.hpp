#pragma once

#include <vector>

#include "dealscope/models/tree.hpp"

namespace dealscope::models {

struct BoostParams {
    int n_rounds = 100;
    int max_depth = 6;
    double learning_rate = 0.1;
    double lambda = 1.0;
    double gamma = 0.0;
    unsigned threads = 1;
};

// Gradient-boosted trees with the second-order logistic objective.
// Raw score = base_score + sum of leaf values (learning rate already
// folded into the stored leaves); probability = sigmoid of the raw
// score clipped to +-15.
struct BoostFit {
    double base_score = 0.0;
    std::vector<Tree> trees;
    std::vector<double> train_loss;  // mean logistic loss after each round

    double raw_score(const double* x) const;
    double predict_proba(const double* x) const;
    nlohmann::json to_json() const;
    static BoostFit from_json(const nlohmann::json& j);
};

BoostFit train_boost(const MatrixView& x, const std::vector<int>& y, const BoostParams& params);

}  // namespace dealscope::models
