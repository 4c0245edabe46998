#pragma once

#include <vector>

#include "dealscope/models/tree.hpp"
#include "dealscope/rng.hpp"

namespace dealscope::models {

struct ForestParams {
    int n_trees = 100;
    int max_depth = 0;  // <= 0 means unlimited
    int min_samples_leaf = 1;
    int mtry = -1;  // -1 = floor(sqrt(d)), 0 = all features
    bool bootstrap = true;
    unsigned threads = 1;
};

struct ForestFit {
    std::vector<Tree> trees;

    // Mean over per-tree leaf class fractions.
    double predict_proba(const double* x) const;
    nlohmann::json to_json() const;
    static ForestFit from_json(const nlohmann::json& j);
};

// Bagged CART ensemble. Tree t draws its bootstrap counts and feature
// subsamples from rng.derive(t), so results do not depend on thread
// scheduling.
ForestFit train_forest(const MatrixView& x, const std::vector<int>& y, const ForestParams& params,
                       Rng& rng);

struct CartFit {
    Tree tree;

    double predict_proba(const double* x) const { return tree.predict(x); }
    nlohmann::json to_json() const;
    static CartFit from_json(const nlohmann::json& j);
};

CartFit train_cart(const MatrixView& x, const std::vector<int>& y, const CartParams& params);

}  // namespace dealscope::models
