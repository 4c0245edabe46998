#pragma once

#include <string>
#include <vector>

#include "dealscope/models/common.hpp"
#include "dealscope/rng.hpp"

namespace dealscope::models {

// One node of a binary decision tree. Internal nodes route on
// x[feature] <= threshold; leaves carry `value` (positive-class
// fraction for classification trees, raw additive score for boosted
// trees). `cover` is the training weight that reached the node.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
    double cover = 0.0;
    long long samples = 0;

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // root at index 0

    double predict(const double* x) const;
    int max_depth() const;
    // Cover-weighted mean of leaf values.
    double expected_value() const;
    nlohmann::json to_json() const;
    static Tree from_json(const nlohmann::json& j);
};

struct CartParams {
    int max_depth = 6;  // <= 0 means unlimited
    int min_samples_leaf = 5;
    int mtry = 0;  // features sampled per split; <= 0 means all
};

// Exact greedy CART with Gini impurity. row_weight holds nonnegative
// integer weights (bootstrap multiplicities); rng drives the per-split
// feature subsample when mtry > 0 and may be null otherwise.
Tree build_cart_tree(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<int>& row_weight, const CartParams& params, Rng* rng);

struct BoostTreeParams {
    int max_depth = 6;
    double lambda = 1.0;        // L2 penalty on leaf weights
    double gamma = 0.0;         // minimum split gain
    double learning_rate = 0.1; // applied to stored leaf values
    unsigned threads = 1;
};

// Exact greedy split search on gradient/hessian sums with the
// second-order gain
//   1/2 [ GL^2/(HL+l) + GR^2/(HR+l) - (GL+GR)^2/(HL+HR+l) ] - gamma
// and leaf weight -G/(H+l).
Tree build_boost_tree(const MatrixView& x, const std::vector<double>& grad,
                      const std::vector<double>& hess, const BoostTreeParams& params);

// Graphviz DOT rendering with feature names, thresholds, samples and
// values on each node.
std::string tree_to_dot(const Tree& tree, const std::vector<std::string>& feature_names,
                        const std::string& graph_name);

}  // namespace dealscope::models
