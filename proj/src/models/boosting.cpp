#include "dealscope/models/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dealscope/stats.hpp"

namespace dealscope::models {

namespace {

constexpr double kRawClip = 15.0;

double clip_raw(double z) { return std::min(kRawClip, std::max(-kRawClip, z)); }

double mean_log_loss(const std::vector<double>& raw, const std::vector<int>& y) {
    double total = 0.0;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        const double z = clip_raw(raw[i]);
        total += log1p_exp(y[i] ? -z : z);
    }
    return total / static_cast<double>(raw.size());
}

}  // namespace

double BoostFit::raw_score(const double* x) const {
    double z = base_score;
    for (const auto& tree : trees) z += tree.predict(x);
    return z;
}

double BoostFit::predict_proba(const double* x) const {
    return sigmoid(clip_raw(raw_score(x)));
}

nlohmann::json BoostFit::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& tree : trees) arr.push_back(tree.to_json());
    return {{"base_score", base_score}, {"trees", arr}, {"train_loss", train_loss}};
}

BoostFit BoostFit::from_json(const nlohmann::json& j) {
    BoostFit fit;
    fit.base_score = j.at("base_score").get<double>();
    for (const auto& e : j.at("trees")) fit.trees.push_back(Tree::from_json(e));
    fit.train_loss = j.at("train_loss").get<std::vector<double>>();
    return fit;
}

BoostFit train_boost(const MatrixView& x, const std::vector<int>& y, const BoostParams& params) {
    if (x.n == 0 || y.size() != x.n) throw std::invalid_argument("boost fit: bad shapes");
    if (params.n_rounds < 1) throw std::invalid_argument("need at least one round");

    BoostFit fit;
    double mean = 0.0;
    for (int yi : y) mean += yi ? 1.0 : 0.0;
    mean /= static_cast<double>(x.n);
    // log(p/(1-p)) capped so pure labels start at the raw-score clip.
    if (mean <= 0.0) {
        fit.base_score = -kRawClip;
    } else if (mean >= 1.0) {
        fit.base_score = kRawClip;
    } else {
        fit.base_score = clip_raw(std::log(mean / (1.0 - mean)));
    }

    BoostTreeParams tree_params;
    tree_params.max_depth = params.max_depth;
    tree_params.lambda = params.lambda;
    tree_params.gamma = params.gamma;
    tree_params.learning_rate = params.learning_rate;
    tree_params.threads = params.threads;

    std::vector<double> raw(x.n, fit.base_score);
    std::vector<double> grad(x.n), hess(x.n);
    for (int round = 0; round < params.n_rounds; ++round) {
        for (std::size_t i = 0; i < x.n; ++i) {
            const double p = sigmoid(clip_raw(raw[i]));
            grad[i] = p - (y[i] ? 1.0 : 0.0);
            hess[i] = p * (1.0 - p);
        }
        Tree tree = build_boost_tree(x, grad, hess, tree_params);
        double max_leaf = 0.0;
        for (const auto& node : tree.nodes) {
            if (node.is_leaf()) max_leaf = std::max(max_leaf, std::fabs(node.value));
        }
        // Fully converged: remaining rounds would add numerically dead
        // trees whose rounding jitter could break monotone train loss.
        if (max_leaf < 1e-12) break;
        for (std::size_t i = 0; i < x.n; ++i) raw[i] += tree.predict(x.row(i));
        fit.trees.push_back(std::move(tree));
        fit.train_loss.push_back(mean_log_loss(raw, y));
    }
    return fit;
}

}  // namespace dealscope::models
