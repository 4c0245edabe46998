#include "dealscope/models/forest.hpp"

#include <cmath>
#include <stdexcept>

#include "dealscope/threading.hpp"

namespace dealscope::models {

double ForestFit::predict_proba(const double* x) const {
    double total = 0.0;
    for (const auto& tree : trees) total += tree.predict(x);
    return trees.empty() ? 0.0 : total / static_cast<double>(trees.size());
}

nlohmann::json ForestFit::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& tree : trees) arr.push_back(tree.to_json());
    return {{"trees", arr}};
}

ForestFit ForestFit::from_json(const nlohmann::json& j) {
    ForestFit fit;
    for (const auto& e : j.at("trees")) fit.trees.push_back(Tree::from_json(e));
    return fit;
}

ForestFit train_forest(const MatrixView& x, const std::vector<int>& y, const ForestParams& params,
                       Rng& rng) {
    if (params.n_trees < 1) throw std::invalid_argument("forest needs at least one tree");
    CartParams cart;
    cart.max_depth = params.max_depth;
    cart.min_samples_leaf = params.min_samples_leaf;
    cart.mtry = params.mtry < 0
                    ? std::max(1, static_cast<int>(std::sqrt(static_cast<double>(x.d))))
                    : params.mtry;

    ForestFit fit;
    fit.trees.resize(params.n_trees);
    // One derived stream per tree keeps the ensemble identical no
    // matter how trees are distributed over threads.
    std::vector<Rng> streams;
    streams.reserve(params.n_trees);
    for (int t = 0; t < params.n_trees; ++t) streams.push_back(rng.derive(t));

    parallel_chunks(params.n_trees, params.threads,
                    [&](std::size_t tb, std::size_t te, std::size_t) {
                        std::vector<int> weight(x.n);
                        for (std::size_t t = tb; t < te; ++t) {
                            Rng& tree_rng = streams[t];
                            if (params.bootstrap) {
                                std::fill(weight.begin(), weight.end(), 0);
                                for (std::size_t i = 0; i < x.n; ++i) {
                                    weight[tree_rng.index(x.n)] += 1;
                                }
                            } else {
                                std::fill(weight.begin(), weight.end(), 1);
                            }
                            fit.trees[t] = build_cart_tree(x, y, weight, cart, &tree_rng);
                        }
                    });
    return fit;
}

nlohmann::json CartFit::to_json() const { return {{"tree", tree.to_json()}}; }

CartFit CartFit::from_json(const nlohmann::json& j) {
    CartFit fit;
    fit.tree = Tree::from_json(j.at("tree"));
    return fit;
}

CartFit train_cart(const MatrixView& x, const std::vector<int>& y, const CartParams& params) {
    CartFit fit;
    std::vector<int> weight(x.n, 1);
    fit.tree = build_cart_tree(x, y, weight, params, nullptr);
    return fit;
}

}  // namespace dealscope::models
