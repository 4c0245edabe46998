#include "dealscope/models/tree.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dealscope/threading.hpp"

namespace dealscope::models {

double Tree::predict(const double* x) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        node = x[nodes[node].feature] <= nodes[node].threshold ? nodes[node].left
                                                               : nodes[node].right;
    }
    return nodes[node].value;
}

int Tree::max_depth() const {
    // Iterative depth computation over the child links.
    std::vector<int> depth(nodes.size(), 0);
    int best = 0;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (!nodes[i].is_leaf()) {
            depth[nodes[i].left] = depth[i] + 1;
            depth[nodes[i].right] = depth[i] + 1;
        }
        best = std::max(best, depth[i]);
    }
    return best;
}

double Tree::expected_value() const {
    double total = 0.0, weighted = 0.0;
    for (const auto& n : nodes) {
        if (n.is_leaf()) {
            total += n.cover;
            weighted += n.cover * n.value;
        }
    }
    return total > 0.0 ? weighted / total : 0.0;
}

nlohmann::json Tree::to_json() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& n : nodes) {
        arr.push_back({n.feature, n.threshold, n.left, n.right, n.value, n.cover, n.samples});
    }
    return {{"nodes", arr}};
}

Tree Tree::from_json(const nlohmann::json& j) {
    Tree t;
    for (const auto& e : j.at("nodes")) {
        TreeNode n;
        n.feature = e.at(0).get<int>();
        n.threshold = e.at(1).get<double>();
        n.left = e.at(2).get<int>();
        n.right = e.at(3).get<int>();
        n.value = e.at(4).get<double>();
        n.cover = e.at(5).get<double>();
        n.samples = e.at(6).get<long long>();
        t.nodes.push_back(n);
    }
    if (t.nodes.empty()) throw std::invalid_argument("tree without nodes");
    return t;
}

namespace {

// Midpoint between adjacent distinct sorted values, nudged down if
// rounding would cross the upper value; routing by x <= threshold then
// reproduces exactly the row set whose statistics were scanned.
double split_point(double lo, double hi) {
    const double mid = lo + 0.5 * (hi - lo);
    return mid < hi ? mid : lo;
}

// Per-feature sorted row orders over the active rows, partitioned in
// place as the tree grows; every feature array shares the same segment
// boundaries.
class SortedOrders {
public:
    SortedOrders(const MatrixView& x, const std::vector<int>& rows) : x_(x) {
        order_.assign(x.d, rows);
        for (std::size_t f = 0; f < x.d; ++f) {
            std::sort(order_[f].begin(), order_[f].end(), [&](int a, int b) {
                const double va = x.at(a, f), vb = x.at(b, f);
                if (va != vb) return va < vb;
                return a < b;
            });
        }
        scratch_.resize(rows.size());
    }

    const std::vector<int>& feature_order(std::size_t f) const { return order_[f]; }

    // Stable partition of [begin, end) in every feature array by
    // go_left(row); returns the boundary position.
    std::size_t partition(std::size_t begin, std::size_t end, const std::vector<char>& go_left) {
        std::size_t mid = begin;
        for (std::size_t f = 0; f < x_.d; ++f) {
            auto& ord = order_[f];
            std::size_t w = begin, s = 0;
            for (std::size_t p = begin; p < end; ++p) {
                if (go_left[ord[p]]) {
                    ord[w++] = ord[p];
                } else {
                    scratch_[s++] = ord[p];
                }
            }
            std::copy(scratch_.begin(), scratch_.begin() + s, ord.begin() + w);
            mid = w;
        }
        return mid;
    }

private:
    const MatrixView& x_;
    std::vector<std::vector<int>> order_;
    std::vector<int> scratch_;
};

struct BestSplit {
    double improvement = 0.0;
    int feature = -1;
    double threshold = 0.0;
    bool found() const { return feature >= 0; }

    // Deterministic preference: larger improvement, then lower feature
    // index, then lower threshold.
    bool beats(const BestSplit& other) const {
        if (!found()) return false;
        if (!other.found()) return true;
        if (improvement != other.improvement) return improvement > other.improvement;
        if (feature != other.feature) return feature < other.feature;
        return threshold < other.threshold;
    }
};

constexpr double kMinImprovement = 1e-12;

// Weighted Gini mass n - (k^2 + (n-k)^2)/n, symmetric in k <-> n-k so
// label flips choose identical splits.
double gini_mass(double n, double k) {
    if (n <= 0.0) return 0.0;
    return n - (k * k + (n - k) * (n - k)) / n;
}

class CartBuilder {
public:
    CartBuilder(const MatrixView& x, const std::vector<int>& y, const std::vector<int>& w,
                const CartParams& params, Rng* rng)
        : x_(x), y_(y), w_(w), params_(params), rng_(rng) {
        std::vector<int> active;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (w[i] > 0) active.push_back(static_cast<int>(i));
        }
        if (active.empty()) throw std::invalid_argument("tree fit with no active rows");
        orders_.emplace(x, active);
        n_active_ = active.size();
        feature_pool_.resize(x.d);
        std::iota(feature_pool_.begin(), feature_pool_.end(), 0);
        go_left_.assign(x.n, 0);
    }

    Tree build() {
        build_node(0, n_active_, 0);
        return std::move(tree_);
    }

private:
    int build_node(std::size_t begin, std::size_t end, int depth) {
        long long weight = 0, pos = 0;
        const auto& ord0 = orders_->feature_order(0);
        for (std::size_t p = begin; p < end; ++p) {
            weight += w_[ord0[p]];
            pos += y_[ord0[p]] ? w_[ord0[p]] : 0;
        }
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[id].cover = static_cast<double>(weight);
        tree_.nodes[id].samples = weight;
        tree_.nodes[id].value = static_cast<double>(pos) / static_cast<double>(weight);

        const bool depth_ok = params_.max_depth <= 0 || depth < params_.max_depth;
        const bool splittable = depth_ok && pos != 0 && pos != weight &&
                                weight >= 2LL * params_.min_samples_leaf;
        if (!splittable) return id;

        const BestSplit best = find_split(begin, end, weight, pos);
        if (!best.found()) return id;

        const auto& ord = orders_->feature_order(best.feature);
        for (std::size_t p = begin; p < end; ++p) {
            go_left_[ord[p]] = x_.at(ord[p], best.feature) <= best.threshold ? 1 : 0;
        }
        const std::size_t mid = orders_->partition(begin, end, go_left_);
        tree_.nodes[id].feature = best.feature;
        tree_.nodes[id].threshold = best.threshold;
        const int left = build_node(begin, mid, depth + 1);
        const int right = build_node(mid, end, depth + 1);
        tree_.nodes[id].left = left;
        tree_.nodes[id].right = right;
        return id;
    }

    BestSplit find_split(std::size_t begin, std::size_t end, long long weight, long long pos) {
        // Feature subset, ascending for deterministic tie-breaks.
        std::vector<int> feats;
        if (params_.mtry > 0 && params_.mtry < static_cast<int>(x_.d)) {
            for (int t = 0; t < params_.mtry; ++t) {
                const std::size_t pick = t + rng_->index(x_.d - t);
                std::swap(feature_pool_[t], feature_pool_[pick]);
            }
            feats.assign(feature_pool_.begin(), feature_pool_.begin() + params_.mtry);
            std::sort(feats.begin(), feats.end());
        } else {
            feats = feature_pool_;
            std::sort(feats.begin(), feats.end());
        }
        const double parent = gini_mass(static_cast<double>(weight), static_cast<double>(pos));
        BestSplit best;
        for (int f : feats) {
            const auto& ord = orders_->feature_order(f);
            long long wl = 0, kl = 0;
            for (std::size_t p = begin; p + 1 < end; ++p) {
                const int row = ord[p];
                wl += w_[row];
                kl += y_[row] ? w_[row] : 0;
                const double v = x_.at(row, f);
                const double vn = x_.at(ord[p + 1], f);
                if (!(v < vn)) continue;
                if (wl < params_.min_samples_leaf || weight - wl < params_.min_samples_leaf)
                    continue;
                const double score =
                    parent - gini_mass(static_cast<double>(wl), static_cast<double>(kl)) -
                    gini_mass(static_cast<double>(weight - wl), static_cast<double>(pos - kl));
                if (score <= kMinImprovement) continue;
                BestSplit cand{score, f, split_point(v, vn)};
                if (cand.beats(best)) best = cand;
            }
        }
        return best;
    }

    const MatrixView& x_;
    const std::vector<int>& y_;
    const std::vector<int>& w_;
    CartParams params_;
    Rng* rng_;
    std::optional<SortedOrders> orders_;
    std::size_t n_active_ = 0;
    std::vector<int> feature_pool_;
    std::vector<char> go_left_;
    Tree tree_;
};

class BoostBuilder {
public:
    BoostBuilder(const MatrixView& x, const std::vector<double>& g, const std::vector<double>& h,
                 const BoostTreeParams& params)
        : x_(x), g_(g), h_(h), params_(params) {
        std::vector<int> active(x.n);
        std::iota(active.begin(), active.end(), 0);
        orders_.emplace(x, active);
        go_left_.assign(x.n, 0);
    }

    Tree build() {
        build_node(0, x_.n, 0);
        return std::move(tree_);
    }

private:
    int build_node(std::size_t begin, std::size_t end, int depth) {
        double G = 0.0, H = 0.0;
        const auto& ord0 = orders_->feature_order(0);
        for (std::size_t p = begin; p < end; ++p) {
            G += g_[ord0[p]];
            H += h_[ord0[p]];
        }
        const int id = static_cast<int>(tree_.nodes.size());
        tree_.nodes.emplace_back();
        tree_.nodes[id].cover = static_cast<double>(end - begin);
        tree_.nodes[id].samples = static_cast<long long>(end - begin);
        tree_.nodes[id].value = -params_.learning_rate * G / (H + params_.lambda);

        if (depth >= params_.max_depth || end - begin < 2) return id;
        const BestSplit best = find_split(begin, end, G, H);
        if (!best.found()) return id;

        const auto& ord = orders_->feature_order(best.feature);
        for (std::size_t p = begin; p < end; ++p) {
            go_left_[ord[p]] = x_.at(ord[p], best.feature) <= best.threshold ? 1 : 0;
        }
        const std::size_t mid = orders_->partition(begin, end, go_left_);
        tree_.nodes[id].feature = best.feature;
        tree_.nodes[id].threshold = best.threshold;
        const int left = build_node(begin, mid, depth + 1);
        const int right = build_node(mid, end, depth + 1);
        tree_.nodes[id].left = left;
        tree_.nodes[id].right = right;
        return id;
    }

    BestSplit scan_feature(int f, std::size_t begin, std::size_t end, double G, double H) const {
        const auto& ord = orders_->feature_order(f);
        const double lambda = params_.lambda;
        const double parent = G * G / (H + lambda);
        BestSplit best;
        double Gl = 0.0, Hl = 0.0;
        for (std::size_t p = begin; p + 1 < end; ++p) {
            const int row = ord[p];
            Gl += g_[row];
            Hl += h_[row];
            const double v = x_.at(row, f);
            const double vn = x_.at(ord[p + 1], f);
            if (!(v < vn)) continue;
            const double Gr = G - Gl, Hr = H - Hl;
            const double gain =
                0.5 * (Gl * Gl / (Hl + lambda) + Gr * Gr / (Hr + lambda) - parent) - params_.gamma;
            if (gain <= kMinImprovement) continue;
            BestSplit cand{gain, f, split_point(v, vn)};
            if (cand.beats(best)) best = cand;
        }
        return best;
    }

    BestSplit find_split(std::size_t begin, std::size_t end, double G, double H) const {
        BestSplit best;
        const std::size_t work = (end - begin) * x_.d;
        if (params_.threads > 1 && work > 65536) {
            std::vector<BestSplit> chunk_best(params_.threads);
            parallel_chunks(x_.d, params_.threads,
                            [&](std::size_t fb, std::size_t fe, std::size_t c) {
                                BestSplit local;
                                for (std::size_t f = fb; f < fe; ++f) {
                                    BestSplit cand =
                                        scan_feature(static_cast<int>(f), begin, end, G, H);
                                    if (cand.beats(local)) local = cand;
                                }
                                chunk_best[c] = local;
                            });
            for (const auto& cand : chunk_best) {
                if (cand.beats(best)) best = cand;
            }
        } else {
            for (std::size_t f = 0; f < x_.d; ++f) {
                BestSplit cand = scan_feature(static_cast<int>(f), begin, end, G, H);
                if (cand.beats(best)) best = cand;
            }
        }
        return best;
    }

    const MatrixView& x_;
    const std::vector<double>& g_;
    const std::vector<double>& h_;
    BoostTreeParams params_;
    std::optional<SortedOrders> orders_;
    std::vector<char> go_left_;
    Tree tree_;
};

}  // namespace

Tree build_cart_tree(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<int>& row_weight, const CartParams& params, Rng* rng) {
    if (params.mtry > 0 && !rng) throw std::invalid_argument("mtry subsampling needs an rng");
    CartBuilder builder(x, y, row_weight, params, rng);
    return builder.build();
}

Tree build_boost_tree(const MatrixView& x, const std::vector<double>& grad,
                      const std::vector<double>& hess, const BoostTreeParams& params) {
    BoostBuilder builder(x, grad, hess, params);
    return builder.build();
}

std::string tree_to_dot(const Tree& tree, const std::vector<std::string>& feature_names,
                        const std::string& graph_name) {
    std::ostringstream out;
    out << "digraph " << (graph_name.empty() ? "tree" : graph_name) << " {\n";
    out << "  node [shape=box, fontname=\"Helvetica\"];\n";
    char buf[64];
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& n = tree.nodes[i];
        out << "  n" << i << " [label=\"";
        if (!n.is_leaf()) {
            const std::string name = n.feature < static_cast<int>(feature_names.size())
                                         ? feature_names[n.feature]
                                         : "f" + std::to_string(n.feature);
            std::snprintf(buf, sizeof buf, "%.6g", n.threshold);
            out << name << " <= " << buf << "\\n";
        }
        std::snprintf(buf, sizeof buf, "%.6g", n.value);
        out << "samples = " << n.samples << "\\nvalue = " << buf << "\"];\n";
    }
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        const TreeNode& n = tree.nodes[i];
        if (!n.is_leaf()) {
            out << "  n" << i << " -> n" << n.left << " [label=\"yes\"];\n";
            out << "  n" << i << " -> n" << n.right << " [label=\"no\"];\n";
        }
    }
    out << "}\n";
    return out.str();
}

}  // namespace dealscope::models
