#include "dealscope/shap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

#include "dealscope/csv.hpp"
#include "dealscope/threading.hpp"

namespace dealscope::shap {

namespace {

constexpr std::size_t kExactLimit = 15;

}  // namespace

ShapVector exact_shapley(std::size_t d,
                         const std::function<double(const std::vector<bool>&)>& value_fn) {
    if (d == 0) throw std::invalid_argument("no features to attribute");
    if (d > kExactLimit) {
        throw std::invalid_argument("exact enumeration limited to " +
                                    std::to_string(kExactLimit) +
                                    " features; use the tree method");
    }
    const std::size_t n_masks = std::size_t{1} << d;
    std::vector<double> value(n_masks);
    std::vector<bool> mask(d);
    for (std::size_t m = 0; m < n_masks; ++m) {
        for (std::size_t j = 0; j < d; ++j) mask[j] = (m >> j) & 1u;
        value[m] = value_fn(mask);
    }
    // w(s) = s! (d-s-1)! / d!  for a coalition of size s not containing
    // the feature being added.
    std::vector<double> fact(d + 1, 1.0);
    for (std::size_t i = 1; i <= d; ++i) fact[i] = fact[i - 1] * static_cast<double>(i);
    std::vector<double> weight(d);
    for (std::size_t s = 0; s < d; ++s) {
        weight[s] = fact[s] * fact[d - s - 1] / fact[d];
    }
    ShapVector out;
    out.base_value = value[0];
    out.phi.assign(d, 0.0);
    for (std::size_t m = 0; m < n_masks; ++m) {
        const int size = __builtin_popcountll(static_cast<unsigned long long>(m));
        for (std::size_t j = 0; j < d; ++j) {
            if ((m >> j) & 1u) continue;
            out.phi[j] += weight[size] * (value[m | (std::size_t{1} << j)] - value[m]);
        }
    }
    return out;
}

ShapVector shap_exact(const models::ModelArtifact& model, const double* x,
                      const Dataset& background) {
    const std::size_t d = model.dim();
    if (background.n() == 0) throw std::invalid_argument("background set is empty");
    if (background.d() != d) throw std::invalid_argument("background feature count mismatch");
    for (double v : background.x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("background rows must be imputed before attribution");
        }
    }
    std::vector<double> composed(d);
    auto value_fn = [&](const std::vector<bool>& present) {
        double total = 0.0;
        for (std::size_t b = 0; b < background.n(); ++b) {
            const double* row = &background.x[b * d];
            for (std::size_t j = 0; j < d; ++j) composed[j] = present[j] ? x[j] : row[j];
            total += model.raw_score(composed.data());
        }
        return total / static_cast<double>(background.n());
    };
    return exact_shapley(d, value_fn);
}

namespace {

struct PathElement {
    int feature_index = 0;
    double zero_fraction = 0.0;
    double one_fraction = 0.0;
    double pweight = 0.0;
};

void extend_path(PathElement* unique_path, unsigned unique_depth, double zero_fraction,
                 double one_fraction, int feature_index) {
    unique_path[unique_depth] = {feature_index, zero_fraction, one_fraction,
                                 unique_depth == 0 ? 1.0 : 0.0};
    for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
        unique_path[i + 1].pweight += one_fraction * unique_path[i].pweight *
                                      static_cast<double>(i + 1) /
                                      static_cast<double>(unique_depth + 1);
        unique_path[i].pweight = zero_fraction * unique_path[i].pweight *
                                 static_cast<double>(unique_depth - i) /
                                 static_cast<double>(unique_depth + 1);
    }
}

void unwind_path(PathElement* unique_path, unsigned unique_depth, unsigned path_index) {
    const double one_fraction = unique_path[path_index].one_fraction;
    const double zero_fraction = unique_path[path_index].zero_fraction;
    double next_one_portion = unique_path[unique_depth].pweight;
    for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
        if (one_fraction != 0.0) {
            const double tmp = unique_path[i].pweight;
            unique_path[i].pweight = next_one_portion * static_cast<double>(unique_depth + 1) /
                                     (static_cast<double>(i + 1) * one_fraction);
            next_one_portion = tmp - unique_path[i].pweight * zero_fraction *
                                         static_cast<double>(unique_depth - i) /
                                         static_cast<double>(unique_depth + 1);
        } else {
            unique_path[i].pweight = unique_path[i].pweight *
                                     static_cast<double>(unique_depth + 1) /
                                     (zero_fraction * static_cast<double>(unique_depth - i));
        }
    }
    for (unsigned i = path_index; i < unique_depth; ++i) {
        unique_path[i].feature_index = unique_path[i + 1].feature_index;
        unique_path[i].zero_fraction = unique_path[i + 1].zero_fraction;
        unique_path[i].one_fraction = unique_path[i + 1].one_fraction;
    }
}

double unwound_path_sum(const PathElement* unique_path, unsigned unique_depth,
                        unsigned path_index) {
    const double one_fraction = unique_path[path_index].one_fraction;
    const double zero_fraction = unique_path[path_index].zero_fraction;
    double next_one_portion = unique_path[unique_depth].pweight;
    double total = 0.0;
    if (one_fraction != 0.0) {
        for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
            const double tmp =
                next_one_portion / (static_cast<double>(i + 1) * one_fraction);
            total += tmp;
            next_one_portion =
                unique_path[i].pweight - tmp * zero_fraction *
                                             static_cast<double>(unique_depth - i);
        }
    } else {
        for (int i = static_cast<int>(unique_depth) - 1; i >= 0; --i) {
            total += unique_path[i].pweight /
                     (zero_fraction * static_cast<double>(unique_depth - i));
        }
    }
    return total * static_cast<double>(unique_depth + 1);
}

// Port of the path-dependent tree attribution recursion: the unique
// path tracks one entry per distinct feature split on so far, with the
// fractions of subsets that flow down (zero) and of the instance path
// (one). condition fixes one feature present (+1) or absent (-1) for
// interaction values.
void tree_shap_recursive(const models::Tree& tree, const double* x, double* phi, int node_index,
                         unsigned unique_depth, PathElement* parent_unique_path,
                         double parent_zero_fraction, double parent_one_fraction,
                         int parent_feature_index, int condition, int condition_feature,
                         double condition_fraction) {
    if (condition_fraction == 0.0) return;
    const models::TreeNode& node = tree.nodes[node_index];

    PathElement* unique_path = parent_unique_path + unique_depth + 1;
    std::copy(parent_unique_path, parent_unique_path + unique_depth + 1, unique_path);
    if (condition == 0 || condition_feature != parent_feature_index) {
        extend_path(unique_path, unique_depth, parent_zero_fraction, parent_one_fraction,
                    parent_feature_index);
    }

    if (node.is_leaf()) {
        for (unsigned i = 1; i <= unique_depth; ++i) {
            const double w = unwound_path_sum(unique_path, unique_depth, i);
            const PathElement& el = unique_path[i];
            phi[el.feature_index] +=
                w * (el.one_fraction - el.zero_fraction) * node.value * condition_fraction;
        }
        return;
    }

    const int split_index = node.feature;
    const int hot_index = x[split_index] <= node.threshold ? node.left : node.right;
    const int cold_index = hot_index == node.left ? node.right : node.left;
    const double w = node.cover;
    const double hot_zero_fraction = tree.nodes[hot_index].cover / w;
    const double cold_zero_fraction = tree.nodes[cold_index].cover / w;
    double incoming_zero_fraction = 1.0;
    double incoming_one_fraction = 1.0;

    // If this feature is already on the path, undo that extension: the
    // new split subsumes it.
    unsigned path_index = 0;
    for (; path_index <= unique_depth; ++path_index) {
        if (unique_path[path_index].feature_index == split_index) break;
    }
    if (path_index != unique_depth + 1) {
        incoming_zero_fraction = unique_path[path_index].zero_fraction;
        incoming_one_fraction = unique_path[path_index].one_fraction;
        unwind_path(unique_path, unique_depth, path_index);
        unique_depth -= 1;
    }

    double hot_condition_fraction = condition_fraction;
    double cold_condition_fraction = condition_fraction;
    if (condition > 0 && split_index == condition_feature) {
        cold_condition_fraction = 0.0;
        unique_depth -= 1;  // the conditioned feature never extends the path
    } else if (condition < 0 && split_index == condition_feature) {
        hot_condition_fraction *= hot_zero_fraction;
        cold_condition_fraction *= cold_zero_fraction;
        unique_depth -= 1;
    }

    tree_shap_recursive(tree, x, phi, hot_index, unique_depth + 1, unique_path,
                        hot_zero_fraction * incoming_zero_fraction, incoming_one_fraction,
                        split_index, condition, condition_feature, hot_condition_fraction);
    tree_shap_recursive(tree, x, phi, cold_index, unique_depth + 1, unique_path,
                        cold_zero_fraction * incoming_zero_fraction, 0.0, split_index, condition,
                        condition_feature, cold_condition_fraction);
}

void tree_shap(const models::Tree& tree, const double* x, double* phi, int condition,
               int condition_feature) {
    const int depth = tree.max_depth();
    const std::size_t arena =
        static_cast<std::size_t>(depth + 2) * static_cast<std::size_t>(depth + 3) / 2;
    std::vector<PathElement> path(arena);
    tree_shap_recursive(tree, x, phi, 0, 0, path.data(), 1.0, 1.0, -1, condition,
                        condition_feature, 1.0);
}

// Per-tree attribution accumulated with an ensemble weight, so RF can
// average and XGB can sum.
void accumulate_shap(const models::ModelArtifact& artifact, const double* x,
                     std::vector<double>& phi, double& base, int condition,
                     int condition_feature) {
    const std::size_t trees = artifact.tree_count();
    if (trees == 0) {
        throw std::invalid_argument(std::string(models::model_name(artifact.kind)) +
                                    " is not a tree model; tree attribution rejected");
    }
    const double scale =
        artifact.kind == models::ModelKind::RF ? 1.0 / static_cast<double>(trees) : 1.0;
    std::vector<double> tree_phi(artifact.dim());
    for (std::size_t t = 0; t < trees; ++t) {
        std::fill(tree_phi.begin(), tree_phi.end(), 0.0);
        tree_shap(artifact.tree_at(t), x, tree_phi.data(), condition, condition_feature);
        for (std::size_t j = 0; j < tree_phi.size(); ++j) phi[j] += scale * tree_phi[j];
        if (condition == 0) base += scale * artifact.tree_at(t).expected_value();
    }
    if (condition == 0 && artifact.kind == models::ModelKind::XGB) {
        base += std::get<models::BoostFit>(artifact.payload).base_score;
    }
}

}  // namespace

ShapVector shap_tree_single(const models::Tree& tree, const double* x) {
    int max_feature = -1;
    for (const auto& node : tree.nodes) max_feature = std::max(max_feature, node.feature);
    ShapVector out;
    out.phi.assign(static_cast<std::size_t>(max_feature + 1), 0.0);
    out.base_value = tree.expected_value();
    if (max_feature >= 0) tree_shap(tree, x, out.phi.data(), 0, -1);
    return out;
}

ShapVector shap_tree(const models::ModelArtifact& artifact, const double* x) {
    ShapVector out;
    out.phi.assign(artifact.dim(), 0.0);
    out.base_value = 0.0;
    accumulate_shap(artifact, x, out.phi, out.base_value, 0, -1);
    return out;
}

InteractionMatrix shap_interactions(const models::ModelArtifact& artifact, const double* x) {
    const std::size_t d = artifact.dim();
    InteractionMatrix out;
    out.d = d;
    out.values.assign(d * d, 0.0);

    const ShapVector plain = shap_tree(artifact, x);
    out.base_value = plain.base_value;
    out.phi = plain.phi;

    // For each conditioned feature j, phi-on minus phi-off halved gives
    // the column of pairwise interactions with j.
    std::vector<double> on(d), off(d);
    double ignored = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
        std::fill(on.begin(), on.end(), 0.0);
        std::fill(off.begin(), off.end(), 0.0);
        accumulate_shap(artifact, x, on, ignored, 1, static_cast<int>(j));
        accumulate_shap(artifact, x, off, ignored, -1, static_cast<int>(j));
        for (std::size_t i = 0; i < d; ++i) {
            if (i == j) continue;
            out.values[i * d + j] = 0.5 * (on[i] - off[i]);
        }
    }
    // Enforce exact symmetry, then close each row so it sums to phi_i.
    for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = i + 1; j < d; ++j) {
            const double sym = 0.5 * (out.values[i * d + j] + out.values[j * d + i]);
            out.values[i * d + j] = sym;
            out.values[j * d + i] = sym;
        }
    }
    for (std::size_t i = 0; i < d; ++i) {
        double off_sum = 0.0;
        for (std::size_t j = 0; j < d; ++j) {
            if (j != i) off_sum += out.values[i * d + j];
        }
        out.values[i * d + i] = out.phi[i] - off_sum;
    }
    return out;
}

std::vector<ShapVector> shap_batch(const models::ModelArtifact& artifact, const Dataset& data,
                                   const Dataset* background, unsigned threads) {
    if (data.d() != artifact.dim()) {
        throw std::invalid_argument("data feature count does not match the model");
    }
    for (double v : data.x) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument("rows must be imputed before attribution");
        }
    }
    std::vector<ShapVector> rows(data.n());
    const bool tree_kind = artifact.tree_count() > 0;
    if (!tree_kind) {
        if (!background) {
            throw std::invalid_argument("non-tree models need a background set for attribution");
        }
        parallel_chunks(data.n(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t i = b; i < e; ++i) {
                rows[i] = shap_exact(artifact, &data.x[i * data.d()], *background);
            }
        });
    } else {
        parallel_chunks(data.n(), threads, [&](std::size_t b, std::size_t e, std::size_t) {
            for (std::size_t i = b; i < e; ++i) {
                rows[i] = shap_tree(artifact, &data.x[i * data.d()]);
            }
        });
    }
    return rows;
}

std::vector<ImportanceEntry> global_importance(const std::vector<ShapVector>& rows,
                                               std::size_t d) {
    if (rows.empty()) throw std::invalid_argument("no attributions to rank");
    std::vector<ImportanceEntry> entries(d);
    for (std::size_t j = 0; j < d; ++j) entries[j].feature = j;
    for (const ShapVector& row : rows) {
        if (row.phi.size() != d) throw std::invalid_argument("attribution width mismatch");
        for (std::size_t j = 0; j < d; ++j) entries[j].mean_abs_phi += std::fabs(row.phi[j]);
    }
    for (auto& e : entries) e.mean_abs_phi /= static_cast<double>(rows.size());
    std::stable_sort(entries.begin(), entries.end(),
                     [](const ImportanceEntry& a, const ImportanceEntry& b) {
                         return a.mean_abs_phi > b.mean_abs_phi;
                     });
    return entries;
}

void write_phi_csv(const std::string& path, const std::vector<std::string>& ids,
                   const std::vector<std::string>& feature_names,
                   const std::vector<ShapVector>& rows) {
    CsvWriter out(path);
    std::vector<std::string> header{"id", "base_value", "raw_score"};
    for (const auto& name : feature_names) header.push_back("phi_" + name);
    out.write_row(header);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        std::vector<std::string> fields{i < ids.size() ? ids[i] : std::to_string(i),
                                        format_double(rows[i].base_value),
                                        format_double(rows[i].reconstructed())};
        for (double p : rows[i].phi) fields.push_back(format_double(p));
        out.write_row(fields);
    }
    out.close();
}

void write_importance_json(const std::string& path, const std::vector<std::string>& feature_names,
                           const std::vector<ImportanceEntry>& ranking) {
    nlohmann::json arr = nlohmann::json::array();
    for (std::size_t r = 0; r < ranking.size(); ++r) {
        arr.push_back({{"rank", r + 1},
                       {"feature", feature_names[ranking[r].feature]},
                       {"mean_abs_phi", ranking[r].mean_abs_phi}});
    }
    nlohmann::json j{{"importance", arr}};
    std::string text = j.dump(2) + "\n";
    std::ofstream file(path, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write " + path);
    file << text;
}

void write_interactions_csv(const std::string& path, const std::vector<std::string>& ids,
                            const std::vector<std::string>& feature_names,
                            const std::vector<InteractionMatrix>& rows) {
    CsvWriter out(path);
    out.write_row({"id", "feature_i", "feature_j", "value"});
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const InteractionMatrix& m = rows[r];
        const std::string& id = r < ids.size() ? ids[r] : std::to_string(r);
        for (std::size_t i = 0; i < m.d; ++i) {
            for (std::size_t j = 0; j < m.d; ++j) {
                out.write_row({id, feature_names[i], feature_names[j],
                               format_double(m.at(i, j))});
            }
        }
    }
    out.close();
}

void write_dependence_csv(const std::string& path, const std::vector<std::string>& ids,
                          const Dataset& data, const std::vector<ShapVector>& rows,
                          std::size_t feature, std::size_t partner) {
    if (feature >= data.d() || partner >= data.d()) {
        throw std::invalid_argument("dependence feature index out of range");
    }
    CsvWriter out(path);
    out.write_row({"id", "feature_value", "phi", "partner_value"});
    for (std::size_t i = 0; i < rows.size(); ++i) {
        out.write_row({i < ids.size() ? ids[i] : std::to_string(i),
                       format_double(data.at(i, feature)), format_double(rows[i].phi[feature]),
                       format_double(data.at(i, partner))});
    }
    out.close();
}

}  // namespace dealscope::shap
