#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dealscope/dataset.hpp"
#include "dealscope/models/artifact.hpp"

namespace dealscope::shap {

// Attributions live in raw-score units: log-odds for XGB, margin for
// SVM, linear predictor for LR, probability for DT/RF/kNN whose native
// output is already additive over leaves.
struct ShapVector {
    double base_value = 0.0;
    std::vector<double> phi;

    double reconstructed() const {
        double total = base_value;
        for (double p : phi) total += p;
        return total;
    }
};

// Exact Shapley values of an arbitrary set function by enumerating all
// 2^d coalitions. value_fn receives the membership mask. d <= 15.
ShapVector exact_shapley(std::size_t d,
                         const std::function<double(const std::vector<bool>&)>& value_fn);

// Interventional value function: absent features are replaced by each
// background row in turn and the raw scores averaged. d <= 15.
ShapVector shap_exact(const models::ModelArtifact& model, const double* x,
                      const Dataset& background);

// Path-dependent attribution for one tree, linear in (leaves x depth^2).
ShapVector shap_tree_single(const models::Tree& tree, const double* x);

// DT/RF/XGB artifacts: per-tree attributions combined by the ensemble
// rule (mean over trees for RF, sum plus base score for XGB).
ShapVector shap_tree(const models::ModelArtifact& artifact, const double* x);

// Symmetric d x d interaction matrix. Off-diagonal entries follow the
// pairwise Shapley interaction definition (computed by conditioning
// each feature present/absent); the diagonal holds main effects so that
// each row sums to the feature's shap value.
struct InteractionMatrix {
    std::size_t d = 0;
    double base_value = 0.0;
    std::vector<double> phi;     // row sums, = shap_tree output
    std::vector<double> values;  // row-major d x d

    double at(std::size_t i, std::size_t j) const { return values[i * d + j]; }
};

InteractionMatrix shap_interactions(const models::ModelArtifact& artifact, const double* x);

// Per-row attributions for a dense dataset. Tree artifacts use the path
// method; other kinds fall back to shap_exact against `background`
// (required, d <= 15) and reject otherwise.
std::vector<ShapVector> shap_batch(const models::ModelArtifact& artifact, const Dataset& data,
                                   const Dataset* background, unsigned threads);

struct ImportanceEntry {
    std::size_t feature = 0;
    double mean_abs_phi = 0.0;
};

// Features ranked by mean |phi| descending; ties keep input order.
std::vector<ImportanceEntry> global_importance(const std::vector<ShapVector>& rows, std::size_t d);

void write_phi_csv(const std::string& path, const std::vector<std::string>& ids,
                   const std::vector<std::string>& feature_names,
                   const std::vector<ShapVector>& rows);
void write_importance_json(const std::string& path, const std::vector<std::string>& feature_names,
                           const std::vector<ImportanceEntry>& ranking);
// Long-form per-instance interaction export: id, feature_i, feature_j, value.
void write_interactions_csv(const std::string& path, const std::vector<std::string>& ids,
                            const std::vector<std::string>& feature_names,
                            const std::vector<InteractionMatrix>& rows);
// Dependence-plot triples for one feature and a partner feature.
void write_dependence_csv(const std::string& path, const std::vector<std::string>& ids,
                          const Dataset& data, const std::vector<ShapVector>& rows,
                          std::size_t feature, std::size_t partner);

}  // namespace dealscope::shap
