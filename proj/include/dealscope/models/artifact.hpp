#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "dealscope/models/boosting.hpp"
#include "dealscope/models/common.hpp"
#include "dealscope/models/forest.hpp"
#include "dealscope/models/knn.hpp"
#include "dealscope/models/logistic.hpp"
#include "dealscope/models/svm.hpp"
#include "dealscope/models/tree.hpp"

namespace dealscope::models {

// A trained classifier of any of the six kinds, serializable to
// versioned JSON. `raw_score` is the margin-space output explanations
// attribute to: the linear predictor for LR, the margin for SVM, the
// summed leaf scores for XGB, and the predicted probability for the
// models whose native output already lives in [0,1].
struct ModelArtifact {
    static constexpr int kSchemaVersion = 1;

    ModelKind kind = ModelKind::LR;
    nlohmann::json params;  // resolved hyperparameters
    std::uint64_t seed = 0;
    std::vector<std::string> feature_names;
    bool converged = true;
    std::optional<nlohmann::json> imputation;  // training-set fill values, if any
    std::variant<LogisticFit, CartFit, ForestFit, KnnFit, SvmFit, BoostFit> payload;

    std::size_t dim() const { return feature_names.size(); }
    double predict_proba(const double* x) const;
    double raw_score(const double* x) const;
    double predict_proba_checked(const std::vector<double>& x) const;

    // Trees reachable for export and tree-path explanations: DT has
    // one, RF/XGB one per member; other kinds none.
    std::size_t tree_count() const;
    const Tree& tree_at(std::size_t index) const;

    nlohmann::json to_json() const;
    std::string serialize() const;  // sorted keys, 2-space indent
    static ModelArtifact from_json(const nlohmann::json& j);
    static ModelArtifact load(const std::string& path);
    void save(const std::string& path) const;
};

// Trains the requested kind on dense features (no missing values, both
// classes present). Hyperparameters come from spec.params with the
// documented defaults; threads is a runtime knob and never changes
// results or the serialized artifact.
ModelArtifact fit_model(const ModelSpec& spec, const MatrixView& x, const std::vector<int>& y,
                        const std::vector<std::string>& feature_names, unsigned threads = 1);

// DOT rendering of one tree of a DT/RF/XGB artifact.
std::string export_tree(const ModelArtifact& artifact, std::size_t index = 0);

}  // namespace dealscope::models
