#include "dealscope/models/artifact.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace dealscope::models {

namespace {

template <class T>
const T& payload_as(const ModelArtifact& artifact) {
    return std::get<T>(artifact.payload);
}

nlohmann::json resolved_params(const ModelSpec& spec) {
    nlohmann::json p = spec.params.is_object() ? spec.params : nlohmann::json::object();
    auto set_default = [&](const char* key, nlohmann::json value) {
        if (!p.contains(key)) p[key] = std::move(value);
    };
    switch (spec.kind) {
        case ModelKind::LR:
            set_default("l2", 1e-4);
            set_default("max_epochs", 500);
            set_default("tol", 1e-8);
            break;
        case ModelKind::DT:
            set_default("max_depth", 6);
            set_default("min_samples_leaf", 5);
            break;
        case ModelKind::RF:
            set_default("n_trees", 100);
            set_default("max_depth", 0);
            set_default("min_samples_leaf", 1);
            set_default("mtry", -1);
            set_default("bootstrap", true);
            break;
        case ModelKind::KNN:
            set_default("k", 5);
            break;
        case ModelKind::SVM:
            set_default("lambda", 1e-4);
            set_default("epochs", 20);
            break;
        case ModelKind::XGB:
            set_default("n_rounds", 100);
            set_default("max_depth", 6);
            set_default("learning_rate", 0.1);
            set_default("lambda", 1.0);
            set_default("gamma", 0.0);
            break;
    }
    p.erase("threads");  // runtime knob, not part of the model
    return p;
}

}  // namespace

double ModelArtifact::predict_proba(const double* x) const {
    return std::visit([&](const auto& fit) { return fit.predict_proba(x); }, payload);
}

double ModelArtifact::raw_score(const double* x) const {
    switch (kind) {
        case ModelKind::LR:
            return payload_as<LogisticFit>(*this).raw_score(x);
        case ModelKind::SVM:
            return payload_as<SvmFit>(*this).raw_score(x);
        case ModelKind::XGB:
            return payload_as<BoostFit>(*this).raw_score(x);
        default:
            return predict_proba(x);
    }
}

double ModelArtifact::predict_proba_checked(const std::vector<double>& x) const {
    if (x.size() != dim()) {
        throw std::invalid_argument("feature vector has " + std::to_string(x.size()) +
                                    " values, model expects " + std::to_string(dim()));
    }
    for (double v : x) {
        if (!std::isfinite(v)) throw std::invalid_argument("feature vector has non-finite values");
    }
    return predict_proba(x.data());
}

std::size_t ModelArtifact::tree_count() const {
    switch (kind) {
        case ModelKind::DT:
            return 1;
        case ModelKind::RF:
            return payload_as<ForestFit>(*this).trees.size();
        case ModelKind::XGB:
            return payload_as<BoostFit>(*this).trees.size();
        default:
            return 0;
    }
}

const Tree& ModelArtifact::tree_at(std::size_t index) const {
    if (index >= tree_count()) {
        throw std::invalid_argument(model_name(kind) + std::string(" artifact has ") +
                                    std::to_string(tree_count()) + " trees, asked for index " +
                                    std::to_string(index));
    }
    switch (kind) {
        case ModelKind::DT:
            return payload_as<CartFit>(*this).tree;
        case ModelKind::RF:
            return payload_as<ForestFit>(*this).trees[index];
        default:
            return payload_as<BoostFit>(*this).trees[index];
    }
}

nlohmann::json ModelArtifact::to_json() const {
    nlohmann::json payload_json =
        std::visit([](const auto& fit) { return fit.to_json(); }, payload);
    nlohmann::json j{{"schema_version", kSchemaVersion},
                     {"kind", model_name(kind)},
                     {"params", params},
                     {"seed", seed},
                     {"feature_names", feature_names},
                     {"converged", converged},
                     {"payload", payload_json}};
    if (imputation) j["imputation"] = *imputation;
    return j;
}

std::string ModelArtifact::serialize() const { return to_json().dump(2) + "\n"; }

ModelArtifact ModelArtifact::from_json(const nlohmann::json& j) {
    const int version = j.at("schema_version").get<int>();
    if (version != kSchemaVersion) {
        throw std::invalid_argument("unsupported artifact schema_version " +
                                    std::to_string(version));
    }
    ModelArtifact artifact;
    artifact.kind = model_from_name(j.at("kind").get<std::string>());
    artifact.params = j.at("params");
    artifact.seed = j.at("seed").get<std::uint64_t>();
    artifact.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    artifact.converged = j.at("converged").get<bool>();
    if (j.contains("imputation")) artifact.imputation = j.at("imputation");
    const nlohmann::json& p = j.at("payload");
    switch (artifact.kind) {
        case ModelKind::LR:
            artifact.payload = LogisticFit::from_json(p);
            break;
        case ModelKind::DT:
            artifact.payload = CartFit::from_json(p);
            break;
        case ModelKind::RF:
            artifact.payload = ForestFit::from_json(p);
            break;
        case ModelKind::KNN:
            artifact.payload = KnnFit::from_json(p);
            break;
        case ModelKind::SVM:
            artifact.payload = SvmFit::from_json(p);
            break;
        case ModelKind::XGB:
            artifact.payload = BoostFit::from_json(p);
            break;
    }
    return artifact;
}

ModelArtifact ModelArtifact::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path);
    nlohmann::json j;
    in >> j;
    ModelArtifact artifact = from_json(j);
    if (artifact.dim() == 0) throw std::runtime_error("model file has no features: " + path);
    return artifact;
}

void ModelArtifact::save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model file: " + path);
    out << serialize();
    if (!out) throw std::runtime_error("short write on model file: " + path);
}

ModelArtifact fit_model(const ModelSpec& spec, const MatrixView& x, const std::vector<int>& y,
                        const std::vector<std::string>& feature_names, unsigned threads) {
    if (x.n == 0 || y.size() != x.n) throw std::invalid_argument("model fit: bad shapes");
    if (feature_names.size() != x.d) throw std::invalid_argument("feature name count mismatch");
    bool has_pos = false, has_neg = false;
    for (int yi : y) (yi ? has_pos : has_neg) = true;
    if (!has_pos || !has_neg) throw std::invalid_argument("training data needs both classes");
    for (std::size_t i = 0; i < x.n * x.d; ++i) {
        if (!std::isfinite(x.data[i]))
            throw std::invalid_argument("training data has missing or non-finite values");
    }

    ModelArtifact artifact;
    artifact.kind = spec.kind;
    artifact.params = resolved_params(spec);
    artifact.seed = spec.seed;
    artifact.feature_names = feature_names;
    const nlohmann::json& p = artifact.params;

    switch (spec.kind) {
        case ModelKind::LR: {
            LogisticParams lp;
            lp.l2 = p.at("l2").get<double>();
            lp.max_epochs = p.at("max_epochs").get<int>();
            lp.tol = p.at("tol").get<double>();
            LogisticFit fit = train_logistic(x, y, lp);
            artifact.converged = fit.model.converged;
            artifact.payload = std::move(fit);
            break;
        }
        case ModelKind::DT: {
            CartParams cp;
            cp.max_depth = p.at("max_depth").get<int>();
            cp.min_samples_leaf = p.at("min_samples_leaf").get<int>();
            artifact.payload = train_cart(x, y, cp);
            break;
        }
        case ModelKind::RF: {
            ForestParams fp;
            fp.n_trees = p.at("n_trees").get<int>();
            fp.max_depth = p.at("max_depth").get<int>();
            fp.min_samples_leaf = p.at("min_samples_leaf").get<int>();
            fp.mtry = p.at("mtry").get<int>();
            fp.bootstrap = p.at("bootstrap").get<bool>();
            fp.threads = threads;
            Rng rng(spec.seed);
            artifact.payload = train_forest(x, y, fp, rng);
            break;
        }
        case ModelKind::KNN: {
            KnnParams kp;
            kp.k = p.at("k").get<int>();
            artifact.payload = train_knn(x, y, kp);
            break;
        }
        case ModelKind::SVM: {
            SvmParams sp;
            sp.lambda = p.at("lambda").get<double>();
            sp.epochs = p.at("epochs").get<int>();
            Rng rng(spec.seed);
            SvmFit fit = train_svm(x, y, sp, rng);
            artifact.converged = fit.converged;
            artifact.payload = std::move(fit);
            break;
        }
        case ModelKind::XGB: {
            BoostParams bp;
            bp.n_rounds = p.at("n_rounds").get<int>();
            bp.max_depth = p.at("max_depth").get<int>();
            bp.learning_rate = p.at("learning_rate").get<double>();
            bp.lambda = p.at("lambda").get<double>();
            bp.gamma = p.at("gamma").get<double>();
            bp.threads = threads;
            artifact.payload = train_boost(x, y, bp);
            break;
        }
    }
    return artifact;
}

std::string export_tree(const ModelArtifact& artifact, std::size_t index) {
    const Tree& tree = artifact.tree_at(index);  // throws for non-tree kinds
    const std::string name = std::string(model_name(artifact.kind)) +
                             (artifact.tree_count() > 1 ? "_" + std::to_string(index) : "");
    return tree_to_dot(tree, artifact.feature_names, name);
}

}  // namespace dealscope::models
