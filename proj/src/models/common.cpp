#include "dealscope/models/common.hpp"

#include <cmath>
#include <stdexcept>

namespace dealscope::models {

ModelKind model_from_name(const std::string& name) {
    if (name == "lr") return ModelKind::LR;
    if (name == "dt") return ModelKind::DT;
    if (name == "rf") return ModelKind::RF;
    if (name == "knn") return ModelKind::KNN;
    if (name == "svm") return ModelKind::SVM;
    if (name == "xgb") return ModelKind::XGB;
    throw std::invalid_argument("unknown model '" + name + "'");
}

const char* model_name(ModelKind k) {
    switch (k) {
        case ModelKind::LR: return "lr";
        case ModelKind::DT: return "dt";
        case ModelKind::RF: return "rf";
        case ModelKind::KNN: return "knn";
        case ModelKind::SVM: return "svm";
        case ModelKind::XGB: return "xgb";
    }
    return "lr";
}

Standardizer Standardizer::fit(const MatrixView& x) {
    Standardizer s;
    s.mean.assign(x.d, 0.0);
    s.scale.assign(x.d, 1.0);
    if (x.n == 0) return s;
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t j = 0; j < x.d; ++j) s.mean[j] += x.at(i, j);
    }
    for (std::size_t j = 0; j < x.d; ++j) s.mean[j] /= static_cast<double>(x.n);
    std::vector<double> var(x.d, 0.0);
    for (std::size_t i = 0; i < x.n; ++i) {
        for (std::size_t j = 0; j < x.d; ++j) {
            const double c = x.at(i, j) - s.mean[j];
            var[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < x.d; ++j) {
        const double sd = std::sqrt(var[j] / static_cast<double>(x.n));
        s.scale[j] = sd > 0.0 ? sd : 1.0;
    }
    return s;
}

void Standardizer::transform_row(const double* in, double* out) const {
    for (std::size_t j = 0; j < mean.size(); ++j) out[j] = (in[j] - mean[j]) / scale[j];
}

std::vector<double> Standardizer::transform(const MatrixView& x) const {
    std::vector<double> out(x.n * x.d);
    for (std::size_t i = 0; i < x.n; ++i) transform_row(x.row(i), &out[i * x.d]);
    return out;
}

nlohmann::json Standardizer::to_json() const {
    return {{"mean", mean}, {"scale", scale}};
}

Standardizer Standardizer::from_json(const nlohmann::json& j) {
    Standardizer s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.scale = j.at("scale").get<std::vector<double>>();
    return s;
}

}  // namespace dealscope::models
