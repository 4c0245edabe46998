#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace dealscope::models {

// Row-major matrix view over externally owned storage.
struct MatrixView {
    const double* data = nullptr;
    std::size_t n = 0;
    std::size_t d = 0;
    double at(std::size_t i, std::size_t j) const { return data[i * d + j]; }
    const double* row(std::size_t i) const { return data + i * d; }
};

enum class ModelKind { LR, DT, RF, KNN, SVM, XGB };

ModelKind model_from_name(const std::string& name);
const char* model_name(ModelKind k);

struct ModelSpec {
    ModelKind kind = ModelKind::LR;
    nlohmann::json params;  // per-kind overrides on documented defaults
    std::uint64_t seed = 0;
};

// Column-wise z-scoring; zero-variance columns pass through centered.
struct Standardizer {
    std::vector<double> mean;
    std::vector<double> scale;

    static Standardizer fit(const MatrixView& x);
    void transform_row(const double* in, double* out) const;
    std::vector<double> transform(const MatrixView& x) const;
    nlohmann::json to_json() const;
    static Standardizer from_json(const nlohmann::json& j);
};

}  // namespace dealscope::models
