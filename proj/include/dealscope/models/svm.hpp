#pragma once

#include <vector>

#include "dealscope/models/common.hpp"
#include "dealscope/rng.hpp"

namespace dealscope::models {

struct SvmParams {
    double lambda = 1e-4;
    int epochs = 20;
};

// Primal objective 0.5 * lambda * ||w||^2 + mean hinge(1 - y f(x)) with
// y in {-1,+1} derived from the 0/1 labels, plus a subgradient that
// finite-difference checks can probe away from hinge kinks.
double svm_objective(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double lambda);
void svm_subgradient(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double lambda,
                     std::vector<double>* grad_w, double* grad_b);

// Sigmoid calibration parameters for P(y=1|f) = 1/(1+exp(a*f + c)).
struct PlattScaling {
    double a = 0.0;
    double c = 0.0;
    bool converged = false;
};

// Newton fit of the calibration sigmoid on decision values, using the
// smoothed targets (n_pos+1)/(n_pos+2) and 1/(n_neg+2).
PlattScaling fit_platt(const std::vector<double>& decision, const std::vector<int>& y);

struct SvmFit {
    Standardizer scaler;
    std::vector<double> weights;  // standardized scale
    double intercept = 0.0;
    PlattScaling platt;
    bool converged = false;
    double final_objective = 0.0;

    double raw_score(const double* x) const;  // margin
    double predict_proba(const double* x) const;
    nlohmann::json to_json() const;
    static SvmFit from_json(const nlohmann::json& j);
};

// Pegasos stochastic subgradient descent over standardized inputs, with
// the intercept kept out of the regularizer.
SvmFit train_svm(const MatrixView& x, const std::vector<int>& y, const SvmParams& params,
                 Rng& rng);

}  // namespace dealscope::models
