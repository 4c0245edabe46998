#pragma once

#include <vector>

#include "dealscope/models/common.hpp"

namespace dealscope::models {

struct LogisticParams {
    double l2 = 1e-4;   // ridge penalty, intercept excluded
    int max_epochs = 500;
    double tol = 1e-8;  // sup-norm gradient threshold
};

// Coefficients live on the standardized feature scale. The inference
// block (standard errors, t statistics, two-sided normal p values) is
// ordered intercept first, then features, and comes from the inverse
// observed information of the unpenalized log-likelihood at the fitted
// point. A singular information matrix leaves se_available false.
struct LogisticModel {
    std::vector<double> weights;
    double intercept = 0.0;
    bool converged = false;
    int epochs_run = 0;
    double final_loss = 0.0;
    bool se_available = false;
    std::vector<double> std_errors;
    std::vector<double> t_statistics;
    std::vector<double> p_values;
};

// Mean logistic loss plus 0.5 * l2 * ||w||^2 (intercept unpenalized),
// and its exact gradient. Exposed separately so the gradient can be
// checked against finite differences.
double logistic_loss(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double l2);
void logistic_gradient(const MatrixView& x, const std::vector<int>& y,
                       const std::vector<double>& w, double b, double l2,
                       std::vector<double>* grad_w, double* grad_b);

// Full-batch gradient descent with Armijo backtracking on standardized
// inputs.
LogisticModel fit_logistic(const MatrixView& x_standardized, const std::vector<int>& y,
                           const LogisticParams& params);

struct LogisticFit {
    Standardizer scaler;
    LogisticModel model;

    double raw_score(const double* x) const;      // linear predictor
    double predict_proba(const double* x) const;  // sigmoid of the raw score
    nlohmann::json to_json() const;
    static LogisticFit from_json(const nlohmann::json& j);
};

LogisticFit train_logistic(const MatrixView& x, const std::vector<int>& y,
                           const LogisticParams& params);

}  // namespace dealscope::models
