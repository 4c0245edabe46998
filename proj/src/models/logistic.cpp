#include "dealscope/models/logistic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dealscope/stats.hpp"

namespace dealscope::models {

double logistic_loss(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double l2) {
    double total = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        double z = b;
        const double* row = x.row(i);
        for (std::size_t j = 0; j < x.d; ++j) z += w[j] * row[j];
        // log(1 + exp(-s z)) with s = +-1 for y = 1/0
        total += log1p_exp(y[i] ? -z : z);
    }
    double penalty = 0.0;
    for (double wj : w) penalty += wj * wj;
    return total / static_cast<double>(x.n) + 0.5 * l2 * penalty;
}

void logistic_gradient(const MatrixView& x, const std::vector<int>& y,
                       const std::vector<double>& w, double b, double l2,
                       std::vector<double>* grad_w, double* grad_b) {
    grad_w->assign(x.d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        double z = b;
        const double* row = x.row(i);
        for (std::size_t j = 0; j < x.d; ++j) z += w[j] * row[j];
        const double resid = sigmoid(z) - (y[i] ? 1.0 : 0.0);
        gb += resid;
        for (std::size_t j = 0; j < x.d; ++j) (*grad_w)[j] += resid * row[j];
    }
    const double inv_n = 1.0 / static_cast<double>(x.n);
    gb *= inv_n;
    for (std::size_t j = 0; j < x.d; ++j) {
        (*grad_w)[j] = (*grad_w)[j] * inv_n + l2 * w[j];
    }
    *grad_b = gb;
}

namespace {

// Cholesky factorization in place; returns false on a non-positive
// pivot (singular or indefinite information matrix).
bool cholesky(std::vector<double>& a, std::size_t n) {
    for (std::size_t j = 0; j < n; ++j) {
        double diag = a[j * n + j];
        for (std::size_t k = 0; k < j; ++k) diag -= a[j * n + k] * a[j * n + k];
        if (!(diag > 1e-12)) return false;
        const double root = std::sqrt(diag);
        a[j * n + j] = root;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = a[i * n + j];
            for (std::size_t k = 0; k < j; ++k) v -= a[i * n + k] * a[j * n + k];
            a[i * n + j] = v / root;
        }
    }
    return true;
}

// Solve (L L^T) u = e_col and return u[col], the requested diagonal
// entry of the inverse.
double inverse_diagonal(const std::vector<double>& l, std::size_t n, std::size_t col) {
    std::vector<double> u(n, 0.0);
    u[col] = 1.0;
    for (std::size_t i = col; i < n; ++i) {
        double v = u[i];
        for (std::size_t k = col; k < i; ++k) v -= l[i * n + k] * u[k];
        u[i] = v / l[i * n + i];
    }
    for (std::size_t ii = n; ii-- > 0;) {
        double v = u[ii];
        for (std::size_t k = ii + 1; k < n; ++k) v -= l[k * n + ii] * u[k];
        u[ii] = v / l[ii * n + ii];
    }
    return u[col];
}

void fill_wald(const MatrixView& x, LogisticModel* model) {
    const std::size_t m = x.d + 1;  // intercept column first
    std::vector<double> info(m * m, 0.0);
    std::vector<double> xi(m, 1.0);
    for (std::size_t i = 0; i < x.n; ++i) {
        const double* row = x.row(i);
        double z = model->intercept;
        for (std::size_t j = 0; j < x.d; ++j) {
            z += model->weights[j] * row[j];
            xi[j + 1] = row[j];
        }
        const double p = sigmoid(z);
        const double wgt = p * (1.0 - p);
        for (std::size_t a = 0; a < m; ++a) {
            for (std::size_t b = 0; b <= a; ++b) info[a * m + b] += wgt * xi[a] * xi[b];
        }
    }
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) info[a * m + b] = info[b * m + a];
    }
    if (!cholesky(info, m)) {
        model->se_available = false;
        return;
    }
    model->std_errors.resize(m);
    model->t_statistics.resize(m);
    model->p_values.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double var = inverse_diagonal(info, m, j);
        if (!(var > 0.0) || !std::isfinite(var)) {
            model->se_available = false;
            model->std_errors.clear();
            model->t_statistics.clear();
            model->p_values.clear();
            return;
        }
        const double se = std::sqrt(var);
        const double coef = j == 0 ? model->intercept : model->weights[j - 1];
        model->std_errors[j] = se;
        model->t_statistics[j] = coef / se;
        model->p_values[j] = wald_p_value(coef / se);
    }
    model->se_available = true;
}

}  // namespace

LogisticModel fit_logistic(const MatrixView& x, const std::vector<int>& y,
                           const LogisticParams& params) {
    if (x.n == 0 || y.size() != x.n) throw std::invalid_argument("logistic fit: bad shapes");
    LogisticModel model;
    model.weights.assign(x.d, 0.0);
    model.intercept = 0.0;

    std::vector<double> grad(x.d, 0.0), trial(x.d, 0.0);
    double grad_b = 0.0;
    double loss = logistic_loss(x, y, model.weights, model.intercept, params.l2);
    double step = 1.0;
    int epoch = 0;
    for (; epoch < params.max_epochs; ++epoch) {
        logistic_gradient(x, y, model.weights, model.intercept, params.l2, &grad, &grad_b);
        double sup = std::fabs(grad_b), sq = grad_b * grad_b;
        for (double g : grad) {
            sup = std::max(sup, std::fabs(g));
            sq += g * g;
        }
        if (sup < params.tol) {
            model.converged = true;
            break;
        }
        // Armijo backtracking, with the accepted step carried over and
        // allowed to grow so well-conditioned fits take full steps.
        step = std::min(step * 2.0, 1e4);
        double next_loss = std::numeric_limits<double>::infinity();
        double trial_b = model.intercept;
        while (step > 1e-16) {
            for (std::size_t j = 0; j < x.d; ++j) trial[j] = model.weights[j] - step * grad[j];
            trial_b = model.intercept - step * grad_b;
            next_loss = logistic_loss(x, y, trial, trial_b, params.l2);
            if (next_loss <= loss - 0.5 * step * sq) break;
            step *= 0.5;
        }
        if (!(next_loss < loss)) {
            model.converged = true;  // no descent direction progress left
            break;
        }
        model.weights.swap(trial);
        model.intercept = trial_b;
        loss = next_loss;
    }
    model.epochs_run = epoch;
    model.final_loss = loss;
    fill_wald(x, &model);
    return model;
}

double LogisticFit::raw_score(const double* x) const {
    double z = model.intercept;
    for (std::size_t j = 0; j < scaler.mean.size(); ++j) {
        z += model.weights[j] * (x[j] - scaler.mean[j]) / scaler.scale[j];
    }
    return z;
}

double LogisticFit::predict_proba(const double* x) const { return sigmoid(raw_score(x)); }

nlohmann::json LogisticFit::to_json() const {
    nlohmann::json j{{"scaler", scaler.to_json()},
                     {"weights", model.weights},
                     {"intercept", model.intercept},
                     {"converged", model.converged},
                     {"epochs_run", model.epochs_run},
                     {"final_loss", model.final_loss},
                     {"se_available", model.se_available}};
    if (model.se_available) {
        j["std_errors"] = model.std_errors;
        j["t_statistics"] = model.t_statistics;
        j["p_values"] = model.p_values;
    }
    return j;
}

LogisticFit LogisticFit::from_json(const nlohmann::json& j) {
    LogisticFit fit;
    fit.scaler = Standardizer::from_json(j.at("scaler"));
    fit.model.weights = j.at("weights").get<std::vector<double>>();
    fit.model.intercept = j.at("intercept").get<double>();
    fit.model.converged = j.at("converged").get<bool>();
    fit.model.epochs_run = j.at("epochs_run").get<int>();
    fit.model.final_loss = j.at("final_loss").get<double>();
    fit.model.se_available = j.at("se_available").get<bool>();
    if (fit.model.se_available) {
        fit.model.std_errors = j.at("std_errors").get<std::vector<double>>();
        fit.model.t_statistics = j.at("t_statistics").get<std::vector<double>>();
        fit.model.p_values = j.at("p_values").get<std::vector<double>>();
    }
    return fit;
}

LogisticFit train_logistic(const MatrixView& x, const std::vector<int>& y,
                           const LogisticParams& params) {
    LogisticFit fit;
    fit.scaler = Standardizer::fit(x);
    std::vector<double> xs = fit.scaler.transform(x);
    MatrixView view{xs.data(), x.n, x.d};
    fit.model = fit_logistic(view, y, params);
    return fit;
}

}  // namespace dealscope::models
