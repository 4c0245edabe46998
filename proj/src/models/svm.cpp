#include "dealscope/models/svm.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "dealscope/stats.hpp"

namespace dealscope::models {

namespace {

double margin(const double* row, std::size_t d, const std::vector<double>& w, double b) {
    double z = b;
    for (std::size_t j = 0; j < d; ++j) z += w[j] * row[j];
    return z;
}

}  // namespace

double svm_objective(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double lambda) {
    double hinge = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        const double yi = y[i] ? 1.0 : -1.0;
        hinge += std::max(0.0, 1.0 - yi * margin(x.row(i), x.d, w, b));
    }
    double sq = 0.0;
    for (double wj : w) sq += wj * wj;
    return 0.5 * lambda * sq + hinge / static_cast<double>(x.n);
}

void svm_subgradient(const MatrixView& x, const std::vector<int>& y,
                     const std::vector<double>& w, double b, double lambda,
                     std::vector<double>* grad_w, double* grad_b) {
    grad_w->assign(x.d, 0.0);
    double gb = 0.0;
    for (std::size_t i = 0; i < x.n; ++i) {
        const double yi = y[i] ? 1.0 : -1.0;
        if (yi * margin(x.row(i), x.d, w, b) < 1.0) {
            const double* row = x.row(i);
            for (std::size_t j = 0; j < x.d; ++j) (*grad_w)[j] -= yi * row[j];
            gb -= yi;
        }
    }
    const double inv_n = 1.0 / static_cast<double>(x.n);
    for (std::size_t j = 0; j < x.d; ++j) (*grad_w)[j] = (*grad_w)[j] * inv_n + lambda * w[j];
    *grad_b = gb * inv_n;
}

PlattScaling fit_platt(const std::vector<double>& decision, const std::vector<int>& y) {
    const std::size_t n = decision.size();
    long long prior1 = 0;
    for (int yi : y) prior1 += yi ? 1 : 0;
    const long long prior0 = static_cast<long long>(n) - prior1;
    const double hi = (prior1 + 1.0) / (prior1 + 2.0);
    const double lo = 1.0 / (prior0 + 2.0);

    auto objective = [&](double a, double c) {
        double f = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double t = y[i] ? hi : lo;
            const double fApB = decision[i] * a + c;
            if (fApB >= 0.0) {
                f += t * fApB + log1p_exp(-fApB);
            } else {
                f += (t - 1.0) * fApB + log1p_exp(fApB);
            }
        }
        return f;
    };

    PlattScaling out;
    double a = 0.0;
    double c = std::log((prior0 + 1.0) / (prior1 + 1.0));
    double fval = objective(a, c);
    constexpr double kSigma = 1e-12, kEps = 1e-5, kMinStep = 1e-10;
    for (int it = 0; it < 100; ++it) {
        double h11 = kSigma, h22 = kSigma, h21 = 0.0, g1 = 0.0, g2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double fApB = decision[i] * a + c;
            double p, q;
            if (fApB >= 0.0) {
                const double e = std::exp(-fApB);
                p = e / (1.0 + e);
                q = 1.0 / (1.0 + e);
            } else {
                const double e = std::exp(fApB);
                p = 1.0 / (1.0 + e);
                q = e / (1.0 + e);
            }
            const double d2 = p * q;
            h11 += decision[i] * decision[i] * d2;
            h22 += d2;
            h21 += decision[i] * d2;
            const double d1 = (y[i] ? hi : lo) - p;
            g1 += decision[i] * d1;
            g2 += d1;
        }
        if (std::fabs(g1) < kEps && std::fabs(g2) < kEps) {
            out.converged = true;
            break;
        }
        const double det = h11 * h22 - h21 * h21;
        const double da = -(h22 * g1 - h21 * g2) / det;
        const double dc = -(-h21 * g1 + h11 * g2) / det;
        const double gd = g1 * da + g2 * dc;
        double step = 1.0;
        while (step >= kMinStep) {
            const double na = a + step * da, nc = c + step * dc;
            const double nf = objective(na, nc);
            if (nf < fval + 1e-4 * step * gd) {
                a = na;
                c = nc;
                fval = nf;
                break;
            }
            step *= 0.5;
        }
        if (step < kMinStep) break;  // line search failed
    }
    out.a = a;
    out.c = c;
    return out;
}

double SvmFit::raw_score(const double* x) const {
    double z = intercept;
    for (std::size_t j = 0; j < scaler.mean.size(); ++j) {
        z += weights[j] * (x[j] - scaler.mean[j]) / scaler.scale[j];
    }
    return z;
}

double SvmFit::predict_proba(const double* x) const {
    const double f = raw_score(x);
    const double fApB = f * platt.a + platt.c;
    // 1/(1+exp(fApB)), computed on the stable side
    return fApB >= 0.0 ? std::exp(-fApB) / (1.0 + std::exp(-fApB))
                       : 1.0 / (1.0 + std::exp(fApB));
}

nlohmann::json SvmFit::to_json() const {
    return {{"scaler", scaler.to_json()},
            {"weights", weights},
            {"intercept", intercept},
            {"platt_a", platt.a},
            {"platt_c", platt.c},
            {"platt_converged", platt.converged},
            {"converged", converged},
            {"final_objective", final_objective}};
}

SvmFit SvmFit::from_json(const nlohmann::json& j) {
    SvmFit fit;
    fit.scaler = Standardizer::from_json(j.at("scaler"));
    fit.weights = j.at("weights").get<std::vector<double>>();
    fit.intercept = j.at("intercept").get<double>();
    fit.platt.a = j.at("platt_a").get<double>();
    fit.platt.c = j.at("platt_c").get<double>();
    fit.platt.converged = j.at("platt_converged").get<bool>();
    fit.converged = j.at("converged").get<bool>();
    fit.final_objective = j.at("final_objective").get<double>();
    return fit;
}

SvmFit train_svm(const MatrixView& x, const std::vector<int>& y, const SvmParams& params,
                 Rng& rng) {
    if (x.n == 0 || y.size() != x.n) throw std::invalid_argument("svm fit: bad shapes");
    if (!(params.lambda > 0.0)) throw std::invalid_argument("lambda must be positive");
    SvmFit fit;
    fit.scaler.fit(x);
    std::vector<double> xs = fit.scaler.transform(x);
    MatrixView view{xs.data(), x.n, x.d};

    fit.weights.assign(x.d, 0.0);
    fit.intercept = 0.0;
    std::vector<int> order(x.n);
    std::iota(order.begin(), order.end(), 0);

    long long t = 0;
    double prev_objective = svm_objective(view, y, fit.weights, fit.intercept, params.lambda);
    for (int epoch = 0; epoch < params.epochs; ++epoch) {
        rng.shuffle(order);
        for (int idx : order) {
            ++t;
            const double eta = 1.0 / (params.lambda * static_cast<double>(t));
            const double yi = y[idx] ? 1.0 : -1.0;
            const double* row = view.row(idx);
            const bool violated = yi * margin(row, x.d, fit.weights, fit.intercept) < 1.0;
            const double shrink = 1.0 - eta * params.lambda;
            for (std::size_t j = 0; j < x.d; ++j) {
                fit.weights[j] *= shrink;
                if (violated) fit.weights[j] += eta * yi * row[j];
            }
            if (violated) fit.intercept += eta * yi;
        }
        const double objective = svm_objective(view, y, fit.weights, fit.intercept, params.lambda);
        fit.converged = std::fabs(prev_objective - objective) <=
                        1e-3 * std::max(1.0, std::fabs(prev_objective));
        prev_objective = objective;
    }
    fit.final_objective = prev_objective;

    std::vector<double> decision(x.n);
    for (std::size_t i = 0; i < x.n; ++i) {
        decision[i] = margin(view.row(i), x.d, fit.weights, fit.intercept);
    }
    fit.platt = fit_platt(decision, y);
    return fit;
}

}  // namespace dealscope::models
