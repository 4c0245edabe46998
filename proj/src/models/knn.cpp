#include "dealscope/models/knn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dealscope::models {

std::vector<int> KnnFit::neighbors(const double* row) const {
    std::vector<double> q(d);
    for (std::size_t j = 0; j < d; ++j) q[j] = (row[j] - scaler.mean[j]) / scaler.scale[j];
    std::vector<std::pair<double, int>> dist(n);
    for (std::size_t i = 0; i < n; ++i) {
        double s = 0.0;
        const double* xi = &x[i * d];
        for (std::size_t j = 0; j < d; ++j) {
            const double delta = xi[j] - q[j];
            s += delta * delta;
        }
        dist[i] = {s, static_cast<int>(i)};
    }
    const std::size_t kk = std::min<std::size_t>(k, n);
    std::partial_sort(dist.begin(), dist.begin() + kk, dist.end());
    std::vector<int> out(kk);
    for (std::size_t i = 0; i < kk; ++i) out[i] = dist[i].second;
    return out;
}

double KnnFit::predict_proba(const double* row) const {
    const std::vector<int> nb = neighbors(row);
    if (nb.empty()) return 0.0;
    int pos = 0;
    for (int idx : nb) pos += y[idx];
    return static_cast<double>(pos) / static_cast<double>(nb.size());
}

nlohmann::json KnnFit::to_json() const {
    return {{"scaler", scaler.to_json()}, {"k", k}, {"x", x}, {"y", y}, {"n", n}, {"d", d}};
}

KnnFit KnnFit::from_json(const nlohmann::json& j) {
    KnnFit fit;
    fit.scaler = Standardizer::from_json(j.at("scaler"));
    fit.k = j.at("k").get<int>();
    fit.x = j.at("x").get<std::vector<double>>();
    fit.y = j.at("y").get<std::vector<int>>();
    fit.n = j.at("n").get<std::size_t>();
    fit.d = j.at("d").get<std::size_t>();
    if (fit.x.size() != fit.n * fit.d || fit.y.size() != fit.n)
        throw std::invalid_argument("knn payload shape mismatch");
    return fit;
}

KnnFit train_knn(const MatrixView& x, const std::vector<int>& y, const KnnParams& params) {
    if (params.k < 1) throw std::invalid_argument("k must be >= 1");
    KnnFit fit;
    fit.scaler = Standardizer::fit(x);
    fit.k = params.k;
    fit.n = x.n;
    fit.d = x.d;
    fit.x = fit.scaler.transform(x);
    fit.y = y;
    return fit;
}

}  // namespace dealscope::models
