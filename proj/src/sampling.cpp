#include "dealscope/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dealscope/rng.hpp"

namespace dealscope::sampling {

SamplerKind sampler_from_name(const std::string& name) {
    if (name == "undersample") return SamplerKind::undersample;
    if (name == "oversample") return SamplerKind::oversample;
    if (name == "smote") return SamplerKind::smote;
    if (name == "none") return SamplerKind::none;
    throw std::invalid_argument("unknown sampler '" + name + "'");
}

const char* sampler_name(SamplerKind k) {
    switch (k) {
        case SamplerKind::undersample: return "undersample";
        case SamplerKind::oversample: return "oversample";
        case SamplerKind::smote: return "smote";
        case SamplerKind::none: return "none";
    }
    return "none";
}

namespace {

struct ClassSplit {
    std::vector<std::size_t> minority;
    std::vector<std::size_t> majority;
    int minority_label = 1;
};

ClassSplit split_classes(const Dataset& ds) {
    ClassSplit s;
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < ds.n(); ++i) (ds.y[i] ? pos : neg).push_back(i);
    if (pos.empty() || neg.empty()) {
        throw std::runtime_error("sampler needs both classes present");
    }
    if (pos.size() <= neg.size()) {
        s.minority = std::move(pos);
        s.majority = std::move(neg);
        s.minority_label = 1;
    } else {
        s.minority = std::move(neg);
        s.majority = std::move(pos);
        s.minority_label = 0;
    }
    return s;
}

void check_clean(const Dataset& ds) {
    for (double v : ds.x) {
        if (std::isnan(v)) throw std::runtime_error("sampler input contains missing values");
    }
}

std::size_t ratio_target(double ratio, std::size_t other) {
    return static_cast<std::size_t>(std::llround(ratio * static_cast<double>(other)));
}

SampleResult keep_rows(const Dataset& ds, const std::vector<std::size_t>& rows) {
    SampleResult out;
    out.data = ds.select_rows(rows);
    out.parent_a = rows;
    out.parent_b.assign(rows.size(), SIZE_MAX);
    return out;
}

SampleResult run_oversample(const Dataset& train, const SamplerSpec& spec, Rng& rng,
                            std::vector<std::string> warnings) {
    const ClassSplit cls = split_classes(train);
    const std::size_t target = ratio_target(spec.target_ratio, cls.majority.size());
    std::vector<std::size_t> rows(train.n());
    for (std::size_t i = 0; i < train.n(); ++i) rows[i] = i;
    SampleResult out = keep_rows(train, rows);
    out.warnings = std::move(warnings);
    const std::size_t extra = target > cls.minority.size() ? target - cls.minority.size() : 0;
    for (std::size_t t = 0; t < extra; ++t) {
        const std::size_t src = cls.minority[rng.index(cls.minority.size())];
        out.data.ids.push_back(train.ids[src]);
        out.data.y.push_back(train.y[src]);
        for (std::size_t j = 0; j < train.d(); ++j) out.data.x.push_back(train.at(src, j));
        out.parent_a.push_back(src);
        out.parent_b.push_back(SIZE_MAX);
    }
    return out;
}

SampleResult run_smote(const Dataset& train, const SamplerSpec& spec, Rng& rng) {
    const ClassSplit cls = split_classes(train);
    if (cls.minority.size() == 1) {
        return run_oversample(train, spec, rng,
                              {"smote: single minority row, falling back to plain oversampling"});
    }
    std::vector<std::string> warnings;
    int k = spec.k_neighbors;
    if (static_cast<std::size_t>(k) >= cls.minority.size()) {
        k = static_cast<int>(cls.minority.size()) - 1;
        warnings.push_back("smote: k_neighbors reduced to " + std::to_string(k) +
                           " (minority class has " + std::to_string(cls.minority.size()) +
                           " rows)");
    }
    const std::size_t d = train.d();

    // Neighbor distances in z-scored space (training statistics) so no
    // single raw scale dominates; interpolation happens on raw values.
    std::vector<double> mu(d, 0.0), sd(d, 0.0);
    for (std::size_t i = 0; i < train.n(); ++i) {
        for (std::size_t j = 0; j < d; ++j) mu[j] += train.at(i, j);
    }
    for (std::size_t j = 0; j < d; ++j) mu[j] /= static_cast<double>(train.n());
    for (std::size_t i = 0; i < train.n(); ++i) {
        for (std::size_t j = 0; j < d; ++j) {
            const double c = train.at(i, j) - mu[j];
            sd[j] += c * c;
        }
    }
    for (std::size_t j = 0; j < d; ++j) {
        sd[j] = std::sqrt(sd[j] / static_cast<double>(train.n()));
        if (sd[j] == 0.0) sd[j] = 1.0;
    }
    const std::size_t m = cls.minority.size();
    std::vector<double> z(m * d);
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t j = 0; j < d; ++j) {
            z[a * d + j] = (train.at(cls.minority[a], j) - mu[j]) / sd[j];
        }
    }
    // k nearest minority neighbors per minority row, ties by index.
    std::vector<std::vector<std::size_t>> knn(m);
    std::vector<std::pair<double, std::size_t>> dist(m);
    for (std::size_t a = 0; a < m; ++a) {
        dist.clear();
        for (std::size_t b = 0; b < m; ++b) {
            if (b == a) continue;
            double s = 0.0;
            for (std::size_t j = 0; j < d; ++j) {
                const double diff = z[a * d + j] - z[b * d + j];
                s += diff * diff;
            }
            dist.emplace_back(s, b);
        }
        std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
        knn[a].reserve(k);
        for (int t = 0; t < k; ++t) knn[a].push_back(dist[t].second);
    }

    const std::size_t target = ratio_target(spec.target_ratio, cls.majority.size());
    const std::size_t extra = target > m ? target - m : 0;

    std::vector<std::size_t> rows(train.n());
    for (std::size_t i = 0; i < train.n(); ++i) rows[i] = i;
    SampleResult out = keep_rows(train, rows);
    out.warnings = std::move(warnings);

    // Synthesis in (parent index, sequence) order: parent a receives
    // ceil- or floor-share of the extra rows, so output is canonical.
    for (std::size_t a = 0; a < m; ++a) {
        const std::size_t share = extra / m + (a < extra % m ? 1 : 0);
        const std::size_t src = cls.minority[a];
        for (std::size_t s = 0; s < share; ++s) {
            const std::size_t nb = knn[a][rng.index(knn[a].size())];
            const std::size_t nb_row = cls.minority[nb];
            const double lambda = rng.uniform();
            out.data.ids.push_back(train.ids[src] + "+s" + std::to_string(s));
            out.data.y.push_back(train.y[src]);
            for (std::size_t j = 0; j < d; ++j) {
                const double xi = train.at(src, j);
                out.data.x.push_back(xi + lambda * (train.at(nb_row, j) - xi));
            }
            out.parent_a.push_back(src);
            out.parent_b.push_back(nb_row);
        }
    }
    return out;
}

}  // namespace

SampleResult apply_sampler(const Dataset& train, const SamplerSpec& spec) {
    if (spec.kind == SamplerKind::none) {
        std::vector<std::size_t> rows(train.n());
        for (std::size_t i = 0; i < train.n(); ++i) rows[i] = i;
        return keep_rows(train, rows);
    }
    if (!(spec.target_ratio > 0.0 && spec.target_ratio <= 1.0)) {
        throw std::invalid_argument("target_ratio must lie in (0, 1]");
    }
    if (spec.k_neighbors < 1) throw std::invalid_argument("k_neighbors must be >= 1");
    check_clean(train);
    Rng rng(spec.seed);
    switch (spec.kind) {
        case SamplerKind::undersample: {
            const ClassSplit cls = split_classes(train);
            const std::size_t target =
                std::min(cls.majority.size(), ratio_target(spec.target_ratio, cls.minority.size()));
            std::vector<std::size_t> pool = cls.majority;
            rng.shuffle(pool);
            pool.resize(target);
            std::vector<std::size_t> rows = cls.minority;
            rows.insert(rows.end(), pool.begin(), pool.end());
            std::sort(rows.begin(), rows.end());  // original order
            return keep_rows(train, rows);
        }
        case SamplerKind::oversample:
            return run_oversample(train, spec, rng, {});
        case SamplerKind::smote:
            return run_smote(train, spec, rng);
        case SamplerKind::none:
            break;
    }
    throw std::logic_error("unreachable sampler kind");
}

}  // namespace dealscope::sampling
