#include "dealscope/evaluation.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <unordered_set>

#include "dealscope/csv.hpp"
#include "dealscope/features.hpp"
#include "dealscope/models/artifact.hpp"
#include "dealscope/stats.hpp"
#include "dealscope/threading.hpp"

namespace dealscope::eval {

ConfusionCounts confusion(const std::vector<Scored>& scored, double threshold) {
    ConfusionCounts c;
    for (const Scored& s : scored) {
        const bool predicted = s.score >= threshold;
        if (predicted) {
            (s.label ? c.tp : c.fp) += 1;
        } else {
            (s.label ? c.fn : c.tn) += 1;
        }
    }
    return c;
}

double roc_auc(const std::vector<Scored>& scored, bool* defined) {
    long long n_pos = 0, n_neg = 0;
    for (const Scored& s : scored) (s.label ? n_pos : n_neg) += 1;
    if (n_pos == 0 || n_neg == 0) {
        if (defined) *defined = false;
        return std::numeric_limits<double>::quiet_NaN();
    }
    std::vector<std::size_t> order(scored.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return scored[a].score < scored[b].score;
    });
    // Average ranks over tie runs, then the Mann-Whitney rank-sum form.
    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && scored[order[j + 1]].score == scored[order[i]].score) ++j;
        const double avg_rank = 0.5 * (static_cast<double>(i + 1) + static_cast<double>(j + 1));
        for (std::size_t t = i; t <= j; ++t) {
            if (scored[order[t]].label) rank_sum_pos += avg_rank;
        }
        i = j + 1;
    }
    if (defined) *defined = true;
    const double np = static_cast<double>(n_pos), nn = static_cast<double>(n_neg);
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

MetricRow metrics(const std::vector<Scored>& scored, double threshold) {
    if (scored.empty()) throw std::invalid_argument("metrics on empty score set");
    MetricRow row;
    row.counts = confusion(scored, threshold);
    const ConfusionCounts& c = row.counts;
    const double n = static_cast<double>(c.total());
    row.accuracy = static_cast<double>(c.tp + c.tn) / n;
    row.precision = c.tp + c.fp > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp)
                                    : 0.0;
    row.recall = c.tp + c.fn > 0 ? static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn)
                                 : 0.0;
    row.f1 = row.precision + row.recall > 0.0
                 ? 2.0 * row.precision * row.recall / (row.precision + row.recall)
                 : 0.0;
    row.roc_auc = roc_auc(scored, &row.auc_defined);
    return row;
}

std::vector<std::pair<double, MetricRow>> threshold_sweep(const std::vector<Scored>& scored,
                                                          const std::vector<double>& thresholds) {
    std::vector<std::pair<double, MetricRow>> out;
    out.reserve(thresholds.size());
    for (double t : thresholds) out.emplace_back(t, metrics(scored, t));
    return out;
}

SplitIndices stratified_holdout(const std::vector<int>& y, double fraction, Rng& rng) {
    if (!(fraction >= 0.0) || !(fraction < 1.0)) {
        throw std::invalid_argument("holdout fraction must be in [0, 1)");
    }
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < y.size(); ++i) (y[i] ? pos : neg).push_back(i);
    SplitIndices split;
    for (std::vector<std::size_t>* cls : {&neg, &pos}) {
        rng.shuffle(*cls);
        const std::size_t take = static_cast<std::size_t>(
            std::llround(fraction * static_cast<double>(cls->size())));
        for (std::size_t i = 0; i < cls->size(); ++i) {
            (i < take ? split.holdout : split.rest).push_back((*cls)[i]);
        }
    }
    std::sort(split.holdout.begin(), split.holdout.end());
    std::sort(split.rest.begin(), split.rest.end());
    return split;
}

std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& y,
                                                       const std::vector<std::size_t>& rows, int k,
                                                       Rng& rng) {
    if (k < 2) throw std::invalid_argument("k must be >= 2");
    std::vector<std::size_t> pos, neg;
    for (std::size_t r : rows) (y[r] ? pos : neg).push_back(r);
    std::vector<std::vector<std::size_t>> folds(k);
    for (std::vector<std::size_t>* cls : {&neg, &pos}) {
        rng.shuffle(*cls);
        for (std::size_t i = 0; i < cls->size(); ++i) {
            folds[i % k].push_back((*cls)[i]);
        }
    }
    for (auto& fold : folds) std::sort(fold.begin(), fold.end());
    return folds;
}

GridConfig GridConfig::defaults() {
    GridConfig cfg;
    cfg.feature_sets = {FeatureSet::all, FeatureSet::financial, FeatureSet::director};
    cfg.samplers = {sampling::SamplerKind::undersample, sampling::SamplerKind::oversample,
                    sampling::SamplerKind::smote};
    cfg.model_kinds = {models::ModelKind::LR,  models::ModelKind::DT, models::ModelKind::RF,
                       models::ModelKind::KNN, models::ModelKind::SVM, models::ModelKind::XGB};
    return cfg;
}

GridConfig GridConfig::from_json(const nlohmann::json& j) {
    static const std::unordered_set<std::string> known{
        "feature_sets", "samplers",     "models",       "k",          "holdout_fraction",
        "threshold",    "smote_k",      "target_ratio", "imputation", "model_params"};
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (!known.count(it.key())) {
            throw std::invalid_argument("unknown grid config key: " + it.key());
        }
    }
    GridConfig cfg = defaults();
    if (j.contains("feature_sets")) {
        cfg.feature_sets.clear();
        for (const auto& s : j.at("feature_sets")) {
            cfg.feature_sets.push_back(feature_set_from_name(s.get<std::string>()));
        }
    }
    if (j.contains("samplers")) {
        cfg.samplers.clear();
        for (const auto& s : j.at("samplers")) {
            cfg.samplers.push_back(sampling::sampler_from_name(s.get<std::string>()));
        }
    }
    if (j.contains("models")) {
        cfg.model_kinds.clear();
        for (const auto& s : j.at("models")) {
            cfg.model_kinds.push_back(models::model_from_name(s.get<std::string>()));
        }
    }
    if (j.contains("k")) cfg.k = j.at("k").get<int>();
    if (j.contains("holdout_fraction")) cfg.holdout_fraction = j.at("holdout_fraction").get<double>();
    if (j.contains("threshold")) cfg.threshold = j.at("threshold").get<double>();
    if (j.contains("smote_k")) cfg.smote_k = j.at("smote_k").get<int>();
    if (j.contains("target_ratio")) cfg.target_ratio = j.at("target_ratio").get<double>();
    if (j.contains("imputation")) {
        cfg.imputation.strategy =
            ImputationPolicy::strategy_from_name(j.at("imputation").get<std::string>());
    }
    if (j.contains("model_params")) {
        if (!j.at("model_params").is_object()) {
            throw std::invalid_argument("model_params must be an object keyed by model name");
        }
        cfg.model_params = j.at("model_params");
        for (auto it = cfg.model_params.begin(); it != cfg.model_params.end(); ++it) {
            models::model_from_name(it.key());  // validates the key
        }
    }
    if (cfg.feature_sets.empty() || cfg.samplers.empty() || cfg.model_kinds.empty()) {
        throw std::invalid_argument("grid config has an empty axis");
    }
    return cfg;
}

nlohmann::json GridConfig::to_json() const {
    nlohmann::json fs = nlohmann::json::array(), sp = nlohmann::json::array(),
                   mk = nlohmann::json::array();
    for (FeatureSet s : feature_sets) fs.push_back(feature_set_name(s));
    for (sampling::SamplerKind s : samplers) sp.push_back(sampling::sampler_name(s));
    for (models::ModelKind m : model_kinds) mk.push_back(models::model_name(m));
    return {{"feature_sets", fs},
            {"samplers", sp},
            {"models", mk},
            {"k", k},
            {"holdout_fraction", holdout_fraction},
            {"threshold", threshold},
            {"smote_k", smote_k},
            {"target_ratio", target_ratio},
            {"imputation", imputation.strategy_name()},
            {"model_params", model_params}};
}

namespace {

struct FoldMetrics {
    MetricRow train;
    MetricRow test;
};

std::vector<Scored> score_rows(const models::ModelArtifact& artifact, const Dataset& ds) {
    std::vector<Scored> scored(ds.n());
    for (std::size_t i = 0; i < ds.n(); ++i) {
        scored[i] = {artifact.predict_proba(&ds.x[i * ds.d()]), ds.y[i]};
    }
    return scored;
}

MetricRow average_rows(const std::vector<MetricRow>& rows) {
    MetricRow avg;
    if (rows.empty()) return avg;
    double auc_sum = 0.0;
    int auc_n = 0;
    for (const MetricRow& r : rows) {
        avg.accuracy += r.accuracy;
        avg.precision += r.precision;
        avg.f1 += r.f1;
        avg.recall += r.recall;
        avg.counts.tp += r.counts.tp;
        avg.counts.fp += r.counts.fp;
        avg.counts.fn += r.counts.fn;
        avg.counts.tn += r.counts.tn;
        if (r.auc_defined) {
            auc_sum += r.roc_auc;
            ++auc_n;
        }
    }
    const double n = static_cast<double>(rows.size());
    avg.accuracy /= n;
    avg.precision /= n;
    avg.f1 /= n;
    avg.recall /= n;
    if (auc_n > 0) {
        avg.roc_auc = auc_sum / auc_n;
        avg.auc_defined = true;
    }
    return avg;
}

// The leakage guard: every resampled row must trace back to a row of
// the training fold that produced it.
void check_sampler_provenance(const sampling::SampleResult& sample, std::size_t train_rows) {
    for (std::size_t p : sample.parent_a) {
        if (p >= train_rows) throw std::logic_error("sampler row escaped the training fold");
    }
    for (std::size_t p : sample.parent_b) {
        if (p != SIZE_MAX && p >= train_rows) {
            throw std::logic_error("sampler neighbor escaped the training fold");
        }
    }
}

nlohmann::json params_for(const GridConfig& cfg, models::ModelKind kind) {
    const char* name = models::model_name(kind);
    if (cfg.model_params.contains(name)) return cfg.model_params.at(name);
    return nlohmann::json::object();
}

}  // namespace

GridResult run_protocol(const Dataset& ds, const GridConfig& config, std::uint64_t seed,
                        unsigned threads) {
    if (ds.n() == 0) throw std::invalid_argument("protocol needs a nonempty dataset");
    if (config.k < 2) throw std::invalid_argument("k must be >= 2");
    const std::size_t n_pos = ds.positives();
    if (n_pos == 0 || n_pos == ds.n()) {
        throw std::invalid_argument("protocol needs both classes in the dataset");
    }

    Rng root(seed);
    Rng hold_rng = root.derive(0);
    Rng fold_rng = root.derive(1);
    const SplitIndices split = stratified_holdout(ds.y, config.holdout_fraction, hold_rng);
    const auto folds = stratified_kfold(ds.y, split.rest, config.k, fold_rng);

    // Partition invariant: every CV row in exactly one fold, none in the
    // holdout.
    {
        std::unordered_set<std::size_t> holdout_set(split.holdout.begin(), split.holdout.end());
        std::unordered_set<std::size_t> seen;
        for (const auto& fold : folds) {
            for (std::size_t r : fold) {
                if (holdout_set.count(r)) throw std::logic_error("fold row inside the holdout");
                if (!seen.insert(r).second) throw std::logic_error("row in two folds");
            }
        }
        if (seen.size() != split.rest.size()) throw std::logic_error("folds do not cover CV rows");
    }

    // Column subsets are shared across cells of a feature set.
    std::vector<Dataset> subset(config.feature_sets.size());
    for (std::size_t i = 0; i < config.feature_sets.size(); ++i) {
        subset[i] = ds.select_columns(ds.columns_for(config.feature_sets[i]));
    }

    struct CellPlan {
        std::size_t fs_index;
        sampling::SamplerKind sampler;
        models::ModelKind model;
    };
    std::vector<CellPlan> plan;
    for (std::size_t f = 0; f < config.feature_sets.size(); ++f) {
        for (sampling::SamplerKind s : config.samplers) {
            for (models::ModelKind m : config.model_kinds) plan.push_back({f, s, m});
        }
    }

    GridResult result;
    result.config = config;
    result.seed = seed;
    result.holdout_rows = split.holdout.size();
    result.cv_rows = split.rest.size();
    result.cells.resize(plan.size());

    parallel_chunks(plan.size(), threads, [&](std::size_t cb, std::size_t ce, std::size_t) {
        for (std::size_t c = cb; c < ce; ++c) {
            const auto start = std::chrono::steady_clock::now();
            const CellPlan& p = plan[c];
            const Dataset& sub = subset[p.fs_index];
            CellResult& cell = result.cells[c];
            cell.feature_set = config.feature_sets[p.fs_index];
            cell.sampler = p.sampler;
            cell.model = p.model;
            const Rng cell_rng = root.derive(2 + c);

            auto fit_and_score = [&](const std::vector<std::size_t>& train_rows,
                                     const std::vector<std::size_t>& eval_rows,
                                     std::uint64_t stream, MetricRow* train_out,
                                     MetricRow* eval_out) {
                Rng stream_rng = cell_rng.derive(stream);
                const std::uint64_t sampler_seed = stream_rng.next();
                const std::uint64_t model_seed = stream_rng.next();

                Dataset train = sub.select_rows(train_rows);
                const FittedImputation imputation = fit_imputation(train, config.imputation);
                imputation.apply(train);

                sampling::SamplerSpec sampler_spec;
                sampler_spec.kind = p.sampler;
                sampler_spec.k_neighbors = config.smote_k;
                sampler_spec.target_ratio = config.target_ratio;
                sampler_spec.seed = sampler_seed;
                sampling::SampleResult sample = sampling::apply_sampler(train, sampler_spec);
                check_sampler_provenance(sample, train.n());

                models::ModelSpec model_spec;
                model_spec.kind = p.model;
                model_spec.params = params_for(config, p.model);
                model_spec.seed = model_seed;
                const models::ModelArtifact artifact =
                    models::fit_model(model_spec, {sample.data.x.data(), sample.data.n(),
                                                   sample.data.d()},
                                      sample.data.y, sample.data.feature_names);

                if (train_out) *train_out = metrics(score_rows(artifact, sample.data),
                                                    config.threshold);
                if (eval_out) {
                    Dataset eval_ds = sub.select_rows(eval_rows);
                    imputation.apply(eval_ds);
                    *eval_out = metrics(score_rows(artifact, eval_ds), config.threshold);
                }
            };

            std::vector<MetricRow> train_rows_metrics, test_rows_metrics;
            for (int f = 0; f < config.k; ++f) {
                std::vector<std::size_t> train_rows;
                for (int g = 0; g < config.k; ++g) {
                    if (g == f) continue;
                    train_rows.insert(train_rows.end(), folds[g].begin(), folds[g].end());
                }
                std::sort(train_rows.begin(), train_rows.end());
                try {
                    MetricRow train_row, test_row;
                    fit_and_score(train_rows, folds[f], f, &train_row, &test_row);
                    train_rows_metrics.push_back(train_row);
                    test_rows_metrics.push_back(test_row);
                    cell.folds_ok += 1;
                } catch (const std::exception& e) {
                    cell.folds_failed += 1;
                    if (cell.error.empty()) {
                        cell.error = "fold " + std::to_string(f) + ": " + e.what();
                    }
                }
            }
            cell.train = average_rows(train_rows_metrics);
            cell.test = average_rows(test_rows_metrics);

            if (!split.holdout.empty()) {
                try {
                    fit_and_score(split.rest, split.holdout, config.k, nullptr, &cell.holdout);
                    cell.holdout_ok = true;
                } catch (const std::exception& e) {
                    if (cell.error.empty()) cell.error = std::string("holdout: ") + e.what();
                }
            }
            cell.failed = cell.folds_ok == 0 || (!split.holdout.empty() && !cell.holdout_ok);
            cell.seconds =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        }
    });
    return result;
}

namespace {

std::string metric_or_empty(double v, bool defined) {
    return defined ? format_double(v) : std::string();
}

void append_metric_fields(std::vector<std::string>& fields, const MetricRow& row) {
    fields.push_back(format_double(row.accuracy));
    fields.push_back(format_double(row.precision));
    fields.push_back(format_double(row.f1));
    fields.push_back(metric_or_empty(row.roc_auc, row.auc_defined));
    fields.push_back(format_double(row.recall));
}

}  // namespace

void write_grid_csv(const GridResult& result, const std::string& path) {
    CsvWriter out(path);
    out.write_row({"feature_set", "sampler", "model", "split", "accuracy", "precision", "f1",
                   "roc_auc", "recall", "tp", "fp", "fn", "tn", "folds_ok", "folds_failed",
                   "status", "error"});
    for (const CellResult& cell : result.cells) {
        const std::string status = cell.failed ? "failed" : "ok";
        auto emit = [&](const char* split, const MetricRow& row, bool with_counts) {
            std::vector<std::string> fields{feature_set_name(cell.feature_set),
                                            sampling::sampler_name(cell.sampler),
                                            models::model_name(cell.model), split};
            append_metric_fields(fields, row);
            if (with_counts) {
                fields.push_back(std::to_string(row.counts.tp));
                fields.push_back(std::to_string(row.counts.fp));
                fields.push_back(std::to_string(row.counts.fn));
                fields.push_back(std::to_string(row.counts.tn));
            } else {
                fields.insert(fields.end(), {"", "", "", ""});
            }
            fields.push_back(std::to_string(cell.folds_ok));
            fields.push_back(std::to_string(cell.folds_failed));
            fields.push_back(status);
            fields.push_back(cell.error);
            out.write_row(fields);
        };
        if (cell.folds_ok > 0) {
            emit("train", cell.train, false);  // counts are per-fold sums, omitted
            emit("test", cell.test, false);
        }
        if (cell.holdout_ok) emit("holdout", cell.holdout, true);
        if (cell.folds_ok == 0 && !cell.holdout_ok) {
            emit("none", MetricRow{}, false);
        }
    }
    out.close();
}

void write_aggregate_csv(const GridResult& result, const std::string& path) {
    CsvWriter out(path);
    out.write_row({"feature_set", "sampler", "model", "accuracy", "precision", "f1", "roc_auc",
                   "recall", "status"});
    for (const CellResult& cell : result.cells) {
        std::vector<std::string> fields{feature_set_name(cell.feature_set),
                                        sampling::sampler_name(cell.sampler),
                                        models::model_name(cell.model)};
        if (cell.holdout_ok) {
            append_metric_fields(fields, cell.holdout);
            fields.push_back("ok");
        } else {
            fields.insert(fields.end(), {"", "", "", "", ""});
            fields.push_back("failed");
        }
        out.write_row(fields);
    }
    out.close();
}

std::vector<DescriptiveRow> descriptive_stats(const Dataset& ds) {
    std::vector<DescriptiveRow> rows;
    rows.reserve(ds.d() + 1);
    for (std::size_t j = 0; j < ds.d(); ++j) {
        DescriptiveRow row;
        row.field = ds.feature_names[j];
        row.n_total = static_cast<long long>(ds.n());
        std::vector<double> values;
        values.reserve(ds.n());
        for (std::size_t i = 0; i < ds.n(); ++i) {
            const double v = ds.at(i, j);
            if (std::isnan(v)) {
                row.n_missing += 1;
            } else {
                values.push_back(v);
            }
        }
        row.missing_fraction =
            ds.n() ? static_cast<double>(row.n_missing) / static_cast<double>(ds.n()) : 0.0;
        if (!values.empty()) {
            row.min = *std::min_element(values.begin(), values.end());
            row.max = *std::max_element(values.begin(), values.end());
            row.mean = mean(values);
            row.median = median(values);
        } else {
            row.min = row.max = row.mean = row.median = std::numeric_limits<double>::quiet_NaN();
        }
        rows.push_back(std::move(row));
    }
    DescriptiveRow label;
    label.field = "label";
    label.n_total = static_cast<long long>(ds.n());
    std::vector<double> y(ds.y.begin(), ds.y.end());
    if (!y.empty()) {
        label.min = *std::min_element(y.begin(), y.end());
        label.max = *std::max_element(y.begin(), y.end());
        label.mean = mean(y);
        label.median = median(y);
    }
    rows.push_back(std::move(label));
    return rows;
}

std::vector<DescriptiveRow> descriptive_stats_store(const RecordStore& store, Date as_of) {
    const auto index = features::OfficerIndex::build(store);
    const int year_cap = as_of.year();

    struct FieldAcc {
        const char* name;
        std::optional<double> FinancialRow::* member;
        std::vector<double> values;
    };
    std::vector<FieldAcc> fields = {{"turnover", &FinancialRow::turnover, {}},
                                    {"ebitda", &FinancialRow::ebitda, {}},
                                    {"profit_margin", &FinancialRow::profit_margin, {}},
                                    {"shareholder_funds", &FinancialRow::shareholder_funds, {}},
                                    {"employees", &FinancialRow::employees, {}}};
    std::vector<double> director_counts;
    director_counts.reserve(store.companies.size());

    for (const auto& company : store.companies) {
        const FinancialRow* latest = nullptr;
        if (auto it = store.financials_by_company.find(company.company_id);
            it != store.financials_by_company.end()) {
            for (std::size_t row : it->second) {
                const FinancialRow& fr = store.financials[row];
                if (fr.year > year_cap) continue;
                if (!latest || fr.year > latest->year) latest = &fr;
            }
        }
        for (auto& f : fields) {
            if (latest && (latest->*f.member)) f.values.push_back(*(latest->*f.member));
        }
        director_counts.push_back(
            features::director_features(store, index, company.company_id, as_of)
                .n_active_directors);
    }

    const auto make_row = [](const std::string& name, long long n_total,
                             std::vector<double> values) {
        DescriptiveRow row;
        row.field = name;
        row.n_total = n_total;
        row.n_missing = n_total - static_cast<long long>(values.size());
        row.missing_fraction =
            n_total ? static_cast<double>(row.n_missing) / static_cast<double>(n_total) : 0.0;
        if (!values.empty()) {
            row.min = *std::min_element(values.begin(), values.end());
            row.max = *std::max_element(values.begin(), values.end());
            row.mean = mean(values);
            row.median = median(values);
        } else {
            row.min = row.max = row.mean = row.median = std::numeric_limits<double>::quiet_NaN();
        }
        return row;
    };

    const auto n_companies = static_cast<long long>(store.companies.size());
    std::vector<DescriptiveRow> rows;
    for (auto& f : fields) rows.push_back(make_row(f.name, n_companies, std::move(f.values)));

    std::vector<double> deal_values;
    for (const auto& deal : store.deals) {
        if (deal.value.amount) deal_values.push_back(*deal.value.amount);
    }
    rows.push_back(make_row("deal_value", static_cast<long long>(store.deals.size()),
                            std::move(deal_values)));
    rows.push_back(make_row("n_active_directors", n_companies, std::move(director_counts)));
    return rows;
}

void write_descriptive_csv(const std::vector<DescriptiveRow>& rows, const std::string& path) {
    CsvWriter out(path);
    out.write_row({"field", "n", "n_missing", "missing_fraction", "min", "median", "max", "mean"});
    for (const DescriptiveRow& row : rows) {
        auto num = [](double v) {
            return std::isnan(v) ? std::string() : format_double(v);
        };
        out.write_row({row.field, std::to_string(row.n_total), std::to_string(row.n_missing),
                       format_double(row.missing_fraction), num(row.min), num(row.median),
                       num(row.max), num(row.mean)});
    }
    out.close();
}

}  // namespace dealscope::eval
