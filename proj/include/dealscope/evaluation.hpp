#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "dealscope/dataset.hpp"
#include "dealscope/date.hpp"
#include "dealscope/imputation.hpp"
#include "dealscope/models/common.hpp"
#include "dealscope/rng.hpp"
#include "dealscope/sampling.hpp"

namespace dealscope {
struct RecordStore;
}

namespace dealscope::eval {

struct ConfusionCounts {
    long long tp = 0;
    long long fp = 0;
    long long fn = 0;
    long long tn = 0;

    long long total() const { return tp + fp + fn + tn; }
};

struct Scored {
    double score = 0.0;  // predicted positive probability
    int label = 0;
};

// Scores at or above the threshold predict the positive class.
ConfusionCounts confusion(const std::vector<Scored>& scored, double threshold);

// Undefined denominators yield 0 for precision/recall/F1. roc_auc is
// NaN with auc_defined false when a class is absent.
struct MetricRow {
    double accuracy = 0.0;
    double precision = 0.0;
    double f1 = 0.0;
    double roc_auc = std::numeric_limits<double>::quiet_NaN();
    double recall = 0.0;
    bool auc_defined = false;
    ConfusionCounts counts;
};

MetricRow metrics(const std::vector<Scored>& scored, double threshold = 0.5);

// Mann-Whitney statistic: P(random positive outscores random negative)
// with ties counted half, computed via average ranks.
double roc_auc(const std::vector<Scored>& scored, bool* defined = nullptr);

std::vector<std::pair<double, MetricRow>> threshold_sweep(const std::vector<Scored>& scored,
                                                          const std::vector<double>& thresholds);

struct SplitIndices {
    std::vector<std::size_t> holdout;
    std::vector<std::size_t> rest;
};

// Per-class rounding keeps the holdout prevalence within one row per
// class of the full-data prevalence.
SplitIndices stratified_holdout(const std::vector<int>& y, double fraction, Rng& rng);

// Partitions `rows` into k folds, dealing each class round-robin so
// fold class counts differ by at most one.
std::vector<std::vector<std::size_t>> stratified_kfold(const std::vector<int>& y,
                                                       const std::vector<std::size_t>& rows, int k,
                                                       Rng& rng);

struct GridConfig {
    std::vector<FeatureSet> feature_sets;
    std::vector<sampling::SamplerKind> samplers;
    std::vector<models::ModelKind> model_kinds;
    int k = 10;
    double holdout_fraction = 0.2;
    double threshold = 0.5;
    int smote_k = 5;
    double target_ratio = 1.0;
    ImputationPolicy imputation;
    nlohmann::json model_params = nlohmann::json::object();  // per-kind overrides

    static GridConfig defaults();  // 3 feature sets x 3 samplers x 6 models
    static GridConfig from_json(const nlohmann::json& j);  // rejects unknown keys
    nlohmann::json to_json() const;
};

struct CellResult {
    FeatureSet feature_set = FeatureSet::all;
    sampling::SamplerKind sampler = sampling::SamplerKind::smote;
    models::ModelKind model = models::ModelKind::LR;
    MetricRow train;    // mean over successful CV folds, on the resampled fold
    MetricRow test;     // mean over successful CV folds, on the untouched fold
    MetricRow holdout;  // refit on all CV rows, scored on the holdout
    int folds_ok = 0;
    int folds_failed = 0;
    bool holdout_ok = false;
    bool failed = false;  // no fold and/or no holdout produced metrics
    std::string error;    // first failure reason
    double seconds = 0.0;
};

struct GridResult {
    GridConfig config;
    std::uint64_t seed = 0;
    std::size_t holdout_rows = 0;
    std::size_t cv_rows = 0;
    std::vector<CellResult> cells;  // fixed enumeration order
};

// The paper-shaped protocol: one stratified holdout split, stratified
// k-fold CV on the remainder, samplers and imputation fit on training
// folds only, plus a holdout row from a refit on all CV data. Cells are
// independent and may run on several threads; per-cell seeds derive
// from the enumeration index so scheduling never changes results.
GridResult run_protocol(const Dataset& ds, const GridConfig& config, std::uint64_t seed,
                        unsigned threads = 1);

// Long-form per-cell CSV: one row per (cell, split).
void write_grid_csv(const GridResult& result, const std::string& path);
// Holdout-only table in report row order (feature set, sampler, model).
void write_aggregate_csv(const GridResult& result, const std::string& path);

struct DescriptiveRow {
    std::string field;
    long long n_total = 0;
    long long n_missing = 0;
    double missing_fraction = 0.0;
    double min = 0.0;
    double median = 0.0;
    double max = 0.0;
    double mean = 0.0;
};

std::vector<DescriptiveRow> descriptive_stats(const Dataset& ds);

// Raw-unit rows straight from source records: the financial fields of
// each company's latest filed year at or before as_of, disclosed deal
// values, and active-director counts at as_of.
std::vector<DescriptiveRow> descriptive_stats_store(const RecordStore& store, Date as_of);

void write_descriptive_csv(const std::vector<DescriptiveRow>& rows, const std::string& path);

}  // namespace dealscope::eval
