#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace dealscope::synth {

// Target summary statistics for one financial field. The generator fits
// a two-part marginal (log-normal body, log-normal magnitude tail below
// zero when negative_fraction > 0) whose analytic median/mean hit the
// targets, then clamps to [min_value, max_value].
struct MarginalTarget {
    double median = 0.0;
    double mean = 0.0;
    double min_value = 0.0;
    double max_value = 0.0;
    double missing_rate = 0.0;       // fraction of empty cells per row
    double negative_fraction = 0.0;  // mass below zero
};

// Disclosed deal values: log-normal truncated to [min_value, max_value],
// (mu, sigma) solved so the truncated median/mean hit the targets.
struct DealValueTarget {
    double median = 14.0;
    double mean = 23.462;
    double min_value = 5.0;
    double max_value = 100.0;
    double disclosed_fraction = 0.529375;  // 1694 of 3200 deals carry a value
};

// Active headcount per company is 1 + Poisson(mean - 1), so the median
// lands on the configured median for the default 4.47 / 4 pair.
struct DirectorTarget {
    double median = 4.0;
    double mean = 4.47;
};

// Corruption channel applied to registry names before they appear as
// deal names, plus the structural noise the matcher has to survive.
struct CorruptionConfig {
    double suffix_op_rate = 0.55;   // add/drop/swap a legal-status token
    double char_edit_rate = 0.05;   // per-character edit probability
    double duplicate_rate = 0.03;   // verbatim repeated deal rows
    double decoy_rate = 0.02;       // deal rows matching no registry company
    double prior_deal_rate = 0.08;  // dealt companies with an older deal too
    double sibling_rate = 0.04;     // dealt companies that are a parent/child pair
};

// Effect strengths of the planted investment signal. Each term is a
// z-scored company attribute; the label is a top-k cut of the latent
// score, so only relative magnitudes matter.
struct SignalConfig {
    double age = -1.75;            // log company age, dominant and negative
    double age_bump = 0.90;        // Gaussian bump centered on mid-age companies
    double ebitda = 0.55;          // signed-log EBITDA, latest true value
    double employees = 0.45;       // log headcount
    double experience = 0.50;      // mean prior-company count of the board
    double age_experience = 0.30;  // interaction of the two z-scores
    double noise = 2.20;           // sd of the additive Gaussian noise
};

struct GeneratorConfig {
    std::size_t n_companies = 20000;
    double positive_rate = 0.0083;
    int snapshot_year = 2020;
    std::uint64_t seed = 42;
    unsigned threads = 0;

    CorruptionConfig corruption;
    SignalConfig signal;

    MarginalTarget turnover{11847.0, 40530.0, -2721.0, 2571126.0, 0.5001, 0.02};
    MarginalTarget ebitda{789.0, 1813.0, -77856.0, 111195.0, 0.4593, 0.25};
    MarginalTarget profit_margin{4.25, 2.68, -75.75, 57.11, 0.5752, 0.0};
    MarginalTarget shareholder_funds{1528.0, 8166.0, -187719.0, 1577433.0, 0.1681, 0.10};
    MarginalTarget employees{28.0, 62.0, 1.0, 60000.0, 0.08, 0.0};
    DealValueTarget deal_value;
    DirectorTarget directors;

    static GeneratorConfig from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;

    // Throws std::invalid_argument naming the offending field when a
    // target is infeasible (median outside (min, max), mean below the
    // median for a log-normal body, rates outside [0, 1], ...).
    void validate() const;
};

struct GeneratedPaths {
    std::string companies_csv;
    std::string financials_csv;
    std::string officers_csv;
    std::string deals_csv;
    std::string truth_json;
};

struct GenerateSummary {
    GeneratedPaths paths;
    std::size_t n_companies = 0;
    std::size_t n_positive = 0;
    std::size_t n_deal_rows = 0;
    std::size_t n_decoys = 0;
    std::size_t n_financial_rows = 0;
    std::size_t n_officer_rows = 0;
};

// Writes companies/financials/officers/deals CSVs plus truth.json into
// out_dir (created if absent). Same config + seed => byte-identical
// files; generation is parallel over companies with derived sub-seeds.
GenerateSummary generate(const GeneratorConfig& config, const std::string& out_dir);

// How well a pipeline run recovered the plant. Linkage is scored over
// non-decoy deal names; labels over company ids after mapping holding
// group members to the group's canonical id.
struct TruthReport {
    std::size_t true_links = 0;        // non-decoy deal names in truth
    std::size_t accepted = 0;          // deal names the matcher accepted
    std::size_t correct = 0;           // accepted and pointing at the true company
    std::size_t decoys_accepted = 0;
    double linkage_precision = 0.0;
    double linkage_recall = 0.0;

    std::size_t truth_positives = 0;   // canonical positive companies
    std::size_t dataset_positives = 0;
    std::size_t recovered = 0;         // truth positives labeled 1 in the dataset
    std::size_t spurious = 0;          // dataset positives absent from truth
    double label_recovery = 0.0;

    std::size_t unknown_ids = 0;       // dataset ids not in the generated registry
};

// matches_csv: the link stage output (deal_name, company_id, tier, ...).
// dataset_csv: the assembled feature matrix with labels; pass "" to
// check only the linkage half.
TruthReport verify_against_truth(const std::string& matches_csv, const std::string& dataset_csv,
                                 const std::string& truth_json);

nlohmann::json truth_report_json(const TruthReport& report);

}  // namespace dealscope::synth
