#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "dealscope/dataset.hpp"
#include "dealscope/date.hpp"
#include "dealscope/imputation.hpp"
#include "dealscope/ingest.hpp"
#include "dealscope/records.hpp"

namespace dealscope::features {

// sign(x) * ln(1 + |x|): odd, monotone, invertible, finite everywhere.
double signed_log(double x);
double signed_log_inv(double y);

// Cross-company officer lookup used for "previous companies" and
// FTSE-experience features.
struct OfficerIndex {
    std::unordered_map<std::string, std::vector<const OfficerAppointment*>> by_officer;
    std::unordered_set<std::string> ftse_companies;

    static OfficerIndex build(const RecordStore& store);
};

struct DirectorFeatureSet {
    double n_active_directors = 0;
    double n_distinct_roles = 0;
    double ftse_count = 0;
    std::optional<double> avg_tenure_prior;
    std::optional<double> avg_age_at_appointment;
    std::optional<double> avg_previous_companies;
    std::optional<double> cumulative_experience;
    std::optional<double> avg_experience_at_appointment;
};

// All quantities are as-of point-in-time: appointments dated after
// as_of do not exist yet, resignations dated after as_of have not
// happened yet.
DirectorFeatureSet director_features(const RecordStore& store, const OfficerIndex& index,
                                     const std::string& company_id, Date as_of);

struct FinancialFeatureSet {
    std::optional<double> company_age_years;
    std::optional<double> turnover;
    std::optional<double> turnover_growth;
    std::optional<double> ebitda;
    std::optional<double> ebitda_margin;
    std::optional<double> shareholder_funds;
    std::optional<double> employees;
    std::optional<double> liquidity;
    std::optional<double> rose;
    std::optional<double> profit_margin;
    std::optional<double> asset_turnover;
    std::optional<double> long_term_liabilities;
    std::optional<double> min_ebitda;         // over up to 3 most recent usable years
    std::optional<double> min_ebitda_margin;
};

// Uses the latest financial year ending on or before as_of; growth
// needs the calendar-consecutive previous year too.
FinancialFeatureSet financial_features(const RecordStore& store, const std::string& company_id,
                                       Date as_of);

struct AssembleOptions {
    std::optional<Date> snapshot_date;  // default: Dec 31 of the latest filed year
    ImputationPolicy policy;            // only add_missing_indicators is used here
    unsigned threads = 0;
};

struct AssembleResult {
    Dataset dataset;
    Date snapshot_date{};
};

// One row per company. Companies in `matched` are the positives with
// as_of = their latest matched deal date; companies accepted by linkage
// but removed by dedupe/trim (present in accepted_company_ids but not in
// matched) are excluded entirely; everything else is a negative at the
// snapshot date. Values stay NaN where source data is missing.
AssembleResult assemble_dataset(const RecordStore& store,
                                const std::vector<ingest::MatchedCompany>& matched,
                                const std::unordered_set<std::string>& accepted_company_ids,
                                const AssembleOptions& options);

}  // namespace dealscope::features
