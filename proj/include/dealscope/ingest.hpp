#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dealscope/errorlog.hpp"
#include "dealscope/linkage.hpp"
#include "dealscope/records.hpp"

namespace dealscope::ingest {

struct SourcePaths {
    std::string deals_csv;
    std::string companies_csv;
    std::string financials_csv;
    std::string officers_csv;
};

struct LoadCounts {
    std::size_t loaded = 0;
    std::size_t rejected = 0;
};

struct LoadResult {
    RecordStore store;
    ErrorLog errors;
    LoadCounts deals, companies, financials, officers;
};

// Parses the four sources; an empty path skips that source (the link
// stage needs only deals + companies). Malformed rows are skipped and
// logged with a machine-readable reason; a missing required column
// aborts by throwing.
LoadResult load_sources(const SourcePaths& paths);

// Drops every appointment flagged institutional. Returns removal count.
std::size_t remove_institutional_officers(RecordStore& store);

// Parses a deal-value cell: a plain number, empty (unknown), or one of
// the disclosed bands "n/d (<25m)", "n/d (25 - 50m)", "n/d (50 - 100m)".
// Unrecognized text yields nullopt so the row can be rejected.
std::optional<DealValue> parse_deal_value(const std::string& text);

// One row per accepted (deal record, company) pair, carrying the fields
// the dedupe/trim step needs.
struct MatchedCompany {
    std::string company_id;
    std::string deal_name;
    Date deal_date{};
    DealValue deal_value;
    double ratio = 0.0;
    linkage::MatchTier tier = linkage::MatchTier::REJECTED;
    bool is_parent = false;
    // Latest filed year at or before the deal date; used for trimming
    // and for the holding-company fingerprint.
    std::optional<double> ebitda;
    std::optional<double> turnover;
    std::optional<double> shareholder_funds;
    std::string fingerprint;
};

std::vector<MatchedCompany> make_matched_companies(const RecordStore& store,
                                                   const std::vector<linkage::MatchResult>& matches);

struct TrimSummary {
    std::size_t input_rows = 0;
    std::size_t deduped = 0;     // removed as same-company same-year duplicates
    std::size_t collapsed = 0;   // removed by holding-company collapse
    std::size_t trimmed = 0;     // removed by the quantile trim
    std::size_t kept = 0;
};

// Duplicate rule: same company_id and same deal calendar year keep the
// earliest deal row. Holding-company collapse: rows with identical
// financial fingerprints where a parent-flagged row is involved reduce
// to one. Trim: per feature in {ebitda, turnover, shareholder_funds},
// rows strictly outside the closed range [v[k], v[n-1-k]] of non-missing
// sorted values (k = floor(trim_fraction * n)) are dropped; the drop set
// is the union over the three features.
std::vector<MatchedCompany> dedupe_and_trim(std::vector<MatchedCompany> matched,
                                            double trim_fraction = 0.025,
                                            TrimSummary* summary = nullptr);

}  // namespace dealscope::ingest
