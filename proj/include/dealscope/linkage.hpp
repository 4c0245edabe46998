#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "dealscope/records.hpp"

namespace dealscope::linkage {

// Exact unit-cost edit distance (insert / delete / substitute).
std::size_t levenshtein(const std::string& a, const std::string& b);

// Early-exit variant: returns any value > cap when the true distance
// exceeds cap. Used by the matcher to skip hopeless candidates.
std::size_t levenshtein_bounded(const std::string& a, const std::string& b, std::size_t cap);

// 1 - lev/max(|a|,|b|); both empty -> 1.
double levenshtein_ratio(const std::string& a, const std::string& b);

struct NormalizedName {
    std::string original;
    std::string normalized;
    bool only_legal_tokens = false;  // original reduced to nothing
};

// Lowercase, strip punctuation, drop legal-status tokens as whole
// tokens, collapse whitespace. Idempotent.
NormalizedName normalize_name(const std::string& raw);

enum class MatchTier { HIGH, MID_CITY, REJECTED };

const char* tier_name(MatchTier t);
MatchTier tier_from_name(const std::string& name);  // throws on unknown text

struct MatchResult {
    std::string deal_name;
    std::string company_id;   // empty when nothing scored
    double ratio = 0.0;
    MatchTier tier = MatchTier::REJECTED;
    bool city_agreed = false;
    std::string reason;       // populated for rejections
    bool accepted() const { return tier != MatchTier::REJECTED; }
};

struct FunnelRow {
    std::string label;
    std::size_t count = 0;
    double fraction = 0.0;  // relative to unique deal names
};

struct FunnelReport {
    std::vector<FunnelRow> rows;
    std::size_t deal_records = 0;
    std::size_t unique_names = 0;
    std::size_t high = 0;
    std::size_t mid_band = 0;
    std::size_t mid_matched = 0;
    std::size_t total_matched = 0;
    std::string summary;  // "X / Y = Z%"
};

struct MatchOptions {
    double hi = 0.90;
    double lo = 0.70;
    unsigned threads = 0;  // 0 = hardware default
};

struct MatchOutput {
    std::vector<MatchResult> matches;  // one per unique deal name, input order of first occurrence
    FunnelReport funnel;
};

// Per unique deal name, score every company on normalized names and
// apply the two-tier policy. Ties on ratio break to the smallest
// company_id so output is independent of company order and threading.
MatchOutput match_deals(const std::vector<DealRecord>& deals,
                        const std::vector<CompanyRecord>& companies,
                        const MatchOptions& options = {});

}  // namespace dealscope::linkage
