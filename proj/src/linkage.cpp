#include "dealscope/linkage.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <map>
#include <stdexcept>
#include <unordered_set>

#include "dealscope/threading.hpp"

namespace dealscope::linkage {

std::size_t levenshtein(const std::string& a, const std::string& b) {
    const std::size_t n = a.size(), m = b.size();
    if (n == 0) return m;
    if (m == 0) return n;
    // Two-row DP over the (n+1) x (m+1) table.
    std::vector<std::size_t> prev(m + 1), cur(m + 1);
    for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= m; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[m];
}

std::size_t levenshtein_bounded(const std::string& a, const std::string& b, std::size_t cap) {
    const std::size_t n = a.size(), m = b.size();
    const std::size_t diff = n > m ? n - m : m - n;
    if (diff > cap) return cap + 1;
    if (n == 0) return m;
    if (m == 0) return n;
    const std::size_t BIG = cap + 1;
    std::vector<std::size_t> prev(m + 1, BIG), cur(m + 1, BIG);
    for (std::size_t j = 0; j <= std::min(m, cap); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= n; ++i) {
        // Only cells with |i-j| <= cap can stay within budget.
        const std::size_t jlo = i > cap ? i - cap : 1;
        const std::size_t jhi = std::min(m, i + cap);
        if (jlo > jhi) return BIG;
        cur[jlo - 1] = (i <= cap && jlo == 1) ? i : BIG;
        std::size_t row_min = cur[jlo - 1];
        for (std::size_t j = jlo; j <= jhi; ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            const std::size_t del = prev[j] >= BIG ? BIG : prev[j] + 1;
            const std::size_t ins = cur[j - 1] >= BIG ? BIG : cur[j - 1] + 1;
            cur[j] = std::min({sub, del, ins, BIG});
            row_min = std::min(row_min, cur[j]);
        }
        if (jhi < m) cur[jhi + 1 <= m ? jhi + 1 : m] = BIG;
        if (row_min > cap) return BIG;
        std::swap(prev, cur);
        std::fill(cur.begin(), cur.end(), BIG);
    }
    return prev[m];
}

double levenshtein_ratio(const std::string& a, const std::string& b) {
    const std::size_t longest = std::max(a.size(), b.size());
    if (longest == 0) return 1.0;
    return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

namespace {

const std::unordered_set<std::string>& legal_tokens() {
    // Tokens are matched after punctuation stripping, so "ltd." and
    // "(uk)" arrive here as "ltd" and "uk"; the bare forms cover them.
    static const std::unordered_set<std::string> tokens = {
        "limited", "ltd", "plc", "llp", "group", "holdings", "holding", "company", "co", "uk",
    };
    return tokens;
}

}  // namespace

NormalizedName normalize_name(const std::string& raw) {
    std::string lowered;
    lowered.reserve(raw.size());
    for (unsigned char c : raw) {
        if (std::isalnum(c)) {
            lowered += static_cast<char>(std::tolower(c));
        } else {
            lowered += ' ';
        }
    }
    std::string normalized;
    std::size_t i = 0;
    bool saw_token = false;
    while (i < lowered.size()) {
        while (i < lowered.size() && lowered[i] == ' ') ++i;
        std::size_t j = i;
        while (j < lowered.size() && lowered[j] != ' ') ++j;
        if (j > i) {
            saw_token = true;
            std::string token = lowered.substr(i, j - i);
            if (!legal_tokens().count(token)) {
                if (!normalized.empty()) normalized += ' ';
                normalized += token;
            }
        }
        i = j;
    }
    NormalizedName out;
    out.original = raw;
    out.normalized = std::move(normalized);
    out.only_legal_tokens = saw_token && out.normalized.empty();
    return out;
}

const char* tier_name(MatchTier t) {
    switch (t) {
        case MatchTier::HIGH: return "HIGH";
        case MatchTier::MID_CITY: return "MID_CITY";
        case MatchTier::REJECTED: return "REJECTED";
    }
    return "REJECTED";
}

MatchTier tier_from_name(const std::string& name) {
    if (name == "HIGH") return MatchTier::HIGH;
    if (name == "MID_CITY") return MatchTier::MID_CITY;
    if (name == "REJECTED") return MatchTier::REJECTED;
    throw std::invalid_argument("unknown match tier: " + name);
}

namespace {

std::string normalize_city(const std::string& city) {
    std::string out;
    for (unsigned char c : city) out += static_cast<char>(std::tolower(c));
    const auto b = out.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = out.find_last_not_of(" \t");
    return out.substr(b, e - b + 1);
}

struct Candidate {
    double ratio = -1.0;
    std::size_t company = SIZE_MAX;
};

std::string percent_string(std::size_t num, std::size_t den) {
    const double pct = den ? 100.0 * static_cast<double>(num) / static_cast<double>(den) : 0.0;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%zu / %zu = %.0f%%", num, den, pct);
    return buf;
}

}  // namespace

MatchOutput match_deals(const std::vector<DealRecord>& deals,
                        const std::vector<CompanyRecord>& companies,
                        const MatchOptions& options) {
    if (!(0.0 <= options.lo && options.lo <= options.hi && options.hi <= 1.0)) {
        throw std::invalid_argument("match thresholds must satisfy 0 <= lo <= hi <= 1");
    }
    // Unique deal names, keeping first-occurrence order and the first
    // record's city for the MID tier check.
    std::vector<std::string> names;
    std::vector<std::string> cities;
    {
        std::unordered_set<std::string> seen;
        for (const auto& d : deals) {
            if (seen.insert(d.deal_name).second) {
                names.push_back(d.deal_name);
                cities.push_back(normalize_city(d.city));
            }
        }
    }

    struct CompanyKey {
        std::string normalized;
        std::string city;
    };
    std::vector<CompanyKey> keys(companies.size());
    for (std::size_t c = 0; c < companies.size(); ++c) {
        keys[c].normalized = normalize_name(companies[c].name).normalized;
        keys[c].city = normalize_city(companies[c].city);
    }

    std::vector<MatchResult> results(names.size());
    parallel_chunks(names.size(), options.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            const std::string norm = normalize_name(names[i]).normalized;
            MatchResult r;
            r.deal_name = names[i];
            if (companies.empty()) {
                r.reason = "no companies to match against";
                results[i] = r;
                continue;
            }
            // First-character or q-gram blocking is not recall-safe at
            // lo = 0.70 (one leading edit escapes the block), so the
            // scan is full but pruned: a ratio >= lo forces
            // |b| in [lo*|a|, |a|/lo] because lev >= ||a|-|b||, and the
            // banded distance bails out once best-so-far is unbeatable.
            Candidate best;
            const double lo = options.lo;
            const std::size_t alen = norm.size();
            for (std::size_t c = 0; c < companies.size(); ++c) {
                const std::string& bnorm = keys[c].normalized;
                const std::size_t blen = bnorm.size();
                const std::size_t longest = std::max(alen, blen);
                if (longest == 0) {
                    // Both names empty after normalization: ratio 1 by
                    // definition, but there is nothing to match on.
                    continue;
                }
                // Larger distance than this cannot reach max(lo, best).
                const double floor_ratio = std::max(lo, best.ratio);
                const double max_dist = (1.0 - floor_ratio) * static_cast<double>(longest);
                const auto cap = static_cast<std::size_t>(std::floor(max_dist + 1e-9));
                const std::size_t diff = alen > blen ? alen - blen : blen - alen;
                if (diff > cap) continue;
                const std::size_t dist = levenshtein_bounded(norm, bnorm, cap);
                if (dist > cap) continue;
                const double ratio = 1.0 - static_cast<double>(dist) / static_cast<double>(longest);
                if (ratio > best.ratio + 1e-12) {
                    best = {ratio, c};
                } else if (std::fabs(ratio - best.ratio) <= 1e-12 && best.company != SIZE_MAX &&
                           companies[c].company_id < companies[best.company].company_id) {
                    best.company = c;
                }
            }
            if (best.company == SIZE_MAX) {
                r.reason = "no candidate at or above the low threshold";
                results[i] = r;
                continue;
            }
            r.company_id = companies[best.company].company_id;
            r.ratio = best.ratio;
            r.city_agreed = !cities[i].empty() && cities[i] == keys[best.company].city;
            if (r.ratio >= options.hi) {
                r.tier = MatchTier::HIGH;
            } else if (r.ratio >= options.lo && r.city_agreed) {
                r.tier = MatchTier::MID_CITY;
            } else {
                r.tier = MatchTier::REJECTED;
                r.reason = r.ratio >= options.lo ? "mid-band ratio but city mismatch"
                                                 : "best ratio below low threshold";
            }
            results[i] = r;
        }
    });

    FunnelReport funnel;
    funnel.deal_records = deals.size();
    funnel.unique_names = names.size();
    for (const auto& r : results) {
        if (r.tier == MatchTier::HIGH) ++funnel.high;
        if (r.company_id.empty()) continue;
        if (r.ratio >= options.lo && r.ratio < options.hi) {
            ++funnel.mid_band;
            if (r.tier == MatchTier::MID_CITY) ++funnel.mid_matched;
        }
    }
    funnel.total_matched = funnel.high + funnel.mid_matched;
    const auto frac = [&](std::size_t c) {
        return funnel.unique_names ? static_cast<double>(c) / static_cast<double>(funnel.unique_names)
                                   : 0.0;
    };
    char hi_label[64], mid_label[96], mid_match_label[112];
    std::snprintf(hi_label, sizeof hi_label, ">=%.0f%% match confidence", options.hi * 100.0);
    std::snprintf(mid_label, sizeof mid_label, ">=%.0f%% and <%.0f%% match confidence",
                  options.lo * 100.0, options.hi * 100.0);
    std::snprintf(mid_match_label, sizeof mid_match_label,
                  ">=%.0f%% and <%.0f%% match confidence, matched", options.lo * 100.0,
                  options.hi * 100.0);
    funnel.rows = {
        {"Deal records", funnel.deal_records, 0.0},
        {"Unique company names in the deal dataset", funnel.unique_names, frac(funnel.unique_names)},
        {hi_label, funnel.high, frac(funnel.high)},
        {mid_label, funnel.mid_band, frac(funnel.mid_band)},
        {mid_match_label, funnel.mid_matched, frac(funnel.mid_matched)},
        {"Companies matched", funnel.total_matched, frac(funnel.total_matched)},
    };
    funnel.summary = percent_string(funnel.total_matched, funnel.unique_names);
    return {std::move(results), std::move(funnel)};
}

}  // namespace dealscope::linkage
