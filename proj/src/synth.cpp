#include "dealscope/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>

#include "dealscope/csv.hpp"
#include "dealscope/dataset.hpp"
#include "dealscope/date.hpp"
#include "dealscope/linkage.hpp"
#include "dealscope/rng.hpp"
#include "dealscope/stats.hpp"
#include "dealscope/threading.hpp"

namespace dealscope::synth {

namespace {

// ---------------------------------------------------------------- config

void require(bool ok, const std::string& what) {
    if (!ok) throw std::invalid_argument("synth config: " + what);
}

void check_fraction(double v, const std::string& key) {
    require(v >= 0.0 && v <= 1.0, key + " must lie in [0, 1]");
}

void check_marginal(const MarginalTarget& t, const std::string& key) {
    require(std::isfinite(t.median) && std::isfinite(t.mean), key + ": targets must be finite");
    require(t.min_value < t.max_value, key + ": min must be below max");
    require(t.median > t.min_value && t.median < t.max_value,
            key + ": median must lie inside (min, max)");
    require(t.median > 0.0, key + ": body median must be positive"
                                  " (negative mass is configured via negative_fraction)");
    check_fraction(t.missing_rate, key + ".missing_rate");
    require(t.negative_fraction >= 0.0 && t.negative_fraction < 0.5,
            key + ".negative_fraction must lie in [0, 0.5)");
    require(t.negative_fraction == 0.0 || t.min_value < 0.0,
            key + ": negative_fraction needs a negative min");
}

template <typename Fn>
void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> known,
                         const std::string& scope, Fn&& assign) {
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(known.begin(), known.end(),
                         [&](const char* k) { return key == k; }) == known.end()) {
            throw std::invalid_argument("synth config: unknown key '" + scope + key + "'");
        }
        assign(key, value);
    }
}

MarginalTarget marginal_from_json(const nlohmann::json& j, MarginalTarget base,
                                  const std::string& scope) {
    reject_unknown_keys(
        j, {"median", "mean", "min", "max", "missing_rate", "negative_fraction"}, scope,
        [&](const std::string& key, const nlohmann::json& v) {
            if (key == "median") base.median = v.get<double>();
            else if (key == "mean") base.mean = v.get<double>();
            else if (key == "min") base.min_value = v.get<double>();
            else if (key == "max") base.max_value = v.get<double>();
            else if (key == "missing_rate") base.missing_rate = v.get<double>();
            else base.negative_fraction = v.get<double>();
        });
    return base;
}

nlohmann::json marginal_to_json(const MarginalTarget& t) {
    return {{"median", t.median},          {"mean", t.mean},
            {"min", t.min_value},          {"max", t.max_value},
            {"missing_rate", t.missing_rate}, {"negative_fraction", t.negative_fraction}};
}

// ------------------------------------------------------- marginal solves

// Positive log-normal body mixed with a log-normal magnitude tail below
// zero. Solved so the analytic mixture median/mean equal the targets,
// with the mean loss from clamping at max_value compensated by a short
// fixed-point loop.
struct MixtureParams {
    double q = 0.0;       // negative mass
    double mu_neg = 0.0;  // log-median of negative magnitudes
    double sg_neg = 1.2;
    double mu = 0.0;      // positive body
    double sg = 1.0;
    double lo = 0.0;      // clamps
    double hi = 0.0;
};

MixtureParams solve_mixture(const MarginalTarget& t, const std::string& key) {
    MixtureParams p;
    p.q = t.negative_fraction;
    p.lo = t.min_value;
    p.hi = t.max_value;

    double mean_neg = 0.0;
    if (p.q > 0.0) {
        p.mu_neg = std::log(std::max(1.0, -t.min_value / 50.0));
        mean_neg = std::exp(p.mu_neg + 0.5 * p.sg_neg * p.sg_neg);
    }

    const double z0 = norm_inv((0.5 - p.q) / (1.0 - p.q));
    double body_mean = (t.mean + p.q * mean_neg) / (1.0 - p.q);
    for (int pass = 0; pass < 3; ++pass) {
        require(body_mean > 0.0, key + ": implied body mean is not positive");
        const double disc = z0 * z0 + 2.0 * std::log(body_mean / t.median);
        require(disc >= 0.0, key + ": mean is too small for the median (infeasible body)");
        p.sg = z0 + std::sqrt(disc);
        require(p.sg > 0.0, key + ": implied body sigma is not positive");
        p.mu = std::log(t.median) - p.sg * z0;
        // Mean lost to the clamp at max_value; add it back and re-solve.
        const double zc = (std::log(t.max_value) - p.mu) / p.sg;
        const double tail_mean = std::exp(p.mu + 0.5 * p.sg * p.sg) * (1.0 - norm_cdf(zc - p.sg));
        const double drop = tail_mean - t.max_value * (1.0 - norm_cdf(zc));
        body_mean = (t.mean + p.q * mean_neg) / (1.0 - p.q) + std::max(0.0, drop);
    }
    return p;
}

// Monotone quantile of the mixture; u in (0, 1), negatives at the low
// ranks so copula ranks order companies worst-to-best.
double mixture_quantile(const MixtureParams& p, double u) {
    double v;
    if (u < p.q) {
        v = -std::exp(p.mu_neg + p.sg_neg * norm_inv(1.0 - u / p.q));
    } else {
        v = std::exp(p.mu + p.sg * norm_inv((u - p.q) / (1.0 - p.q)));
    }
    return std::min(std::max(v, p.lo), p.hi);
}

// Profit margin is bounded above: max_value minus a log-normal. The two
// free parameters hit the median and mean exactly.
struct FlippedParams {
    double apex = 0.0;
    double mu = 0.0;
    double sg = 0.0;
    double lo = 0.0;
};

FlippedParams solve_flipped(const MarginalTarget& t, const std::string& key) {
    FlippedParams p;
    p.apex = t.max_value;
    p.lo = t.min_value;
    require(t.mean < t.median, key + ": bounded-above body needs mean below median");
    require(p.apex > t.median, key + ": max must exceed the median");
    p.mu = std::log(p.apex - t.median);
    p.sg = std::sqrt(2.0 * std::log((p.apex - t.mean) / (p.apex - t.median)));
    return p;
}

double flipped_quantile(const FlippedParams& p, double u) {
    const double v = p.apex - std::exp(p.mu + p.sg * norm_inv(1.0 - u));
    return std::max(v, p.lo);
}

// Disclosed deal values: a log-normal truncated to [min, max] plus,
// when the configured mean is above what the pure body can reach with
// the median pinned, a uniform component over the top of the range
// (large deals clump near the cap). Median and mean are hit exactly.
struct DealParams {
    double mu = 0.0;
    double sg = 1.0;
    double w_top = 0.0;  // mass of the uniform top component
    double lo = 0.0;
    double hi = 0.0;
    double top_lo = 0.0;  // uniform component support [top_lo, hi]
};

// P(u < Z < v) without tail cancellation: both-positive intervals go
// through the complement so bisection probes far from the body still
// get correct signs.
double normal_mass(double u, double v) {
    if (u >= v) return 0.0;
    if (u >= 0.0) return norm_cdf(-u) - norm_cdf(-v);
    return norm_cdf(v) - norm_cdf(u);
}

double trunc_mean(double mu, double sg, double lo, double hi) {
    const double a = (std::log(lo) - mu) / sg;
    const double b = (std::log(hi) - mu) / sg;
    return std::exp(mu + 0.5 * sg * sg) * normal_mass(a - sg, b - sg) / normal_mass(a, b);
}

// Pins F_trunc(x) = q for the log-normal truncated to [lo, hi]. The
// truncated family is stochastically increasing in mu, so the sign of
// the mass comparison bisects cleanly.
double solve_mu_for_quantile(double sg, double x, double q, double lo, double hi) {
    double lo_mu = std::log(x) - 12.0 * sg;
    double hi_mu = std::log(x) + 12.0 * sg;
    for (int it = 0; it < 200; ++it) {
        const double mu = 0.5 * (lo_mu + hi_mu);
        const double a = (std::log(lo) - mu) / sg;
        const double b = (std::log(hi) - mu) / sg;
        const double zx = (std::log(x) - mu) / sg;
        const bool below_q = normal_mass(a, zx) < q * normal_mass(a, b);
        if (below_q) {
            hi_mu = mu;  // the q-quantile of the window sits above x
        } else {
            lo_mu = mu;
        }
    }
    return 0.5 * (lo_mu + hi_mu);
}

DealParams solve_deal_values(const DealValueTarget& t) {
    require(t.min_value > 0.0 && t.min_value < t.max_value, "deal_value: invalid range");
    require(t.median > t.min_value && t.median < t.max_value,
            "deal_value: median must lie inside (min, max)");
    require(t.mean > t.median && t.mean < t.max_value,
            "deal_value: mean must lie between median and max");
    check_fraction(t.disclosed_fraction, "deal_value.disclosed_fraction");

    constexpr double kBodyShape = 1.13;  // body log-sd; sets the quartile spread
    DealParams p;
    p.lo = t.min_value;
    p.hi = t.max_value;
    p.top_lo = t.max_value * 0.7;

    const double pure_mu = solve_mu_for_quantile(kBodyShape, t.median, 0.5, p.lo, p.hi);
    const double pure_mean = trunc_mean(pure_mu, kBodyShape, p.lo, p.hi);
    if (pure_mean >= t.mean) {
        // a narrower pure body reaches the mean; no top component needed
        double lo_sg = 0.02, hi_sg = kBodyShape;
        for (int it = 0; it < 100; ++it) {
            const double sg = 0.5 * (lo_sg + hi_sg);
            const double mu = solve_mu_for_quantile(sg, t.median, 0.5, p.lo, p.hi);
            (trunc_mean(mu, sg, p.lo, p.hi) < t.mean ? lo_sg : hi_sg) = sg;
        }
        p.sg = 0.5 * (lo_sg + hi_sg);
        p.mu = solve_mu_for_quantile(p.sg, t.median, 0.5, p.lo, p.hi);
        p.w_top = 0.0;
        return p;
    }

    // keep the overall median fixed while the top component pulls the
    // mean up: body median quantile rises to 0.5 / (1 - w)
    p.sg = kBodyShape;
    const double top_mean = 0.5 * (p.top_lo + p.hi);
    const auto mean_at = [&](double w) {
        const double mu = solve_mu_for_quantile(p.sg, t.median, 0.5 / (1.0 - w), p.lo, p.hi);
        return (1.0 - w) * trunc_mean(mu, p.sg, p.lo, p.hi) + w * top_mean;
    };
    double lo_w = 0.0, hi_w = 0.45;
    require(mean_at(hi_w) >= t.mean, "deal_value: mean target is outside the reachable range");
    for (int it = 0; it < 100; ++it) {
        const double w = 0.5 * (lo_w + hi_w);
        (mean_at(w) < t.mean ? lo_w : hi_w) = w;
    }
    p.w_top = 0.5 * (lo_w + hi_w);
    p.mu = solve_mu_for_quantile(p.sg, t.median, 0.5 / (1.0 - p.w_top), p.lo, p.hi);
    return p;
}

double deal_quantile(const DealParams& p, double u) {
    // invert the mixture CDF by bisection; both components are monotone
    const double a = (std::log(p.lo) - p.mu) / p.sg;
    const double b = (std::log(p.hi) - p.mu) / p.sg;
    const double mass = normal_mass(a, b);
    const auto cdf = [&](double x) {
        const double body = normal_mass(a, (std::log(x) - p.mu) / p.sg) / mass;
        const double top =
            std::min(std::max((x - p.top_lo) / (p.hi - p.top_lo), 0.0), 1.0);
        return (1.0 - p.w_top) * body + p.w_top * top;
    };
    double lo = p.lo, hi = p.hi;
    for (int it = 0; it < 80; ++it) {
        const double x = 0.5 * (lo + hi);
        (cdf(x) < u ? lo : hi) = x;
    }
    return 0.5 * (lo + hi);
}

// ------------------------------------------------------------ name pool

const std::vector<std::string>& syllables() {
    static const std::vector<std::string> s = {
        "al",  "bar", "cor", "dun", "el",  "fen", "gar", "hol", "in",  "jor",
        "kel", "lan", "mor", "nor", "or",  "pel", "quin", "rad", "sol", "tor",
        "ul",  "ver", "wes", "yor", "zan", "ash", "bri", "cal", "der", "ex",
        "fos", "gil", "har", "ive", "kip", "lun", "mer", "nev", "oak", "pem"};
    return s;
}

const std::vector<std::string>& trade_words() {
    static const std::vector<std::string> w = {
        "Industrial",  "Technologies", "Logistics", "Foods",   "Media",
        "Consulting",  "Engineering",  "Energy",    "Textiles", "Partners",
        "Analytics",   "Marine",       "Pharma",    "Print",   "Retail",
        "Systems",     "Farms",        "Motors",    "Digital", "Packaging"};
    return w;
}

// Tokens the matcher's normalizer strips; adding or swapping them never
// changes the normalized name.
const std::vector<std::string>& legal_suffixes() {
    static const std::vector<std::string> s = {"Limited", "Ltd",      "Ltd.", "PLC",
                                               "LLP",     "Holdings", "Group"};
    return s;
}

const std::vector<std::string>& cities() {
    static const std::vector<std::string> c = {
        "london",    "manchester", "birmingham", "leeds",     "glasgow",  "bristol",
        "liverpool", "sheffield",  "edinburgh",  "cardiff",   "newcastle", "nottingham",
        "leicester", "coventry",   "reading",    "belfast",   "brighton", "oxford",
        "cambridge", "southampton", "portsmouth", "york",      "derby",    "swansea",
        "aberdeen",  "plymouth",   "milton keynes", "norwich", "luton",    "exeter"};
    return c;
}

const std::vector<std::string>& industries() {
    static const std::vector<std::string> v = {
        "manufacturing", "software", "healthcare", "retail",   "business services",
        "construction",  "food",     "transport",  "media",    "financial services",
        "energy",        "leisure"};
    return v;
}

const std::vector<std::string>& pe_firms() {
    static const std::vector<std::string> v = {
        "Arlington Row Capital", "Beacon Gate Partners", "Cawdor Equity",
        "Dray Street Capital",   "Eastwick Partners",    "Foundry Lane Capital",
        "Glendale Equity",       "Harbourside Partners", "Ironbridge Capital",
        "Juniper Hill Equity",   "Kestrel Park Capital", "Longford Partners"};
    return v;
}

std::string capitalize(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string make_core(Rng& rng) {
    const auto& syl = syllables();
    std::string word;
    const std::size_t parts = 2 + rng.index(2);
    for (std::size_t i = 0; i < parts; ++i) word += syl[rng.index(syl.size())];
    std::string core = capitalize(word);
    if (rng.uniform() < 0.7) core += " " + trade_words()[rng.index(trade_words().size())];
    return core;
}

// --------------------------------------------------------- corruption

std::string corrupt_name(const std::string& name, const CorruptionConfig& cfg, Rng& rng) {
    std::string out = name;

    if (rng.uniform() < cfg.suffix_op_rate) {
        // Drop a trailing legal token if present, otherwise append one;
        // either way the normalized form is unchanged.
        bool dropped = false;
        for (const auto& suf : legal_suffixes()) {
            if (out.size() > suf.size() + 1 && out.compare(out.size() - suf.size(), suf.size(), suf) == 0 &&
                out[out.size() - suf.size() - 1] == ' ') {
                out.erase(out.size() - suf.size() - 1);
                dropped = true;
                break;
            }
        }
        if (!dropped || rng.uniform() < 0.4) {
            out += " " + legal_suffixes()[rng.index(legal_suffixes().size())];
        }
    }

    if (cfg.char_edit_rate > 0.0) {
        // Edits hit the distinctive part of the name only. A typo inside
        // a legal suffix would survive normalization (the token no longer
        // matches the strip list) and bloat the edit distance for the
        // whole name, which is not the channel being modeled.
        std::size_t core_end = out.size();
        for (bool trimmed = true; trimmed;) {
            trimmed = false;
            for (const auto& suf : legal_suffixes()) {
                if (core_end > suf.size() + 1 &&
                    out.compare(core_end - suf.size(), suf.size(), suf) == 0 &&
                    out[core_end - suf.size() - 1] == ' ') {
                    core_end -= suf.size() + 1;
                    trimmed = true;
                }
            }
        }
        std::string edited;
        edited.reserve(out.size() + 4);
        for (std::size_t i = 0; i < out.size(); ++i) {
            if (i >= core_end || out[i] == ' ' || rng.uniform() >= cfg.char_edit_rate) {
                edited += out[i];
                continue;
            }
            switch (rng.index(3)) {
                case 0:  // substitute
                    edited += static_cast<char>('a' + rng.index(26));
                    break;
                case 1:  // delete
                    break;
                default:  // insert, keeping the original character
                    edited += static_cast<char>('a' + rng.index(26));
                    edited += out[i];
                    break;
            }
        }
        if (!edited.empty()) out = std::move(edited);
    }
    return out;
}

// ------------------------------------------------------------- records

struct CompanyGen {
    std::string id;
    std::string name;
    std::string normalized;
    std::string city;
    Date incorporated{};
    double age_years = 0.0;
    bool is_parent = false;
    bool is_ftse = false;

    // true (pre-missingness) latest-year values driving the label score
    double true_ebitda = 0.0;
    double true_employees = 0.0;

    // copula normals, turned into ranks then quantiles
    double z_turnover = 0.0, z_ebitda = 0.0, z_shf = 0.0, z_employees = 0.0, z_margin = 0.0;

    int latest_year = 0;
    int n_years = 0;
    std::uint64_t row_seed = 0;
};

struct FinRowGen {
    int company = -1;
    int year = 0;
    // empty string = missing cell
    std::string turnover, ebitda, ebitda_margin, shareholder_funds, employees, liquidity, rose,
        profit_margin, asset_turnover, long_term_liabilities;
};

struct OfficerGen {
    int officer = 0;     // index into officer id pool
    int company = 0;     // company index
    std::string role;
    Date appointed{};
    std::optional<Date> resigned;
    std::optional<int> birth_year;
    bool institutional = false;
};

struct DealGen {
    std::string name;
    Date date{};
    std::string city;
    std::optional<double> value;
    std::string band;  // undisclosed rows carry a band label instead
    std::string industry;
    std::string lead;
    int company = -1;  // -1 = decoy
};

// Undisclosed deals report a coarse size band; the split mirrors the
// 947 : 344 : 215 frequencies of the published deal table.
std::string pick_band(Rng& rng) {
    const std::size_t t = rng.index(947 + 344 + 215);
    if (t < 947) return "n/d (<25m)";
    if (t < 947 + 344) return "n/d (25 - 50m)";
    return "n/d (50 - 100m)";
}

std::string company_id(std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "C%06zu", idx + 1);
    return buf;
}

std::string officer_id(std::size_t idx) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "P%06zu", idx + 1);
    return buf;
}

std::string money(double v) { return std::to_string(static_cast<long long>(std::llround(v))); }

std::string fixed2(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

// ranks -> centered grid position in (0, 1)
std::vector<double> rank_grid(const std::vector<double>& z) {
    const std::size_t n = z.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (z[a] != z[b]) return z[a] < z[b];
        return a < b;
    });
    std::vector<double> u(n);
    for (std::size_t r = 0; r < n; ++r) {
        u[order[r]] = (static_cast<double>(r) + 0.5) / static_cast<double>(n);
    }
    return u;
}

}  // namespace

// ------------------------------------------------------------ config io

GeneratorConfig GeneratorConfig::from_json(const nlohmann::json& j) {
    GeneratorConfig c;
    reject_unknown_keys(
        j,
        {"n_companies", "positive_rate", "snapshot_year", "seed", "threads", "corruption",
         "signal", "turnover", "ebitda", "profit_margin", "shareholder_funds", "employees",
         "deal_value", "directors"},
        "", [&](const std::string& key, const nlohmann::json& v) {
            if (key == "n_companies") c.n_companies = v.get<std::size_t>();
            else if (key == "positive_rate") c.positive_rate = v.get<double>();
            else if (key == "snapshot_year") c.snapshot_year = v.get<int>();
            else if (key == "seed") c.seed = v.get<std::uint64_t>();
            else if (key == "threads") c.threads = v.get<unsigned>();
            else if (key == "corruption") {
                reject_unknown_keys(
                    v,
                    {"suffix_op_rate", "char_edit_rate", "duplicate_rate", "decoy_rate",
                     "prior_deal_rate", "sibling_rate"},
                    "corruption.", [&](const std::string& k2, const nlohmann::json& v2) {
                        auto& cc = c.corruption;
                        if (k2 == "suffix_op_rate") cc.suffix_op_rate = v2.get<double>();
                        else if (k2 == "char_edit_rate") cc.char_edit_rate = v2.get<double>();
                        else if (k2 == "duplicate_rate") cc.duplicate_rate = v2.get<double>();
                        else if (k2 == "decoy_rate") cc.decoy_rate = v2.get<double>();
                        else if (k2 == "prior_deal_rate") cc.prior_deal_rate = v2.get<double>();
                        else cc.sibling_rate = v2.get<double>();
                    });
            } else if (key == "signal") {
                reject_unknown_keys(
                    v,
                    {"age", "age_bump", "ebitda", "employees", "experience", "age_experience",
                     "noise"},
                    "signal.", [&](const std::string& k2, const nlohmann::json& v2) {
                        auto& s = c.signal;
                        if (k2 == "age") s.age = v2.get<double>();
                        else if (k2 == "age_bump") s.age_bump = v2.get<double>();
                        else if (k2 == "ebitda") s.ebitda = v2.get<double>();
                        else if (k2 == "employees") s.employees = v2.get<double>();
                        else if (k2 == "experience") s.experience = v2.get<double>();
                        else if (k2 == "age_experience") s.age_experience = v2.get<double>();
                        else s.noise = v2.get<double>();
                    });
            } else if (key == "turnover") c.turnover = marginal_from_json(v, c.turnover, "turnover.");
            else if (key == "ebitda") c.ebitda = marginal_from_json(v, c.ebitda, "ebitda.");
            else if (key == "profit_margin")
                c.profit_margin = marginal_from_json(v, c.profit_margin, "profit_margin.");
            else if (key == "shareholder_funds")
                c.shareholder_funds = marginal_from_json(v, c.shareholder_funds, "shareholder_funds.");
            else if (key == "employees") c.employees = marginal_from_json(v, c.employees, "employees.");
            else if (key == "deal_value") {
                reject_unknown_keys(
                    v, {"median", "mean", "min", "max", "disclosed_fraction"}, "deal_value.",
                    [&](const std::string& k2, const nlohmann::json& v2) {
                        auto& d = c.deal_value;
                        if (k2 == "median") d.median = v2.get<double>();
                        else if (k2 == "mean") d.mean = v2.get<double>();
                        else if (k2 == "min") d.min_value = v2.get<double>();
                        else if (k2 == "max") d.max_value = v2.get<double>();
                        else d.disclosed_fraction = v2.get<double>();
                    });
            } else {
                reject_unknown_keys(v, {"median", "mean"}, "directors.",
                                    [&](const std::string& k2, const nlohmann::json& v2) {
                                        if (k2 == "median") c.directors.median = v2.get<double>();
                                        else c.directors.mean = v2.get<double>();
                                    });
            }
        });
    c.validate();
    return c;
}

nlohmann::json GeneratorConfig::to_json() const {
    return {
        {"n_companies", n_companies},
        {"positive_rate", positive_rate},
        {"snapshot_year", snapshot_year},
        {"seed", seed},
        {"threads", threads},
        {"corruption",
         {{"suffix_op_rate", corruption.suffix_op_rate},
          {"char_edit_rate", corruption.char_edit_rate},
          {"duplicate_rate", corruption.duplicate_rate},
          {"decoy_rate", corruption.decoy_rate},
          {"prior_deal_rate", corruption.prior_deal_rate},
          {"sibling_rate", corruption.sibling_rate}}},
        {"signal",
         {{"age", signal.age},
          {"age_bump", signal.age_bump},
          {"ebitda", signal.ebitda},
          {"employees", signal.employees},
          {"experience", signal.experience},
          {"age_experience", signal.age_experience},
          {"noise", signal.noise}}},
        {"turnover", marginal_to_json(turnover)},
        {"ebitda", marginal_to_json(ebitda)},
        {"profit_margin", marginal_to_json(profit_margin)},
        {"shareholder_funds", marginal_to_json(shareholder_funds)},
        {"employees", marginal_to_json(employees)},
        {"deal_value",
         {{"median", deal_value.median},
          {"mean", deal_value.mean},
          {"min", deal_value.min_value},
          {"max", deal_value.max_value},
          {"disclosed_fraction", deal_value.disclosed_fraction}}},
        {"directors", {{"median", directors.median}, {"mean", directors.mean}}},
    };
}

void GeneratorConfig::validate() const {
    require(n_companies >= 100, "n_companies must be at least 100");
    require(positive_rate > 0.0 && positive_rate < 1.0, "positive_rate must lie in (0, 1)");
    require(snapshot_year >= 1990 && snapshot_year <= 2100, "snapshot_year out of range");
    check_fraction(corruption.suffix_op_rate, "corruption.suffix_op_rate");
    check_fraction(corruption.char_edit_rate, "corruption.char_edit_rate");
    check_fraction(corruption.duplicate_rate, "corruption.duplicate_rate");
    check_fraction(corruption.decoy_rate, "corruption.decoy_rate");
    check_fraction(corruption.prior_deal_rate, "corruption.prior_deal_rate");
    check_fraction(corruption.sibling_rate, "corruption.sibling_rate");
    require(signal.noise >= 0.0, "signal.noise must be non-negative");
    check_marginal(turnover, "turnover");
    check_marginal(ebitda, "ebitda");
    check_marginal(shareholder_funds, "shareholder_funds");
    check_marginal(employees, "employees");
    // Bounded-above field: validated by its own solve.
    require(profit_margin.median < profit_margin.max_value &&
                profit_margin.median > profit_margin.min_value,
            "profit_margin: median must lie inside (min, max)");
    check_fraction(profit_margin.missing_rate, "profit_margin.missing_rate");
    require(directors.mean > 1.0, "directors.mean must exceed 1");
    // Run the parametric solves now so infeasible targets fail fast.
    solve_mixture(turnover, "turnover");
    solve_mixture(ebitda, "ebitda");
    solve_mixture(shareholder_funds, "shareholder_funds");
    solve_mixture(employees, "employees");
    solve_flipped(profit_margin, "profit_margin");
    solve_deal_values(deal_value);
}

// -------------------------------------------------------------- generate

namespace {

// rng stream ids off the root seed
constexpr std::uint64_t kStreamNames = 1;
constexpr std::uint64_t kStreamOfficers = 2;
constexpr std::uint64_t kStreamLabels = 3;
constexpr std::uint64_t kStreamDeals = 4;
constexpr std::uint64_t kStreamSiblings = 5;
constexpr std::uint64_t kStreamCompanyBase = 1000;

int poisson(Rng& rng, double lambda) {
    // Knuth's product method; lambda stays small here.
    const double limit = std::exp(-lambda);
    int k = 0;
    double prod = 1.0;
    do {
        prod *= rng.uniform();
        ++k;
    } while (prod > limit);
    return k - 1;
}

double zscore(double v, double mu, double sd) { return sd > 0.0 ? (v - mu) / sd : 0.0; }

struct ScoreStats {
    double mu = 0.0, sd = 1.0;
};

ScoreStats moments(const std::vector<double>& v) {
    ScoreStats s;
    s.mu = mean(v);
    s.sd = sample_sd(v);
    if (!(s.sd > 0.0)) s.sd = 1.0;
    return s;
}

}  // namespace

GenerateSummary generate(const GeneratorConfig& config, const std::string& out_dir) {
    config.validate();
    const Rng root(config.seed);
    const std::size_t n = config.n_companies;
    const Date snapshot = Date::from_ymd(config.snapshot_year, 12, 31);

    const MixtureParams turnover_p = solve_mixture(config.turnover, "turnover");
    const MixtureParams ebitda_p = solve_mixture(config.ebitda, "ebitda");
    const MixtureParams shf_p = solve_mixture(config.shareholder_funds, "shareholder_funds");
    const MixtureParams emp_p = solve_mixture(config.employees, "employees");
    const FlippedParams margin_p = solve_flipped(config.profit_margin, "profit_margin");
    const DealParams deal_p = solve_deal_values(config.deal_value);

    // ---- companies: names, cities, ages, copula normals (serial names,
    // per-company streams for everything numeric)
    std::vector<CompanyGen> companies(n);
    {
        Rng names = root.derive(kStreamNames);
        std::unordered_set<std::string> used_cores;
        used_cores.reserve(n * 2);
        for (std::size_t i = 0; i < n; ++i) {
            CompanyGen& c = companies[i];
            c.id = company_id(i);
            std::string core, normalized;
            do {
                core = make_core(names);
                normalized = linkage::normalize_name(core).normalized;
            } while (normalized.empty() || !used_cores.insert(normalized).second);
            c.normalized = normalized;
            const double u = names.uniform();
            if (u < 0.30) core += " Limited";
            else if (u < 0.50) core += " Ltd";
            else if (u < 0.58) core += " PLC";
            else if (u < 0.63) core += " LLP";
            else if (u < 0.70) core += " Holdings Limited";
            c.name = core;
            c.city = cities()[names.index(cities().size())];
            c.is_parent = names.uniform() < 0.06;
        }
    }

    parallel_chunks(n, config.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            CompanyGen& c = companies[i];
            Rng rng = root.derive(kStreamCompanyBase + i);
            c.row_seed = rng.next();

            // log-normal-ish age profile, clamped to a sane range
            c.age_years = std::min(std::max(std::exp(rng.normal(std::log(9.0), 0.62)), 0.6), 70.0);
            c.incorporated =
                Date{snapshot.serial - static_cast<std::int32_t>(std::llround(c.age_years * 365.25))};

            const double size = rng.normal();
            c.z_turnover = 0.75 * size + 0.6614 * rng.normal();
            c.z_ebitda = 0.55 * size + 0.8352 * rng.normal();
            c.z_shf = 0.65 * size + 0.7599 * rng.normal();
            c.z_employees = 0.70 * size + 0.7141 * rng.normal();
            c.z_margin = rng.normal();

            const int lag_u = static_cast<int>(rng.index(10));
            const int lag = lag_u < 7 ? 0 : (lag_u < 9 ? 1 : 2);
            c.latest_year = config.snapshot_year - lag;
            const int age_cap = std::max(1, static_cast<int>(c.age_years));
            c.n_years = std::min(age_cap, 3 + static_cast<int>(rng.index(5)));
            if (rng.uniform() < 0.02) c.n_years = 0;  // never filed
        }
    });

    // copula ranks -> marginal quantiles (exact sample marginals)
    std::vector<double> zt(n), ze(n), zs(n), zm(n), zp(n);
    for (std::size_t i = 0; i < n; ++i) {
        zt[i] = companies[i].z_turnover;
        ze[i] = companies[i].z_ebitda;
        zs[i] = companies[i].z_shf;
        zm[i] = companies[i].z_employees;
        zp[i] = companies[i].z_margin;
    }
    const std::vector<double> ut = rank_grid(zt), ue = rank_grid(ze), us = rank_grid(zs),
                              um = rank_grid(zm), up = rank_grid(zp);

    std::vector<double> latest_turnover(n), latest_ebitda(n), latest_shf(n), latest_emp(n),
        latest_margin(n);
    for (std::size_t i = 0; i < n; ++i) {
        latest_turnover[i] = mixture_quantile(turnover_p, ut[i]);
        latest_ebitda[i] = mixture_quantile(ebitda_p, ue[i]);
        latest_shf[i] = mixture_quantile(shf_p, us[i]);
        latest_emp[i] = std::max(1.0, std::round(mixture_quantile(emp_p, um[i])));
        latest_margin[i] = flipped_quantile(margin_p, up[i]);
        companies[i].true_ebitda = latest_ebitda[i];
        companies[i].true_employees = latest_emp[i];
    }

    // Latest-year missing cells are spread evenly across value ranks
    // (exact count, stratified), so the observed subsample keeps the
    // calibrated median/mean instead of adding Bernoulli noise to them.
    const auto stride_missing = [n](const std::vector<double>& u, double rate) {
        std::vector<char> missing(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double r = u[i] * static_cast<double>(n) - 0.5;
            missing[i] = std::floor((r + 1.0) * rate) > std::floor(r * rate) ? 1 : 0;
        }
        return missing;
    };
    const std::vector<char> miss_turnover = stride_missing(ut, config.turnover.missing_rate);
    const std::vector<char> miss_ebitda = stride_missing(ue, config.ebitda.missing_rate);
    const std::vector<char> miss_shf = stride_missing(us, config.shareholder_funds.missing_rate);
    const std::vector<char> miss_emp = stride_missing(um, config.employees.missing_rate);
    const std::vector<char> miss_margin = stride_missing(up, config.profit_margin.missing_rate);

    // FTSE flag: the largest headcounts, a deterministic function of data
    {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(),
                  [&](std::size_t a, std::size_t b) { return latest_emp[a] > latest_emp[b]; });
        const std::size_t n_ftse = std::min<std::size_t>(n / 250 + 1, 80);
        for (std::size_t r = 0; r < n_ftse; ++r) companies[order[r]].is_ftse = true;
    }

    // ---- financial history rows (parallel, per-company streams)
    std::vector<std::vector<FinRowGen>> fin_rows(n);
    parallel_chunks(n, config.threads, [&](std::size_t begin, std::size_t end, std::size_t) {
        for (std::size_t i = begin; i < end; ++i) {
            const CompanyGen& c = companies[i];
            if (c.n_years == 0) continue;
            Rng rng(c.row_seed);
            const double growth = rng.normal(0.05, 0.08);

            double turn = latest_turnover[i];
            double ebit = latest_ebitda[i];
            double shf = latest_shf[i];
            double emp = latest_emp[i];
            double marg = latest_margin[i];
            double liq = std::exp(rng.normal(std::log(1.2), 0.55));
            double ast = std::exp(rng.normal(std::log(1.4), 0.5));
            const bool has_ltl = rng.uniform() >= 0.35;
            double ltl = has_ltl ? std::exp(rng.normal(std::log(500.0), 1.6)) : 0.0;

            auto& rows = fin_rows[i];
            rows.resize(static_cast<std::size_t>(c.n_years));
            for (int k = 0; k < c.n_years; ++k) {
                // newest first while stepping the history backwards
                FinRowGen& row = rows[static_cast<std::size_t>(c.n_years - 1 - k)];
                row.company = static_cast<int>(i);
                row.year = c.latest_year - k;

                const double margin_now = std::min(marg, config.profit_margin.max_value);
                const double rose_v =
                    std::abs(shf) > 1.0 ? std::min(std::max(100.0 * ebit / std::abs(shf), -200.0), 200.0)
                                        : rng.normal(8.0, 20.0);
                const double em_v =
                    std::abs(turn) > 1.0
                        ? std::min(std::max(100.0 * ebit / std::abs(turn), -300.0), 300.0)
                        : 0.0;

                // latest year: stratified masks; history: plain Bernoulli
                const auto present = [&](const std::vector<char>& mask, double rate) {
                    return k == 0 ? !mask[i] : rng.uniform() >= rate;
                };
                if (present(miss_turnover, config.turnover.missing_rate)) row.turnover = money(turn);
                const bool ebit_present = present(miss_ebitda, config.ebitda.missing_rate);
                if (ebit_present) row.ebitda = money(ebit);
                if (ebit_present && !row.turnover.empty()) row.ebitda_margin = fixed2(em_v);
                if (present(miss_shf, config.shareholder_funds.missing_rate))
                    row.shareholder_funds = money(shf);
                if (present(miss_emp, config.employees.missing_rate))
                    row.employees = money(std::max(1.0, std::round(emp)));
                if (rng.uniform() >= 0.25) row.liquidity = fixed2(liq);
                if (rng.uniform() >= 0.35) row.rose = fixed2(rose_v);
                if (present(miss_margin, config.profit_margin.missing_rate))
                    row.profit_margin = fixed2(margin_now);
                if (rng.uniform() >= 0.30) row.asset_turnover = fixed2(ast);
                if (rng.uniform() >= 0.40) row.long_term_liabilities = money(ltl);

                // step back one year
                const double shrink = std::exp(-growth + rng.normal(0.0, 0.12));
                turn *= shrink;
                ebit *= std::exp(-growth + rng.normal(0.0, 0.18));
                shf *= std::exp(-growth + rng.normal(0.0, 0.10));
                emp = std::max(1.0, std::round(emp * std::exp(-growth + rng.normal(0.0, 0.10))));
                marg += rng.normal(0.0, 2.5);
                liq *= std::exp(rng.normal(0.0, 0.10));
                ast *= std::exp(rng.normal(0.0, 0.08));
                if (has_ltl) ltl *= std::exp(rng.normal(0.0, 0.15));
            }
        }
    });

    // ---- officers (serial: the reuse pool is global state)
    std::vector<OfficerGen> officers;
    officers.reserve(n * 6);
    std::size_t officer_count = 0;
    // per officer: (company, appointment serial), for experience scoring
    std::vector<std::vector<std::pair<int, std::int32_t>>> officer_history;
    {
        Rng orng = root.derive(kStreamOfficers);
        std::vector<int> pool;  // officers available for reuse
        pool.reserve(n * 2);
        const double extra_mean = std::max(0.0, config.directors.mean - 1.0);
        for (std::size_t i = 0; i < n; ++i) {
            const CompanyGen& c = companies[i];
            const double pedigree = orng.normal();
            const int n_directors = 1 + poisson(orng, extra_mean);
            const int n_support = poisson(orng, 0.9);
            const int n_former = poisson(orng, 0.8);
            const double reuse_p = std::min(std::max(0.42 + 0.16 * pedigree, 0.05), 0.90);

            const auto add_appointment = [&](const std::string& role, bool former) {
                OfficerGen a;
                a.company = static_cast<int>(i);
                a.role = role;
                const bool reuse = !pool.empty() && orng.uniform() < reuse_p;
                if (reuse) {
                    a.officer = pool[orng.index(pool.size())];
                } else {
                    a.officer = static_cast<int>(officer_count++);
                    officer_history.emplace_back();
                    pool.push_back(a.officer);
                }
                const double span = std::max(0.1, c.age_years - 0.05);
                const double offset = orng.uniform() < 0.35 ? 0.0 : orng.uniform() * span;
                a.appointed = Date{c.incorporated.serial +
                                   static_cast<std::int32_t>(std::llround(offset * 365.25))};
                if (a.appointed > snapshot) a.appointed = snapshot;
                if (former) {
                    const double stay = 0.5 + orng.uniform() * 6.0;
                    std::int32_t res = a.appointed.serial +
                                       static_cast<std::int32_t>(std::llround(stay * 365.25));
                    // must be gone well before the snapshot to stay inactive
                    res = std::min(res, snapshot.serial - 400);
                    if (res <= a.appointed.serial) return;  // too young to have former staff
                    a.resigned = Date{res};
                }
                if (orng.uniform() >= 0.05) {
                    const double age_at = std::min(std::max(orng.normal(44.0, 8.5), 22.0), 78.0);
                    a.birth_year = a.appointed.year() - static_cast<int>(std::llround(age_at));
                }
                officer_history[static_cast<std::size_t>(a.officer)].push_back(
                    {a.company, a.appointed.serial});
                officers.push_back(std::move(a));
            };

            for (int d = 0; d < n_directors; ++d) {
                const double u = orng.uniform();
                const char* role = u < 0.55 ? "director"
                                 : u < 0.70 ? "managing director"
                                 : u < 0.85 ? "finance director"
                                            : "non-executive director";
                add_appointment(role, false);
            }
            for (int s = 0; s < n_support; ++s) {
                add_appointment(orng.uniform() < 0.75 ? "company secretary" : "chairman", false);
            }
            for (int f = 0; f < n_former; ++f) add_appointment("director", true);
        }

        // nominee agency: one officer parked on many boards; flagged so
        // the cleaning step can drop every one of its appointments
        const std::size_t n_agency = std::min<std::size_t>(n, 200);
        const int agency = static_cast<int>(officer_count++);
        officer_history.emplace_back();
        const std::size_t stride = std::max<std::size_t>(1, n / n_agency);
        for (std::size_t i = 0; i < n && officer_history[static_cast<std::size_t>(agency)].size() <
                                             n_agency;
             i += stride) {
            OfficerGen a;
            a.company = static_cast<int>(i);
            a.officer = agency;
            a.role = "corporate nominee director";
            a.appointed = companies[i].incorporated;
            a.institutional = true;
            a.birth_year = 1970;
            officer_history[static_cast<std::size_t>(agency)].push_back(
                {a.company, a.appointed.serial});
            officers.push_back(std::move(a));
        }
    }

    // ---- label score over planted attributes (institutional rows excluded,
    // mirroring the cleaned view the models will see)
    std::vector<double> score(n);
    {
        // current (active, non-institutional) officers per company
        std::vector<std::vector<const OfficerGen*>> active(n);
        for (const OfficerGen& a : officers) {
            if (a.institutional) continue;
            if (a.resigned && a.resigned->serial < snapshot.serial) continue;
            active[static_cast<std::size_t>(a.company)].push_back(&a);
        }
        std::vector<double> f_age(n), f_bump(n), f_ebit(n), f_emp(n), f_exp(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double age = companies[i].age_years;
            f_age[i] = std::log(1.0 + age);
            const double centered = (age - 8.0) / 4.0;
            f_bump[i] = std::exp(-centered * centered);
            const double e = companies[i].true_ebitda;
            f_ebit[i] = (e >= 0.0 ? 1.0 : -1.0) * std::log(1.0 + std::abs(e));
            f_emp[i] = std::log(1.0 + companies[i].true_employees);

            double prev_sum = 0.0;
            for (const OfficerGen* a : active[i]) {
                std::set<int> prev;
                for (const auto& [comp, serial] : officer_history[static_cast<std::size_t>(a->officer)]) {
                    if (comp != a->company && serial < a->appointed.serial) prev.insert(comp);
                }
                prev_sum += static_cast<double>(prev.size());
            }
            f_exp[i] = active[i].empty()
                           ? 0.0
                           : std::log(1.0 + prev_sum / static_cast<double>(active[i].size()));
        }
        const ScoreStats m_age = moments(f_age), m_bump = moments(f_bump), m_eb = moments(f_ebit),
                         m_emp = moments(f_emp), m_exp = moments(f_exp);
        Rng lrng = root.derive(kStreamLabels);
        const SignalConfig& s = config.signal;
        for (std::size_t i = 0; i < n; ++i) {
            const double za = zscore(f_age[i], m_age.mu, m_age.sd);
            const double zx = zscore(f_exp[i], m_exp.mu, m_exp.sd);
            score[i] = s.age * za + s.age_bump * zscore(f_bump[i], m_bump.mu, m_bump.sd) +
                       s.ebitda * zscore(f_ebit[i], m_eb.mu, m_eb.sd) +
                       s.employees * zscore(f_emp[i], m_emp.mu, m_emp.sd) + s.experience * zx +
                       s.age_experience * za * zx + s.noise * lrng.normal();
        }
    }

    const std::size_t k = std::max<std::size_t>(
        1, static_cast<std::size_t>(std::llround(config.positive_rate * static_cast<double>(n))));
    std::vector<std::size_t> by_score(n);
    std::iota(by_score.begin(), by_score.end(), std::size_t{0});
    std::sort(by_score.begin(), by_score.end(), [&](std::size_t a, std::size_t b) {
        if (score[a] != score[b]) return score[a] > score[b];
        return a < b;
    });
    std::vector<char> positive(n, 0);
    for (std::size_t r = 0; r < k && r < n; ++r) positive[by_score[r]] = 1;

    // ---- deals (serial)
    std::vector<DealGen> deals;
    std::vector<std::pair<std::string, std::string>> truth_links;  // deal_name -> company_id
    std::vector<std::vector<std::string>> groups;                  // holding groups (ids)
    std::vector<CompanyGen> siblings;
    std::vector<std::vector<FinRowGen>> sibling_rows;

    {
        Rng drng = root.derive(kStreamDeals);
        Rng srng = root.derive(kStreamSiblings);
        std::unordered_set<std::string> used_cores;
        for (const CompanyGen& c : companies) used_cores.insert(c.normalized);

        std::vector<std::size_t> positives;
        for (std::size_t i = 0; i < n; ++i) {
            if (positive[i]) positives.push_back(i);
        }
        std::vector<std::pair<std::size_t, std::size_t>> dup_pairs;  // (copy row, source row)

        const auto push_deal = [&](const std::string& registry_name, int company_idx,
                                   const std::string& city, Date date) {
            DealGen d;
            d.name = corrupt_name(registry_name, config.corruption, drng);
            d.date = date;
            d.city = city;
            d.company = company_idx;
            d.industry = industries()[drng.index(industries().size())];
            d.lead = pe_firms()[drng.index(pe_firms().size())];
            deals.push_back(std::move(d));  // value or band assigned below
        };

        for (std::size_t idx : positives) {
            const CompanyGen& c = companies[idx];
            const Date main_date{snapshot.serial - 1 -
                                 static_cast<std::int32_t>(drng.index(365))};
            push_deal(c.name, static_cast<int>(idx), c.city, main_date);
            const std::size_t main_row = deals.size() - 1;

            if (drng.uniform() < config.corruption.prior_deal_rate) {
                const Date prior{main_date.serial -
                                 static_cast<std::int32_t>(730 + drng.index(1461))};
                if (prior > c.incorporated) {
                    push_deal(c.name, static_cast<int>(idx), c.city, prior);
                }
            }

            if (drng.uniform() < config.corruption.duplicate_rate) {
                // exact repeat of the main record; its value/band is
                // copied after assignment so both rows stay identical
                dup_pairs.emplace_back(deals.size(), main_row);
                deals.push_back(deals[main_row]);
            }

            // parent/child pair sharing books: the child gets its own
            // registry entry (copied accounts) and its own deal row
            if (drng.uniform() < config.corruption.sibling_rate && !fin_rows[idx].empty()) {
                CompanyGen sib;
                const std::size_t sib_idx = n + siblings.size();
                sib.id = company_id(sib_idx);
                static const char* kVariants[] = {"Trading", "Services", "Ventures", "Industries"};
                // rebuild a display name from the normalized core, then
                // extend it with a distinguishing trade word
                std::string pretty;
                bool cap = true;
                for (char ch : c.normalized) {
                    pretty += cap ? static_cast<char>(std::toupper(static_cast<unsigned char>(ch)))
                                  : ch;
                    cap = ch == ' ';
                }
                sib.name = pretty + " " + kVariants[srng.index(4)] + " Limited";
                const std::string norm = linkage::normalize_name(sib.name).normalized;
                if (!used_cores.insert(norm).second) continue;  // name clash, skip the pair
                sib.normalized = norm;
                sib.city = c.city;
                sib.age_years = std::max(0.6, c.age_years - 1.0 - srng.uniform() * 2.0);
                sib.incorporated = Date{snapshot.serial -
                                        static_cast<std::int32_t>(std::llround(sib.age_years * 365.25))};
                sib.is_parent = false;
                sib.latest_year = c.latest_year;
                sib.n_years = c.n_years;
                // books copied verbatim so the pair shares a fingerprint
                std::vector<FinRowGen> rows = fin_rows[idx];
                for (auto& r : rows) r.company = static_cast<int>(sib_idx);
                sibling_rows.push_back(std::move(rows));
                companies[idx].is_parent = true;
                groups.push_back({c.id, sib.id});
                push_deal(sib.name, static_cast<int>(sib_idx), sib.city, main_date);
                siblings.push_back(std::move(sib));
            }
        }

        // decoys: names that resolve to no registry company. A decoy must
        // stay below the fuzzy floor against every registry name, or the
        // truth would mark an honest accept as a false positive.
        const auto near_registry = [&](const std::string& norm) {
            for (const auto& u : used_cores) {
                const std::size_t longer = std::max(norm.size(), u.size());
                // ratio >= 0.65 needs distance <= 0.35 * longer
                const auto cap = static_cast<std::size_t>(0.35 * static_cast<double>(longer));
                const std::size_t gap =
                    norm.size() > u.size() ? norm.size() - u.size() : u.size() - norm.size();
                if (gap > cap) continue;
                if (linkage::levenshtein_bounded(norm, u, cap) <= cap) return true;
            }
            return false;
        };
        const std::size_t n_decoys = static_cast<std::size_t>(
            std::llround(config.corruption.decoy_rate * static_cast<double>(positives.size())));
        for (std::size_t d = 0; d < n_decoys; ++d) {
            std::string core, norm;
            do {
                core = make_core(drng);
                norm = linkage::normalize_name(core).normalized;
            } while (norm.empty() || near_registry(norm));
            used_cores.insert(norm);
            DealGen dec;
            dec.name = core + " Limited";
            dec.date = Date{snapshot.serial - 1 - static_cast<std::int32_t>(drng.index(365))};
            dec.city = cities()[drng.index(cities().size())];
            dec.industry = industries()[drng.index(industries().size())];
            dec.lead = pe_firms()[drng.index(pe_firms().size())];
            deals.push_back(std::move(dec));
        }

        // disclosure: exact count over the non-duplicate rows, then a
        // stratified quantile grid so the disclosed sample's order
        // statistics match the value targets even for a handful of deals
        std::vector<char> is_dup(deals.size(), 0);
        for (const auto& [copy_row, source_row] : dup_pairs) is_dup[copy_row] = 1;
        std::vector<std::size_t> pending;
        for (std::size_t i = 0; i < deals.size(); ++i) {
            if (!is_dup[i]) pending.push_back(i);
        }
        std::vector<std::size_t> pick(pending.size());
        std::iota(pick.begin(), pick.end(), std::size_t{0});
        drng.shuffle(pick);
        const std::size_t n_disclosed = static_cast<std::size_t>(std::llround(
            config.deal_value.disclosed_fraction * static_cast<double>(pending.size())));
        std::vector<std::size_t> disclosed;
        for (std::size_t r = 0; r < pending.size(); ++r) {
            const std::size_t row = pending[pick[r]];
            if (r < n_disclosed) {
                disclosed.push_back(row);
            } else {
                deals[row].band = pick_band(drng);
            }
        }
        std::vector<std::size_t> perm(disclosed.size());
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        drng.shuffle(perm);
        for (std::size_t r = 0; r < disclosed.size(); ++r) {
            const double u = (static_cast<double>(perm[r]) + 0.5) / static_cast<double>(perm.size());
            deals[disclosed[r]].value = deal_quantile(deal_p, u);
        }
        for (const auto& [copy_row, source_row] : dup_pairs) {
            deals[copy_row].value = deals[source_row].value;
            deals[copy_row].band = deals[source_row].band;
        }

        for (const DealGen& d : deals) {
            truth_links.emplace_back(d.name,
                                     d.company < 0
                                         ? std::string()
                                         : (static_cast<std::size_t>(d.company) < n
                                                ? companies[static_cast<std::size_t>(d.company)].id
                                                : siblings[static_cast<std::size_t>(d.company) - n].id));
        }
    }

    // ---- write files
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    GenerateSummary summary;
    summary.paths.companies_csv = (fs::path(out_dir) / "companies.csv").string();
    summary.paths.financials_csv = (fs::path(out_dir) / "financials.csv").string();
    summary.paths.officers_csv = (fs::path(out_dir) / "officers.csv").string();
    summary.paths.deals_csv = (fs::path(out_dir) / "deals.csv").string();
    summary.paths.truth_json = (fs::path(out_dir) / "truth.json").string();

    {
        CsvWriter w(summary.paths.companies_csv);
        w.write_row({"company_id", "name", "city", "incorporation_date", "is_parent", "is_ftse"});
        const auto write_company = [&](const CompanyGen& c) {
            w.write_row({c.id, c.name, c.city, c.incorporated.iso(), c.is_parent ? "1" : "0",
                         c.is_ftse ? "1" : "0"});
        };
        for (const CompanyGen& c : companies) write_company(c);
        for (const CompanyGen& c : siblings) write_company(c);
        w.close();
    }
    {
        CsvWriter w(summary.paths.financials_csv);
        w.write_row({"company_id", "year", "turnover", "ebitda", "ebitda_margin",
                     "shareholder_funds", "employees", "liquidity", "rose", "profit_margin",
                     "asset_turnover", "long_term_liabilities"});
        const auto write_rows = [&](const std::vector<FinRowGen>& rows, const std::string& id) {
            for (const FinRowGen& r : rows) {
                w.write_row({id, std::to_string(r.year), r.turnover, r.ebitda, r.ebitda_margin,
                             r.shareholder_funds, r.employees, r.liquidity, r.rose,
                             r.profit_margin, r.asset_turnover, r.long_term_liabilities});
                ++summary.n_financial_rows;
            }
        };
        for (std::size_t i = 0; i < n; ++i) write_rows(fin_rows[i], companies[i].id);
        for (std::size_t sidx = 0; sidx < siblings.size(); ++sidx) {
            write_rows(sibling_rows[sidx], siblings[sidx].id);
        }
        w.close();
    }
    {
        CsvWriter w(summary.paths.officers_csv);
        w.write_row({"officer_id", "company_id", "role", "appointed_on", "resigned_on",
                     "birth_year", "is_institutional"});
        for (const OfficerGen& a : officers) {
            const std::string cid = static_cast<std::size_t>(a.company) < n
                                        ? companies[static_cast<std::size_t>(a.company)].id
                                        : siblings[static_cast<std::size_t>(a.company) - n].id;
            w.write_row({officer_id(static_cast<std::size_t>(a.officer)), cid, a.role,
                         a.appointed.iso(), a.resigned ? a.resigned->iso() : "",
                         a.birth_year ? std::to_string(*a.birth_year) : "",
                         a.institutional ? "1" : "0"});
        }
        summary.n_officer_rows = officers.size();
        w.close();
    }
    {
        CsvWriter w(summary.paths.deals_csv);
        w.write_row({"deal_name", "deal_date", "country", "region", "city", "deal_value",
                     "industry", "equity_lead"});
        for (const DealGen& d : deals) {
            w.write_row({d.name, d.date.iso(), "united kingdom", "uk", d.city,
                         d.value ? fixed3(*d.value) : d.band, d.industry, d.lead});
            if (d.company < 0) ++summary.n_decoys;
        }
        w.close();
    }

    nlohmann::json truth;
    truth["schema_version"] = 1;
    truth["seed"] = config.seed;
    truth["snapshot_date"] = snapshot.iso();
    truth["config"] = config.to_json();
    {
        nlohmann::json links = nlohmann::json::array();
        for (const auto& [name, cid] : truth_links) {
            links.push_back({{"deal_name", name}, {"company_id", cid}});
        }
        truth["links"] = std::move(links);
        nlohmann::json pos = nlohmann::json::array();
        for (std::size_t i = 0; i < n; ++i) {
            if (positive[i]) pos.push_back(companies[i].id);
        }
        truth["positives"] = std::move(pos);
        nlohmann::json grp = nlohmann::json::array();
        for (const auto& g : groups) grp.push_back(g);
        truth["holding_groups"] = std::move(grp);
    }
    {
        std::ofstream out(summary.paths.truth_json, std::ios::binary);
        if (!out) throw std::runtime_error("synth: cannot write " + summary.paths.truth_json);
        out << truth.dump(2) << "\n";
    }

    summary.n_companies = n + siblings.size();
    summary.n_positive = k;
    summary.n_deal_rows = deals.size();
    return summary;
}

// ---------------------------------------------------------------- verify

TruthReport verify_against_truth(const std::string& matches_csv, const std::string& dataset_csv,
                                 const std::string& truth_json) {
    nlohmann::json truth;
    {
        std::ifstream in(truth_json, std::ios::binary);
        if (!in) throw std::runtime_error("verify: cannot read " + truth_json);
        in >> truth;
    }

    std::unordered_map<std::string, std::string> link_of;  // deal_name -> company_id ("" = decoy)
    for (const auto& l : truth.at("links")) {
        link_of[l.at("deal_name").get<std::string>()] = l.at("company_id").get<std::string>();
    }
    std::unordered_map<std::string, std::string> canon;  // group member -> canonical id
    for (const auto& g : truth.at("holding_groups")) {
        std::vector<std::string> ids = g.get<std::vector<std::string>>();
        std::sort(ids.begin(), ids.end());
        for (const auto& id : ids) canon[id] = ids.front();
    }
    const auto canonical = [&](const std::string& id) {
        auto it = canon.find(id);
        return it == canon.end() ? id : it->second;
    };

    TruthReport rep;

    std::set<std::string> truth_pos;
    for (const auto& p : truth.at("positives")) {
        truth_pos.insert(canonical(p.get<std::string>()));
    }
    rep.truth_positives = truth_pos.size();

    // linkage: one verdict per unique deal name
    {
        CsvReader r(matches_csv, {"deal_name", "company_id", "tier"});
        const auto c_name = r.column("deal_name"), c_id = r.column("company_id"),
                   c_tier = r.column("tier");
        std::vector<std::string> f;
        std::size_t line;
        std::set<std::string> seen;
        while (r.next(f, line)) {
            const std::string& name = f[c_name];
            if (!seen.insert(name).second) continue;
            auto it = link_of.find(name);
            if (it == link_of.end()) continue;  // name not generated by us
            const bool accepted = f[c_tier] != "REJECTED";
            const bool decoy = it->second.empty();
            if (accepted) {
                ++rep.accepted;
                if (decoy) {
                    ++rep.decoys_accepted;
                } else if (canonical(f[c_id]) == canonical(it->second)) {
                    ++rep.correct;
                }
            }
        }
        std::set<std::string> names_with_truth;
        for (const auto& [name, cid] : link_of) {
            if (!cid.empty()) names_with_truth.insert(name);
        }
        rep.true_links = names_with_truth.size();
        rep.linkage_precision =
            rep.accepted ? static_cast<double>(rep.correct) / static_cast<double>(rep.accepted) : 0.0;
        rep.linkage_recall = rep.true_links ? static_cast<double>(rep.correct) /
                                                  static_cast<double>(rep.true_links)
                                            : 0.0;
    }

    // labels (skipped when only the linkage half is under test)
    if (!dataset_csv.empty()) {
        const Dataset ds = read_dataset_csv(dataset_csv);
        std::set<std::string> ds_pos;
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (ds.y[i] == 1) ds_pos.insert(canonical(ds.ids[i]));
        }
        rep.dataset_positives = ds_pos.size();
        for (const auto& id : ds_pos) {
            if (truth_pos.count(id)) {
                ++rep.recovered;
            } else {
                ++rep.spurious;
            }
        }
        rep.label_recovery = rep.truth_positives
                                 ? static_cast<double>(rep.recovered) /
                                       static_cast<double>(rep.truth_positives)
                                 : 0.0;
        // ids the pipeline invented: should never happen
        std::set<std::string> known;
        for (const auto& [name, cid] : link_of) known.insert(cid);
        for (std::size_t i = 0; i < ds.n(); ++i) {
            if (ds.y[i] == 1 && !known.count(ds.ids[i]) && !canon.count(ds.ids[i])) {
                // positives must come from linked companies
                ++rep.unknown_ids;
            }
        }
    }
    return rep;
}

nlohmann::json truth_report_json(const TruthReport& r) {
    return {
        {"linkage",
         {{"true_links", r.true_links},
          {"accepted", r.accepted},
          {"correct", r.correct},
          {"decoys_accepted", r.decoys_accepted},
          {"precision", r.linkage_precision},
          {"recall", r.linkage_recall}}},
        {"labels",
         {{"truth_positives", r.truth_positives},
          {"dataset_positives", r.dataset_positives},
          {"recovered", r.recovered},
          {"spurious", r.spurious},
          {"recovery", r.label_recovery},
          {"unknown_positive_ids", r.unknown_ids}}},
    };
}

}  // namespace dealscope::synth
