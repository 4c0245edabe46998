#include "dealscope/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include "dealscope/csv.hpp"

namespace dealscope {

void RecordStore::rebuild_indexes() {
    company_index.clear();
    financials_by_company.clear();
    officers_by_company.clear();
    for (std::size_t i = 0; i < companies.size(); ++i) company_index[companies[i].company_id] = i;
    for (std::size_t i = 0; i < financials.size(); ++i) {
        financials_by_company[financials[i].company_id].push_back(i);
    }
    for (std::size_t i = 0; i < officers.size(); ++i) {
        officers_by_company[officers[i].company_id].push_back(i);
    }
}

const CompanyRecord* RecordStore::find_company(const std::string& company_id) const {
    auto it = company_index.find(company_id);
    return it == company_index.end() ? nullptr : &companies[it->second];
}

}  // namespace dealscope

namespace dealscope::ingest {

namespace {

std::string lower_trim(const std::string& s) {
    std::string out;
    for (unsigned char c : s) out += static_cast<char>(std::tolower(c));
    const auto b = out.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    const auto e = out.find_last_not_of(" \t");
    return out.substr(b, e - b + 1);
}

}  // namespace

std::optional<DealValue> parse_deal_value(const std::string& text) {
    DealValue v;
    const std::string t = lower_trim(text);
    if (t.empty()) return v;  // unknown, neither amount nor band
    if (auto num = parse_double_field(t)) {
        v.amount = *num;
        return v;
    }
    // Banded forms. Spacing and the trailing currency marker vary, so
    // compare on a squeezed copy (no spaces, no pound sign).
    std::string squeezed;
    for (char c : t) {
        if (c != ' ') squeezed += c;
    }
    const auto strip_suffix = [](std::string s) {
        // remove a trailing "£m)" / "m)" variant back to ")"
        return s;
    };
    squeezed = strip_suffix(squeezed);
    if (squeezed == "n/d(<25m)" || squeezed == "n/d(<25\xc2\xa3m)") {
        v.band = {0.0, 25.0};
        return v;
    }
    if (squeezed == "n/d(25-50m)" || squeezed == "n/d(25-50\xc2\xa3m)") {
        v.band = {25.0, 50.0};
        return v;
    }
    if (squeezed == "n/d(50-100m)" || squeezed == "n/d(50-100\xc2\xa3m)") {
        v.band = {50.0, 100.0};
        return v;
    }
    return std::nullopt;
}

namespace {

std::optional<double> read_opt_double(const std::vector<std::string>& f, std::size_t col,
                                      bool& bad) {
    if (col >= f.size() || f[col].empty()) return std::nullopt;
    auto v = parse_double_field(f[col]);
    if (!v) bad = true;
    return v;
}

std::string field_or_empty(const std::vector<std::string>& f, std::size_t col) {
    return col < f.size() ? f[col] : std::string();
}

}  // namespace

LoadResult load_sources(const SourcePaths& paths) {
    LoadResult out;

    if (!paths.companies_csv.empty()) {  // companies
        CsvReader r(paths.companies_csv,
                    {"company_id", "name", "city", "incorporation_date", "is_parent", "is_ftse"});
        const auto c_id = r.column("company_id"), c_name = r.column("name"),
                   c_city = r.column("city"), c_inc = r.column("incorporation_date"),
                   c_parent = r.column("is_parent"), c_ftse = r.column("is_ftse");
        std::vector<std::string> f;
        std::size_t line;
        std::set<std::string> seen_ids;
        while (r.next(f, line)) {
            CompanyRecord rec;
            rec.company_id = field_or_empty(f, c_id);
            if (rec.company_id.empty()) {
                out.errors.add(paths.companies_csv, line, "empty_company_id", "");
                ++out.companies.rejected;
                continue;
            }
            if (!seen_ids.insert(rec.company_id).second) {
                out.errors.add(paths.companies_csv, line, "duplicate_company_id", rec.company_id);
                ++out.companies.rejected;
                continue;
            }
            rec.name = field_or_empty(f, c_name);
            rec.city = lower_trim(field_or_empty(f, c_city));
            const std::string inc = field_or_empty(f, c_inc);
            if (!inc.empty()) {
                auto d = Date::parse_iso(inc);
                if (!d) {
                    out.errors.add(paths.companies_csv, line, "malformed_date", inc);
                    ++out.companies.rejected;
                    continue;
                }
                rec.incorporation_date = d;
            }
            rec.is_parent = parse_bool_field(field_or_empty(f, c_parent)).value_or(false);
            rec.is_ftse = parse_bool_field(field_or_empty(f, c_ftse)).value_or(false);
            out.store.companies.push_back(std::move(rec));
            ++out.companies.loaded;
        }
    }

    if (!paths.financials_csv.empty()) {  // financials
        CsvReader r(paths.financials_csv,
                    {"company_id", "year", "turnover", "ebitda", "ebitda_margin",
                     "shareholder_funds", "employees", "liquidity", "rose", "profit_margin",
                     "asset_turnover", "long_term_liabilities"});
        std::vector<std::string> f;
        std::size_t line;
        const auto col = [&](const char* n) { return r.column(n); };
        const auto c_id = col("company_id"), c_year = col("year");
        while (r.next(f, line)) {
            FinancialRow row;
            row.company_id = field_or_empty(f, c_id);
            if (row.company_id.empty()) {
                out.errors.add(paths.financials_csv, line, "empty_company_id", "");
                ++out.financials.rejected;
                continue;
            }
            const auto year = parse_int_field(field_or_empty(f, c_year));
            if (!year || *year < 1800 || *year > 2200) {
                out.errors.add(paths.financials_csv, line, "malformed_year",
                               field_or_empty(f, c_year));
                ++out.financials.rejected;
                continue;
            }
            row.year = static_cast<int>(*year);
            bool bad = false;
            row.turnover = read_opt_double(f, col("turnover"), bad);
            row.ebitda = read_opt_double(f, col("ebitda"), bad);
            row.ebitda_margin = read_opt_double(f, col("ebitda_margin"), bad);
            row.shareholder_funds = read_opt_double(f, col("shareholder_funds"), bad);
            row.employees = read_opt_double(f, col("employees"), bad);
            row.liquidity = read_opt_double(f, col("liquidity"), bad);
            row.rose = read_opt_double(f, col("rose"), bad);
            row.profit_margin = read_opt_double(f, col("profit_margin"), bad);
            row.asset_turnover = read_opt_double(f, col("asset_turnover"), bad);
            row.long_term_liabilities = read_opt_double(f, col("long_term_liabilities"), bad);
            if (bad) {
                out.errors.add(paths.financials_csv, line, "malformed_number", "");
                ++out.financials.rejected;
                continue;
            }
            if (row.employees && *row.employees < 0) {
                out.errors.add(paths.financials_csv, line, "negative_employees",
                               format_double(*row.employees));
                ++out.financials.rejected;
                continue;
            }
            out.store.financials.push_back(std::move(row));
            ++out.financials.loaded;
        }
    }

    if (!paths.officers_csv.empty()) {  // officers
        CsvReader r(paths.officers_csv, {"officer_id", "company_id", "role", "appointed_on",
                                         "resigned_on", "birth_year", "is_institutional"});
        std::vector<std::string> f;
        std::size_t line;
        const auto c_off = r.column("officer_id"), c_id = r.column("company_id"),
                   c_role = r.column("role"), c_app = r.column("appointed_on"),
                   c_res = r.column("resigned_on"), c_birth = r.column("birth_year"),
                   c_inst = r.column("is_institutional");
        while (r.next(f, line)) {
            OfficerAppointment a;
            a.officer_id = field_or_empty(f, c_off);
            a.company_id = field_or_empty(f, c_id);
            if (a.officer_id.empty() || a.company_id.empty()) {
                out.errors.add(paths.officers_csv, line, "empty_identifier", "");
                ++out.officers.rejected;
                continue;
            }
            a.role = lower_trim(field_or_empty(f, c_role));
            const std::string app = field_or_empty(f, c_app);
            if (!app.empty()) {
                auto d = Date::parse_iso(app);
                if (!d) {
                    out.errors.add(paths.officers_csv, line, "malformed_date", app);
                    ++out.officers.rejected;
                    continue;
                }
                a.appointed_on = d;
            }
            const std::string res = field_or_empty(f, c_res);
            if (!res.empty()) {
                auto d = Date::parse_iso(res);
                if (!d) {
                    out.errors.add(paths.officers_csv, line, "malformed_date", res);
                    ++out.officers.rejected;
                    continue;
                }
                a.resigned_on = d;
            }
            if (a.appointed_on && a.resigned_on && *a.resigned_on < *a.appointed_on) {
                out.errors.add(paths.officers_csv, line, "resigned_before_appointed",
                               res + " < " + app);
                ++out.officers.rejected;
                continue;
            }
            const std::string birth = field_or_empty(f, c_birth);
            if (!birth.empty()) {
                auto y = parse_int_field(birth);
                if (!y || *y < 1850 || *y > 2100) {
                    out.errors.add(paths.officers_csv, line, "malformed_birth_year", birth);
                    ++out.officers.rejected;
                    continue;
                }
                a.birth_year = static_cast<int>(*y);
            }
            a.is_institutional = parse_bool_field(field_or_empty(f, c_inst)).value_or(false);
            out.store.officers.push_back(std::move(a));
            ++out.officers.loaded;
        }
    }

    if (!paths.deals_csv.empty()) {  // deals
        CsvReader r(paths.deals_csv, {"deal_name", "deal_date", "country", "region", "city",
                                      "deal_value", "industry", "equity_lead"});
        std::vector<std::string> f;
        std::size_t line;
        const auto c_name = r.column("deal_name"), c_date = r.column("deal_date"),
                   c_country = r.column("country"), c_region = r.column("region"),
                   c_city = r.column("city"), c_value = r.column("deal_value"),
                   c_ind = r.column("industry"), c_lead = r.column("equity_lead");
        while (r.next(f, line)) {
            DealRecord d;
            d.deal_name = field_or_empty(f, c_name);
            if (d.deal_name.empty()) {
                out.errors.add(paths.deals_csv, line, "empty_deal_name", "");
                ++out.deals.rejected;
                continue;
            }
            auto date = Date::parse_iso(field_or_empty(f, c_date));
            if (!date) {
                out.errors.add(paths.deals_csv, line, "malformed_date", field_or_empty(f, c_date));
                ++out.deals.rejected;
                continue;
            }
            d.deal_date = *date;
            d.country = field_or_empty(f, c_country);
            d.region = field_or_empty(f, c_region);
            d.city = lower_trim(field_or_empty(f, c_city));
            auto value = parse_deal_value(field_or_empty(f, c_value));
            if (!value) {
                out.errors.add(paths.deals_csv, line, "malformed_deal_value",
                               field_or_empty(f, c_value));
                ++out.deals.rejected;
                continue;
            }
            d.value = *value;
            d.industry = field_or_empty(f, c_ind);
            d.equity_lead = field_or_empty(f, c_lead);
            out.store.deals.push_back(std::move(d));
            ++out.deals.loaded;
        }
    }

    out.store.rebuild_indexes();
    return out;
}

std::size_t remove_institutional_officers(RecordStore& store) {
    const std::size_t before = store.officers.size();
    std::erase_if(store.officers, [](const OfficerAppointment& a) { return a.is_institutional; });
    store.rebuild_indexes();
    return before - store.officers.size();
}

namespace {

std::string opt_tag(const std::optional<double>& v) {
    return v ? format_double(*v) : std::string("-");
}

const FinancialRow* latest_row_at_or_before(const RecordStore& store, const std::string& company_id,
                                            int year) {
    const FinancialRow* best = nullptr;
    auto it = store.financials_by_company.find(company_id);
    if (it == store.financials_by_company.end()) return nullptr;
    for (std::size_t idx : it->second) {
        const FinancialRow& row = store.financials[idx];
        if (row.year <= year && (!best || row.year > best->year)) best = &row;
    }
    return best;
}

}  // namespace

std::vector<MatchedCompany> make_matched_companies(const RecordStore& store,
                                                   const std::vector<linkage::MatchResult>& matches) {
    std::vector<MatchedCompany> out;
    std::map<std::string, const linkage::MatchResult*> by_name;
    for (const auto& m : matches) {
        if (m.accepted()) by_name[m.deal_name] = &m;
    }
    for (const auto& deal : store.deals) {
        auto it = by_name.find(deal.deal_name);
        if (it == by_name.end()) continue;
        const linkage::MatchResult& m = *it->second;
        const CompanyRecord* company = store.find_company(m.company_id);
        if (!company) continue;
        MatchedCompany row;
        row.company_id = m.company_id;
        row.deal_name = deal.deal_name;
        row.deal_date = deal.deal_date;
        row.deal_value = deal.value;
        row.ratio = m.ratio;
        row.tier = m.tier;
        row.is_parent = company->is_parent;
        // The fingerprint covers every field of the latest filed year so
        // parent/subsidiary pairs with copied accounts collapse reliably.
        const FinancialRow* fin = latest_row_at_or_before(store, row.company_id, deal.deal_date.year());
        if (fin) {
            row.ebitda = fin->ebitda;
            row.turnover = fin->turnover;
            row.shareholder_funds = fin->shareholder_funds;
            std::ostringstream fp;
            fp << fin->year << '|' << opt_tag(fin->turnover) << '|' << opt_tag(fin->ebitda) << '|'
               << opt_tag(fin->ebitda_margin) << '|' << opt_tag(fin->shareholder_funds) << '|'
               << opt_tag(fin->employees) << '|' << opt_tag(fin->liquidity) << '|'
               << opt_tag(fin->rose) << '|' << opt_tag(fin->profit_margin) << '|'
               << opt_tag(fin->asset_turnover) << '|' << opt_tag(fin->long_term_liabilities);
            row.fingerprint = fp.str();
        }
        out.push_back(std::move(row));
    }
    return out;
}

std::vector<MatchedCompany> dedupe_and_trim(std::vector<MatchedCompany> matched,
                                            double trim_fraction, TrimSummary* summary) {
    if (!(trim_fraction >= 0.0 && trim_fraction < 0.5)) {
        throw std::invalid_argument("trim_fraction must lie in [0, 0.5)");
    }
    TrimSummary s;
    s.input_rows = matched.size();

    // Same company, same deal calendar year: keep the earliest deal row
    // (ties keep the first in input order).
    {
        std::map<std::pair<std::string, int>, std::size_t> best;  // key -> index in matched
        std::vector<bool> keep(matched.size(), true);
        for (std::size_t i = 0; i < matched.size(); ++i) {
            const auto key = std::make_pair(matched[i].company_id, matched[i].deal_date.year());
            auto it = best.find(key);
            if (it == best.end()) {
                best[key] = i;
            } else if (matched[i].deal_date < matched[it->second].deal_date) {
                keep[it->second] = false;
                it->second = i;
            } else {
                keep[i] = false;
            }
        }
        std::vector<MatchedCompany> kept;
        kept.reserve(matched.size());
        for (std::size_t i = 0; i < matched.size(); ++i) {
            if (keep[i]) kept.push_back(std::move(matched[i]));
        }
        s.deduped = s.input_rows - kept.size();
        matched = std::move(kept);
    }

    // Holding-company collapse: identical financial fingerprints with a
    // parent-flagged row involved reduce to one representative,
    // preferring the operating (non-parent) company, then smallest id.
    {
        std::map<std::string, std::vector<std::size_t>> groups;
        for (std::size_t i = 0; i < matched.size(); ++i) {
            if (!matched[i].fingerprint.empty()) groups[matched[i].fingerprint].push_back(i);
        }
        std::vector<bool> keep(matched.size(), true);
        for (const auto& [fp, idxs] : groups) {
            if (idxs.size() < 2) continue;
            const bool has_parent = std::any_of(idxs.begin(), idxs.end(),
                                                [&](std::size_t i) { return matched[i].is_parent; });
            if (!has_parent) continue;
            std::size_t rep = idxs[0];
            for (std::size_t i : idxs) {
                const bool better_flag = !matched[i].is_parent && matched[rep].is_parent;
                const bool same_flag = matched[i].is_parent == matched[rep].is_parent;
                if (better_flag ||
                    (same_flag && matched[i].company_id < matched[rep].company_id)) {
                    rep = i;
                }
            }
            for (std::size_t i : idxs) {
                if (i != rep) keep[i] = false;
            }
        }
        std::vector<MatchedCompany> kept;
        kept.reserve(matched.size());
        const std::size_t before = matched.size();
        for (std::size_t i = 0; i < matched.size(); ++i) {
            if (keep[i]) kept.push_back(std::move(matched[i]));
        }
        s.collapsed = before - kept.size();
        matched = std::move(kept);
    }

    // Quantile trim, union across the three features. Only strict
    // exceedance of the closed [v[k], v[n-1-k]] range drops a row, so
    // all-identical columns trim nothing.
    if (trim_fraction > 0.0) {
        std::vector<bool> drop(matched.size(), false);
        const auto trim_feature = [&](auto getter) {
            std::vector<double> values;
            for (const auto& m : matched) {
                if (auto v = getter(m)) values.push_back(*v);
            }
            if (values.empty()) return;
            std::sort(values.begin(), values.end());
            const auto n = values.size();
            const auto k = static_cast<std::size_t>(std::floor(trim_fraction * static_cast<double>(n)));
            if (k == 0) return;
            const double lo = values[k];
            const double hi = values[n - 1 - k];
            for (std::size_t i = 0; i < matched.size(); ++i) {
                if (auto v = getter(matched[i])) {
                    if (*v < lo || *v > hi) drop[i] = true;
                }
            }
        };
        trim_feature([](const MatchedCompany& m) { return m.ebitda; });
        trim_feature([](const MatchedCompany& m) { return m.turnover; });
        trim_feature([](const MatchedCompany& m) { return m.shareholder_funds; });
        std::vector<MatchedCompany> kept;
        kept.reserve(matched.size());
        for (std::size_t i = 0; i < matched.size(); ++i) {
            if (!drop[i]) kept.push_back(std::move(matched[i]));
        }
        s.trimmed = matched.size() - kept.size();
        matched = std::move(kept);
    }

    s.kept = matched.size();
    if (summary) *summary = s;
    return matched;
}

}  // namespace dealscope::ingest
