#include "dealscope/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <stdexcept>

#include "dealscope/threading.hpp"

namespace dealscope::features {

double signed_log(double x) {
    if (x >= 0.0) return std::log1p(x);
    return -std::log1p(-x);
}

double signed_log_inv(double y) {
    if (y >= 0.0) return std::expm1(y);
    return -std::expm1(-y);
}

OfficerIndex OfficerIndex::build(const RecordStore& store) {
    OfficerIndex idx;
    for (const auto& a : store.officers) idx.by_officer[a.officer_id].push_back(&a);
    for (const auto& c : store.companies) {
        if (c.is_ftse) idx.ftse_companies.insert(c.company_id);
    }
    return idx;
}

namespace {

bool visible(const OfficerAppointment& a, Date as_of) {
    return a.appointed_on && *a.appointed_on <= as_of;
}

bool active(const OfficerAppointment& a, Date as_of) {
    return visible(a, as_of) && (!a.resigned_on || *a.resigned_on >= as_of);
}

bool director_role(const std::string& role) { return role.find("director") != std::string::npos; }

}  // namespace

DirectorFeatureSet director_features(const RecordStore& store, const OfficerIndex& index,
                                     const std::string& company_id, Date as_of) {
    DirectorFeatureSet out;
    auto it = store.officers_by_company.find(company_id);
    if (it == store.officers_by_company.end()) return out;

    // Active appointments at this company, grouped per officer; the
    // officer's earliest active appointment here is their current role.
    std::map<std::string, const OfficerAppointment*> current_role;
    std::set<std::string> roles;
    std::set<std::string> active_directors;
    for (std::size_t idx : it->second) {
        const OfficerAppointment& a = store.officers[idx];
        if (!active(a, as_of)) continue;
        roles.insert(a.role);
        if (director_role(a.role)) active_directors.insert(a.officer_id);
        auto [pos, inserted] = current_role.try_emplace(a.officer_id, &a);
        if (!inserted && *a.appointed_on < *pos->second->appointed_on) pos->second = &a;
    }
    out.n_active_directors = static_cast<double>(active_directors.size());
    out.n_distinct_roles = static_cast<double>(roles.size());
    if (current_role.empty()) return out;  // averages stay missing, counts 0

    double sum_tenure = 0.0;
    double sum_prev_companies = 0.0;
    double sum_experience = 0.0;
    double sum_age = 0.0;
    std::size_t n_age = 0;
    std::size_t ftse = 0;
    for (const auto& [officer_id, current] : current_role) {
        const Date current_start = *current->appointed_on;
        std::optional<Date> first_ever;
        std::set<std::string> prev_companies;
        double tenure_sum = 0.0;
        std::size_t tenure_count = 0;
        bool has_ftse = false;
        auto hist = index.by_officer.find(officer_id);
        if (hist != index.by_officer.end()) {
            for (const OfficerAppointment* ap : hist->second) {
                if (!visible(*ap, as_of)) continue;
                if (!first_ever || *ap->appointed_on < *first_ever) first_ever = ap->appointed_on;
                if (index.ftse_companies.count(ap->company_id)) has_ftse = true;
                if (ap->company_id != company_id && *ap->appointed_on < current_start) {
                    prev_companies.insert(ap->company_id);
                    Date end = ap->resigned_on ? *ap->resigned_on : as_of;
                    if (as_of < end) end = as_of;
                    if (current_start < end) end = current_start;
                    if (*ap->appointed_on < end) {
                        tenure_sum += years_between(*ap->appointed_on, end);
                        ++tenure_count;
                    } else {
                        ++tenure_count;  // zero-length stint still counts
                    }
                }
            }
        }
        const Date first = first_ever.value_or(current_start);
        sum_experience += years_between(first, current_start);
        sum_prev_companies += static_cast<double>(prev_companies.size());
        sum_tenure += tenure_count ? tenure_sum / static_cast<double>(tenure_count) : 0.0;
        if (current->birth_year) {
            sum_age += static_cast<double>(as_of.year() - *current->birth_year);
            ++n_age;
        }
        if (has_ftse) ++ftse;
    }
    const auto n = static_cast<double>(current_role.size());
    out.ftse_count = static_cast<double>(ftse);
    out.avg_tenure_prior = sum_tenure / n;
    out.avg_previous_companies = sum_prev_companies / n;
    out.cumulative_experience = sum_experience;
    out.avg_experience_at_appointment = sum_experience / n;
    if (n_age > 0) out.avg_age_at_appointment = sum_age / static_cast<double>(n_age);
    return out;
}

namespace {

// Latest financial year whose Dec 31 year end falls on or before as_of.
int usable_year_cutoff(Date as_of) {
    const int y = as_of.year();
    return as_of == Date::from_ymd(y, 12, 31) ? y : y - 1;
}

}  // namespace

FinancialFeatureSet financial_features(const RecordStore& store, const std::string& company_id,
                                       Date as_of) {
    FinancialFeatureSet out;
    if (const CompanyRecord* company = store.find_company(company_id)) {
        if (company->incorporation_date && *company->incorporation_date <= as_of) {
            out.company_age_years = years_between(*company->incorporation_date, as_of);
        }
    }
    auto it = store.financials_by_company.find(company_id);
    if (it == store.financials_by_company.end()) return out;
    const int cutoff = usable_year_cutoff(as_of);
    std::map<int, const FinancialRow*> by_year;
    for (std::size_t idx : it->second) {
        const FinancialRow& row = store.financials[idx];
        if (row.year <= cutoff) by_year[row.year] = &row;
    }
    if (by_year.empty()) return out;
    const int t = by_year.rbegin()->first;
    const FinancialRow& latest = *by_year.rbegin()->second;
    out.turnover = latest.turnover;
    out.ebitda = latest.ebitda;
    out.ebitda_margin = latest.ebitda_margin;
    out.shareholder_funds = latest.shareholder_funds;
    out.employees = latest.employees;
    out.liquidity = latest.liquidity;
    out.rose = latest.rose;
    out.profit_margin = latest.profit_margin;
    out.asset_turnover = latest.asset_turnover;
    out.long_term_liabilities = latest.long_term_liabilities;
    auto prev = by_year.find(t - 1);
    if (prev != by_year.end() && latest.turnover && prev->second->turnover &&
        *prev->second->turnover != 0.0) {
        out.turnover_growth =
            (*latest.turnover - *prev->second->turnover) / std::fabs(*prev->second->turnover);
    }
    for (int year = t; year > t - 3; --year) {
        auto row = by_year.find(year);
        if (row == by_year.end()) continue;
        if (row->second->ebitda) {
            out.min_ebitda = out.min_ebitda ? std::min(*out.min_ebitda, *row->second->ebitda)
                                            : *row->second->ebitda;
        }
        if (row->second->ebitda_margin) {
            out.min_ebitda_margin = out.min_ebitda_margin
                                        ? std::min(*out.min_ebitda_margin, *row->second->ebitda_margin)
                                        : *row->second->ebitda_margin;
        }
    }
    return out;
}

namespace {

constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

double opt_val(const std::optional<double>& v) { return v ? *v : kMissing; }
double opt_slog(const std::optional<double>& v) { return v ? signed_log(*v) : kMissing; }

struct ColumnSpec {
    const char* name;
    int group;            // 0 financial, 1 director
    bool can_be_missing;  // gets a *_missing indicator
};

// Canonical column order. The three ftse_* columns one-hot encode the
// FTSE-experience bucket {0, 1, 2, >=3}; bucket 0 is all-zero.
constexpr ColumnSpec kColumns[] = {
    {"company_age_log", 0, true},
    {"turnover_log", 0, true},
    {"turnover_growth", 0, true},
    {"ebitda", 0, true},
    {"ebitda_margin", 0, true},
    {"shareholder_funds", 0, true},
    {"employees", 0, true},
    {"liquidity_log", 0, true},
    {"rose", 0, true},
    {"profit_margin", 0, true},
    {"asset_turnover_log", 0, true},
    {"long_term_liabilities", 0, true},
    {"min_ebitda", 0, true},
    {"min_ebitda_margin", 0, true},
    {"n_active_directors", 1, false},
    {"n_director_roles_log", 1, false},
    {"avg_tenure", 1, true},
    {"avg_age_at_appointment_log", 1, true},
    {"n_previous_companies_log", 1, true},
    {"experience_in_company_log", 1, true},
    {"avg_experience_at_appointment_log", 1, true},
    {"ftse_1", 1, false},
    {"ftse_2", 1, false},
    {"ftse_3plus", 1, false},
    {"prior_pe_deal", 0, false},
};
constexpr std::size_t kBaseColumns = sizeof(kColumns) / sizeof(kColumns[0]);

}  // namespace

AssembleResult assemble_dataset(const RecordStore& store,
                                const std::vector<ingest::MatchedCompany>& matched,
                                const std::unordered_set<std::string>& accepted_company_ids,
                                const AssembleOptions& options) {
    Date snapshot;
    if (options.snapshot_date) {
        snapshot = *options.snapshot_date;
    } else {
        int latest_year = 0;
        for (const auto& row : store.financials) latest_year = std::max(latest_year, row.year);
        if (latest_year == 0) throw std::runtime_error("no financial rows; cannot infer snapshot date");
        snapshot = Date::from_ymd(latest_year, 12, 31);
    }

    // Positive rows: latest matched deal date per company; a strictly
    // earlier accepted deal sets the prior-deal dummy.
    std::unordered_map<std::string, Date> positive_as_of;
    std::unordered_map<std::string, bool> has_prior;
    for (const auto& m : matched) {
        auto it = positive_as_of.find(m.company_id);
        if (it == positive_as_of.end()) {
            positive_as_of.emplace(m.company_id, m.deal_date);
            has_prior[m.company_id] = false;
        } else if (it->second < m.deal_date) {
            it->second = m.deal_date;
            has_prior[m.company_id] = true;
        } else if (m.deal_date < it->second) {
            has_prior[m.company_id] = true;
        }
    }

    const OfficerIndex index = OfficerIndex::build(store);

    Dataset ds;
    for (const auto& col : kColumns) {
        ds.feature_names.push_back(col.name);
        ds.feature_group.push_back(col.group);
    }
    if (options.policy.add_missing_indicators) {
        for (const auto& col : kColumns) {
            if (!col.can_be_missing) continue;
            ds.feature_names.push_back(std::string(col.name) + "_missing");
            ds.feature_group.push_back(col.group);
        }
    }

    // Row set: skip companies that were accepted by linkage but removed
    // by dedupe/trim; they are neither clean positives nor negatives.
    std::vector<std::size_t> companies;
    companies.reserve(store.companies.size());
    for (std::size_t c = 0; c < store.companies.size(); ++c) {
        const std::string& id = store.companies[c].company_id;
        if (accepted_company_ids.count(id) && !positive_as_of.count(id)) continue;
        companies.push_back(c);
    }

    const std::size_t d = ds.feature_names.size();
    ds.x.assign(companies.size() * d, kMissing);
    ds.ids.resize(companies.size());
    ds.y.resize(companies.size());

    parallel_chunks(companies.size(), options.threads, [&](std::size_t begin, std::size_t end,
                                                           std::size_t) {
        std::vector<double> row(kBaseColumns);
        for (std::size_t r = begin; r < end; ++r) {
            const CompanyRecord& company = store.companies[companies[r]];
            const auto pos = positive_as_of.find(company.company_id);
            const bool label = pos != positive_as_of.end();
            const Date as_of = label ? pos->second : snapshot;

            const FinancialFeatureSet fin = financial_features(store, company.company_id, as_of);
            const DirectorFeatureSet dir = director_features(store, index, company.company_id, as_of);

            row[0] = fin.company_age_years ? signed_log(std::max(0.0, *fin.company_age_years))
                                           : kMissing;
            row[1] = opt_slog(fin.turnover);
            row[2] = opt_val(fin.turnover_growth);
            row[3] = opt_val(fin.ebitda);
            row[4] = opt_val(fin.ebitda_margin);
            row[5] = opt_val(fin.shareholder_funds);
            row[6] = opt_val(fin.employees);
            row[7] = opt_slog(fin.liquidity);
            row[8] = opt_val(fin.rose);
            row[9] = opt_val(fin.profit_margin);
            row[10] = opt_slog(fin.asset_turnover);
            row[11] = opt_val(fin.long_term_liabilities);
            row[12] = opt_val(fin.min_ebitda);
            row[13] = opt_val(fin.min_ebitda_margin);
            row[14] = dir.n_active_directors;
            row[15] = signed_log(dir.n_distinct_roles);
            row[16] = opt_val(dir.avg_tenure_prior);
            row[17] = opt_slog(dir.avg_age_at_appointment);
            row[18] = opt_slog(dir.avg_previous_companies);
            row[19] = opt_slog(dir.cumulative_experience);
            row[20] = opt_slog(dir.avg_experience_at_appointment);
            const int bucket = static_cast<int>(dir.ftse_count);
            row[21] = bucket == 1 ? 1.0 : 0.0;
            row[22] = bucket == 2 ? 1.0 : 0.0;
            row[23] = bucket >= 3 ? 1.0 : 0.0;
            row[24] = (label && has_prior.at(company.company_id)) ? 1.0 : 0.0;

            double* out = &ds.x[r * d];
            std::copy(row.begin(), row.end(), out);
            if (options.policy.add_missing_indicators) {
                std::size_t j = kBaseColumns;
                for (std::size_t b = 0; b < kBaseColumns; ++b) {
                    if (!kColumns[b].can_be_missing) continue;
                    out[j++] = std::isnan(row[b]) ? 1.0 : 0.0;
                }
            }
            ds.ids[r] = company.company_id;
            ds.y[r] = label ? 1 : 0;
        }
    });

    return {std::move(ds), snapshot};
}

}  // namespace dealscope::features
