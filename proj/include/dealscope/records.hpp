#pragma once

#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "dealscope/date.hpp"

namespace dealscope {

struct CompanyRecord {
    std::string company_id;
    std::string name;
    std::string city;
    std::optional<Date> incorporation_date;
    bool is_parent = false;
    bool is_ftse = false;
};

// One filed year of accounts. All monetary fields are optional; a
// missing value stays missing through the whole pipeline.
struct FinancialRow {
    std::string company_id;
    int year = 0;
    std::optional<double> turnover;
    std::optional<double> ebitda;
    std::optional<double> ebitda_margin;
    std::optional<double> shareholder_funds;
    std::optional<double> employees;
    std::optional<double> liquidity;
    std::optional<double> rose;          // return on shareholder equity
    std::optional<double> profit_margin;
    std::optional<double> asset_turnover;
    std::optional<double> long_term_liabilities;
};

struct OfficerAppointment {
    std::string officer_id;
    std::string company_id;
    std::string role;
    std::optional<Date> appointed_on;
    std::optional<Date> resigned_on;  // open appointment when absent
    std::optional<int> birth_year;
    bool is_institutional = false;
};

// Deal value: either an exact amount or a disclosed band (lo, hi), or
// unknown. Bands come from strings like "n/d (25 - 50m)".
struct DealValue {
    std::optional<double> amount;
    std::optional<std::pair<double, double>> band;
    bool known() const { return amount.has_value() || band.has_value(); }
};

struct DealRecord {
    std::string deal_name;
    Date deal_date{};
    std::string country;
    std::string region;
    std::string city;
    DealValue value;
    std::string industry;
    std::string equity_lead;
};

struct RecordStore {
    std::vector<CompanyRecord> companies;
    std::vector<FinancialRow> financials;
    std::vector<OfficerAppointment> officers;
    std::vector<DealRecord> deals;

    std::unordered_map<std::string, std::size_t> company_index;  // company_id -> companies[]
    std::unordered_map<std::string, std::vector<std::size_t>> financials_by_company;
    std::unordered_map<std::string, std::vector<std::size_t>> officers_by_company;

    void rebuild_indexes();
    const CompanyRecord* find_company(const std::string& company_id) const;
};

}  // namespace dealscope
