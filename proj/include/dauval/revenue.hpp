#pragma once

#include <algorithm>
#include <fstream>
#include <istream>
#include <string>
#include <vector>

#include "dauval/csv.hpp"
#include "dauval/date.hpp"
#include "dauval/error.hpp"
#include "dauval/logistic.hpp"
#include "dauval/timeseries.hpp"

namespace dauval {

struct QuarterlyRevenue {
    Date quarter_end;
    double revenue = 0.0; // USD
};

struct AnnualRevenue {
    Date quarter_end;
    double revenue = 0.0; // USD, four trailing quarters
};

/// Revenue per DAU curve anchored at a calendar date.
struct RevenueCurve {
    LogisticParams params;
    Date origin;

    /// USD per DAU per year on `d`.
    double at(Date d) const { return logistic_value(params, static_cast<double>(d - origin)); }
};

struct RevenueScenarios {
    LogisticParams base;
    LogisticParams high;
    LogisticParams extreme;
    Date origin;
    double k80 = 0.0; // raw bootstrap quantiles, before ordering is enforced
    double k95 = 0.0;

    RevenueCurve curve(const LogisticParams& p) const { return {p, origin}; }
};

inline constexpr std::int64_t kQuarterDays = 91;
inline constexpr std::int64_t kQuarterSlack = 7;
inline constexpr std::int64_t kYearDays = 365;

inline void validate_quarters(const std::vector<QuarterlyRevenue>& quarters) {
    for (std::size_t i = 0; i < quarters.size(); ++i) {
        if (!(quarters[i].revenue >= 0.0))
            throw ValidationError("quarter ending " + quarters[i].quarter_end.iso() + " has negative revenue");
        if (i == 0) continue;
        const auto gap = quarters[i].quarter_end - quarters[i - 1].quarter_end;
        if (gap < kQuarterDays - kQuarterSlack || gap > kQuarterDays + kQuarterSlack)
            throw ValidationError("quarters ending " + quarters[i - 1].quarter_end.iso() + " and " +
                                  quarters[i].quarter_end.iso() + " are " + std::to_string(gap) +
                                  " days apart, not consecutive");
    }
}

/// R_i = R^q_{i-3} + R^q_{i-2} + R^q_{i-1} + R^q_i for every quarter from the fourth on.
inline std::vector<AnnualRevenue> trailing_annual_revenue(const std::vector<QuarterlyRevenue>& quarters) {
    if (quarters.size() < 4)
        throw ValidationError("trailing annual revenue needs >= 4 quarters, got " + std::to_string(quarters.size()));
    validate_quarters(quarters);
    std::vector<AnnualRevenue> out;
    out.reserve(quarters.size() - 3);
    for (std::size_t i = 3; i < quarters.size(); ++i)
        out.push_back({quarters[i].quarter_end, quarters[i - 3].revenue + quarters[i - 2].revenue +
                                                    quarters[i - 1].revenue + quarters[i].revenue});
    return out;
}

/// r_i = R_i / mean DAU over the 365 days ending on (and including) each quarter end.
/// Points are timed in days since the first annual point.
inline std::vector<TimePoint> revenue_per_dau(const std::vector<AnnualRevenue>& annual, const DailySeries& dau) {
    std::vector<TimePoint> out;
    out.reserve(annual.size());
    for (const auto& a : annual) {
        const Date first = a.quarter_end - (kYearDays - 1);
        if (first < dau.start_day() || a.quarter_end > dau.last_day())
            throw CoverageError("DAU series " + dau.start_day().iso() + ".." + dau.last_day().iso() +
                                " does not cover the year " + first.iso() + ".." + a.quarter_end.iso());
        double sum = 0.0;
        for (Date d = first; d <= a.quarter_end; d = d + 1) sum += dau.at(d);
        const double mean = sum / static_cast<double>(kYearDays);
        if (!(mean > 0.0)) throw DegenerateInputError("mean DAU is zero for the year ending " + a.quarter_end.iso());
        out.push_back({static_cast<double>(a.quarter_end - annual.front().quarter_end), a.revenue / mean});
    }
    return out;
}

inline constexpr double kHighGrowthLevel = 0.80;
inline constexpr double kExtremeGrowthLevel = 0.95;

/// Base case: unconstrained logistic fit. High and extreme growth: refit with K pinned at
/// the 80% and 95% one-sided bootstrap upper values of K. Both quantiles come from one
/// bootstrap distribution; each pinned K is floored at the previous case's K so the
/// ordering base <= high <= extreme always holds.
inline RevenueScenarios build_scenarios(const std::vector<TimePoint>& points, Date origin, std::uint64_t seed,
                                        std::size_t n_resamples = 1000, std::size_t threads = 1) {
    RevenueScenarios s;
    s.origin = origin;
    s.base = fit_logistic(points);
    const auto ks = bootstrap_carrying_capacity(points, s.base, n_resamples, seed, threads);
    s.k80 = stats::quantile_sorted(ks, kHighGrowthLevel);
    s.k95 = stats::quantile_sorted(ks, kExtremeGrowthLevel);

    const double y_max = detail::max_y(points);
    auto pinned = [&](double k, const LogisticParams& floor) {
        if (k <= floor.K || k <= y_max) return floor;
        return fit_logistic_fixed_k(points, k);
    };
    s.high = pinned(s.k80, s.base);
    s.extreme = pinned(s.k95, s.high);
    return s;
}

inline constexpr std::string_view kFinancialsHeader = "quarter_end,revenue_usd";

/// Reads the financials CSV contract; rows are sorted by date and checked for consecutiveness.
inline std::vector<QuarterlyRevenue> load_financials(std::istream& in) {
    csv::Reader reader(in);
    reader.expect_header(kFinancialsHeader);
    std::vector<QuarterlyRevenue> out;
    std::string line;
    while (reader.next(line)) {
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 2) throw ParseError("expected 2 fields, got " + std::to_string(f.size()), reader.line_no());
        QuarterlyRevenue q;
        try {
            q.quarter_end = Date::parse(csv::trim(f[0]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), reader.line_no());
        }
        const auto v = csv::parse_double(f[1]);
        if (!v) throw ParseError("unparseable revenue '" + std::string(f[1]) + "'", reader.line_no());
        q.revenue = *v;
        out.push_back(q);
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.quarter_end < b.quarter_end; });
    for (std::size_t i = 1; i < out.size(); ++i)
        if (out[i].quarter_end == out[i - 1].quarter_end)
            throw ValidationError("duplicate quarter " + out[i].quarter_end.iso());
    validate_quarters(out);
    return out;
}

inline std::vector<QuarterlyRevenue> load_financials(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open financials file '" + path + "'");
    return load_financials(in);
}

inline void write_financials(std::ostream& out, const std::vector<QuarterlyRevenue>& quarters) {
    std::string buf(kFinancialsHeader);
    buf += '\n';
    for (const auto& q : quarters) {
        buf += q.quarter_end.iso();
        buf += ',';
        csv::append(buf, q.revenue);
        buf += '\n';
    }
    out << buf;
}

} // namespace dauval
