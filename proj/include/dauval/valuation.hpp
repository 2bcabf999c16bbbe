#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "dauval/error.hpp"
#include "dauval/parallel.hpp"
#include "dauval/revenue.hpp"
#include "dauval/scenario.hpp"
#include "dauval/stats.hpp"

namespace dauval {

/// Market value at IPO, USD (100M shares sold at $10, 699M shares outstanding).
inline constexpr double kIpoValueUsd = 6.9e9;

/// How a profit accrued on day d (d = 1 .. 365 * horizon) is discounted.
enum class Discounting {
    /// (1 + rate)^ceil(d / 365): each year's accrual discounted as one year-end cash flow.
    year_end,
    /// (1 + rate)^(d / 365): every day discounted at its own fractional year.
    daily,
};

struct ValuationConfig {
    double profit_margin = 0.15;
    double discount_rate = 0.05; // per year
    int horizon_years = 20;
    Discounting discounting = Discounting::year_end;
    std::size_t threads = 1;

    std::size_t horizon_days() const { return static_cast<std::size_t>(horizon_years) * kDaysPerYear; }

    void validate() const {
        if (!(profit_margin > 0.0 && profit_margin <= 1.0)) throw ArgumentError("profit margin must be in (0, 1]");
        if (!(discount_rate >= 0.0) || !std::isfinite(discount_rate))
            throw ArgumentError("discount rate must be >= 0");
        if (horizon_years < 1) throw ArgumentError("valuation horizon must be >= 1 year");
    }
};

/// Discounted revenue per user for each day offset 1 .. horizon (index 0 unused, always 0):
/// weight[d] = r(present + d) / 365 / discount(d). Value = margin * sum(weight[d] * dau[d]).
inline std::vector<double> cashflow_weights(const RevenueCurve& revenue, Date present, const ValuationConfig& cfg) {
    cfg.validate();
    const std::size_t days = cfg.horizon_days();
    std::vector<double> w(days + 1, 0.0);
    const double growth = 1.0 + cfg.discount_rate;
    for (std::size_t d = 1; d <= days; ++d) {
        const double years = cfg.discounting == Discounting::year_end
                                 ? std::ceil(static_cast<double>(d) / kDaysPerYear)
                                 : static_cast<double>(d) / kDaysPerYear;
        w[d] = revenue.at(present + static_cast<std::int64_t>(d)) / kDaysPerYear / std::pow(growth, years);
    }
    return w;
}

inline double value_with_weights(const Scenario& scenario, const std::vector<double>& weights, double margin) {
    if (scenario.dau.size() < weights.size())
        throw ArgumentError("scenario " + std::to_string(scenario.scenario_id) + " spans " +
                            std::to_string(scenario.dau.size() - 1) + " days, valuation needs " +
                            std::to_string(weights.size() - 1));
    double sum = 0.0;
    for (std::size_t d = 1; d < weights.size(); ++d) sum += weights[d] * scenario.dau[d];
    return margin * sum;
}

/// Discounted profits of one scenario: sum over days of r/365 * DAU * margin, discounted.
inline double value_scenario(const Scenario& scenario, const RevenueCurve& revenue, const ValuationConfig& cfg) {
    return value_with_weights(scenario, cashflow_weights(revenue, scenario.dau.start_day(), cfg), cfg.profit_margin);
}

struct ValuationDistribution {
    std::vector<double> scenario_values;
    double median = 0.0;
    double ci95_lower = 0.0;
    double ci95_upper = 0.0;
    double mean = 0.0;
};

/// Median, mean and two-sided 95% interval (2.5% / 97.5% linear-interpolation percentiles).
inline ValuationDistribution summarize(std::vector<double> values) {
    if (values.empty()) throw ArgumentError("valuation distribution of no scenarios");
    ValuationDistribution dist;
    dist.scenario_values = std::move(values);
    std::vector<double> sorted = dist.scenario_values;
    std::sort(sorted.begin(), sorted.end());
    dist.median = stats::quantile_sorted(sorted, 0.5);
    dist.ci95_lower = stats::quantile_sorted(sorted, 0.025);
    dist.ci95_upper = stats::quantile_sorted(sorted, 0.975);
    dist.mean = stats::mean(sorted);
    return dist;
}

inline ValuationDistribution value_ensemble(const std::vector<Scenario>& scenarios, const RevenueCurve& revenue,
                                            const ValuationConfig& cfg) {
    if (scenarios.empty()) throw ArgumentError("value_ensemble: no scenarios");
    const Date present = scenarios.front().dau.start_day();
    for (const auto& s : scenarios)
        if (s.dau.start_day() != present) throw ArgumentError("value_ensemble: scenarios start on different dates");
    const auto weights = cashflow_weights(revenue, present, cfg);
    std::vector<double> values(scenarios.size());
    parallel_for(scenarios.size(), cfg.threads,
                 [&](std::size_t i) { values[i] = value_with_weights(scenarios[i], weights, cfg.profit_margin); });
    return summarize(std::move(values));
}

/// Fraction of scenario values >= threshold.
inline double probability_exceeds(const ValuationDistribution& dist, double threshold) {
    if (dist.scenario_values.empty()) throw ArgumentError("probability_exceeds: empty distribution");
    const auto n = std::count_if(dist.scenario_values.begin(), dist.scenario_values.end(),
                                 [&](double v) { return v >= threshold; });
    return static_cast<double>(n) / static_cast<double>(dist.scenario_values.size());
}

} // namespace dauval
