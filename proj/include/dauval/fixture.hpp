#pragma once

// Synthetic catalog + financials with known ground truth, for desk-scale runs of the
// whole pipeline without proprietary data.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "dauval/date.hpp"
#include "dauval/logistic.hpp"
#include "dauval/random.hpp"
#include "dauval/revenue.hpp"
#include "dauval/timeseries.hpp"

namespace dauval {

struct FixtureConfig {
    std::size_t games = 20;
    std::uint64_t seed = 0;
    std::int64_t tau = 53;             // days between launches
    Date start{2009, 1, 1};            // first launch
    std::int64_t tail_after_last = 240; // observed days after the last launch
    std::int64_t min_span = 1100;      // observed days from the first launch, at least
    double dau_noise = 0.02;           // lognormal sigma on daily values
    double revenue_noise = 0.03;       // lognormal sigma on quarterly revenue
    LogisticParams revenue_truth{33.0, 0.005, 8.0};
};

struct FixtureGame {
    std::string game_id;
    Date launch_date;
    std::int64_t peak_age = 0;
    double peak_dau = 0.0;
    double amplitude = 0.0; // decay A for ages >= peak_age
    double gamma = 0.0;
};

struct Fixture {
    FixtureConfig config;
    std::vector<FixtureGame> games;
    Catalog catalog;
    std::vector<QuarterlyRevenue> quarters;
    Date revenue_origin; // t = 0 of revenue_truth, the fourth quarter end
    Date present;
};

inline Date quarter_end_on_or_after(Date d) {
    const auto ymd = d.ymd();
    const unsigned m = static_cast<unsigned>(ymd.month());
    const unsigned q_end_month = ((m - 1) / 3 + 1) * 3;
    const auto last = std::chrono::year_month_day_last{ymd.year(), std::chrono::month_day_last{std::chrono::month{q_end_month}}};
    return Date(std::chrono::sys_days{last});
}

/// Each game ramps linearly from 20% of its peak to the peak, then decays exactly as
/// A * age^-gamma; daily values carry multiplicative lognormal noise. Launches are every
/// `tau` days. Quarterly revenue integrates revenue_truth(t) / 365 * aggregate DAU.
inline Fixture make_fixture(const FixtureConfig& cfg) {
    if (cfg.games == 0) throw ArgumentError("fixture needs at least one game");
    if (cfg.tau < 1) throw ArgumentError("fixture tau must be >= 1");
    Fixture fx;
    fx.config = cfg;
    // small catalogs still cover enough quarters for a revenue fit
    fx.present = cfg.start + std::max(static_cast<std::int64_t>(cfg.games - 1) * cfg.tau + cfg.tail_after_last,
                                      cfg.min_span);

    for (std::size_t g = 0; g < cfg.games; ++g) {
        CounterStream rng(cfg.seed, g);
        FixtureGame game;
        char id[32];
        std::snprintf(id, sizeof id, "game%02zu", g + 1);
        game.game_id = id;
        game.launch_date = cfg.start + static_cast<std::int64_t>(g) * cfg.tau;
        game.peak_age = 15 + static_cast<std::int64_t>(rng.below(21));
        game.peak_dau = 2e5 * std::exp(rng.uniform() * std::log(50.0));
        game.gamma = 0.6 + rng.uniform();
        game.amplitude = game.peak_dau * std::pow(static_cast<double>(game.peak_age), game.gamma);

        const auto days = static_cast<std::size_t>(fx.present - game.launch_date) + 1;
        std::vector<double> values(days);
        for (std::size_t a = 0; a < days; ++a) {
            const double age = static_cast<double>(a);
            const double clean = static_cast<std::int64_t>(a) < game.peak_age
                                     ? game.peak_dau * (0.2 + 0.8 * age / static_cast<double>(game.peak_age))
                                     : game.amplitude * std::pow(age, -game.gamma);
            values[a] = clean * std::exp(cfg.dau_noise * rng.normal());
        }
        fx.catalog.emplace_back(game.game_id, game.launch_date, DailySeries(game.launch_date, std::move(values)));
        fx.games.push_back(std::move(game));
    }

    const auto dau = aggregate_catalog(fx.catalog);
    CounterStream rng(cfg.seed, 0xf1a7c1a1ULL);
    Date q_begin = cfg.start;
    std::vector<Date> ends;
    for (Date e = quarter_end_on_or_after(cfg.start); e <= fx.present; e = quarter_end_on_or_after(e + 1)) ends.push_back(e);
    if (ends.size() < 4) throw ArgumentError("fixture spans fewer than four quarters; add games or days");
    fx.revenue_origin = ends[3];
    for (Date e : ends) {
        double revenue = 0.0;
        for (Date d = q_begin; d <= e; d = d + 1)
            revenue += logistic_value(cfg.revenue_truth, static_cast<double>(d - fx.revenue_origin)) / 365.0 * dau.at(d);
        fx.quarters.push_back({e, revenue * std::exp(cfg.revenue_noise * rng.normal())});
        q_begin = e + 1;
    }
    return fx;
}

} // namespace dauval
