#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <vector>

#include "dauval/csv.hpp"
#include "dauval/date.hpp"
#include "dauval/error.hpp"
#include "dauval/parallel.hpp"
#include "dauval/random.hpp"
#include "dauval/stats.hpp"
#include "dauval/tailfit.hpp"
#include "dauval/timeseries.hpp"

namespace dauval {

inline constexpr std::int64_t kDaysPerYear = 365;

struct SimulationConfig {
    std::int64_t tau = 53;        // days between simulated launches
    int horizon_years = 20;
    std::size_t n_scenarios = 1000;
    std::uint64_t seed = 0;
    Date present;                 // last observed date; scenario day offset 0
    std::vector<GameTemplate> templates;
    std::size_t threads = 1;      // 0 = hardware concurrency

    std::size_t horizon_days() const { return static_cast<std::size_t>(horizon_years) * kDaysPerYear; }

    void validate() const {
        if (templates.empty()) throw ArgumentError("simulation needs at least one game template");
        if (tau < 1) throw ArgumentError("tau must be >= 1 day");
        if (horizon_years < 1) throw ArgumentError("horizon_years must be >= 1");
        if (n_scenarios < 1) throw ArgumentError("n_scenarios must be >= 1");
        for (const auto& t : templates)
            if (t.record.launch_date > present)
                throw ArgumentError("game '" + t.record.game_id + "' launches after the present date");
    }
};

/// One simulated aggregate DAU path; dau[k] is the value at present + k, k = 0 .. horizon.
struct Scenario {
    std::size_t scenario_id = 0;
    DailySeries dau;
};

/// Mean gap between distinct launch dates, (last - first) / (n - 1), rounded, at least 1.
inline std::int64_t estimate_tau(const std::vector<GameTemplate>& templates) {
    std::set<Date> launches;
    for (const auto& t : templates) launches.insert(t.record.launch_date);
    if (launches.size() < 2) throw InsufficientDataError("estimate_tau needs >= 2 distinct launch dates");
    const double span = static_cast<double>(*launches.rbegin() - *launches.begin());
    return std::max<std::int64_t>(1, std::llround(span / static_cast<double>(launches.size() - 1)));
}

/// Precomputed per-template trajectories shared by every scenario of an ensemble.
class ScenarioEngine {
public:
    explicit ScenarioEngine(const SimulationConfig& config) : config_(config) {
        config_.validate();
        const std::size_t days = config_.horizon_days() + 1;
        existing_.assign(days, 0.0);
        for (const auto& t : config_.templates) {
            const auto age0 = config_.present - t.record.launch_date;
            for (std::size_t d = 0; d < days; ++d) existing_[d] += t.value_at_age(age0 + static_cast<std::int64_t>(d));
            trajectories_.push_back(t.trajectory(days));
        }
    }

    const SimulationConfig& config() const noexcept { return config_; }

    /// Contribution of the games already live at present, decaying forward.
    const std::vector<double>& existing() const noexcept { return existing_; }

    /// Launch offsets tau, 2 tau, ... within the horizon.
    std::vector<std::size_t> launch_offsets() const {
        std::vector<std::size_t> out;
        const auto tau = static_cast<std::size_t>(config_.tau);
        for (std::size_t s = tau; s <= config_.horizon_days(); s += tau) out.push_back(s);
        return out;
    }

    /// Template index launched at each offset; draw k is the k-th value of stream (seed, id).
    std::vector<std::size_t> launch_draws(std::size_t scenario_id) const {
        CounterStream rng(config_.seed, scenario_id);
        const auto n = launch_offsets().size();
        std::vector<std::size_t> draws(n);
        for (auto& d : draws) d = static_cast<std::size_t>(rng.below(config_.templates.size()));
        return draws;
    }

    /// Existing games plus the given launches, each replayed from age 0 at its offset.
    DailySeries superpose(const std::vector<std::size_t>& draws) const {
        std::vector<double> dau = existing_;
        const auto offsets = launch_offsets();
        for (std::size_t k = 0; k < draws.size() && k < offsets.size(); ++k) {
            const auto& traj = trajectories_.at(draws[k]);
            for (std::size_t d = offsets[k], a = 0; d < dau.size(); ++d, ++a) dau[d] += traj[a];
        }
        return DailySeries(config_.present, std::move(dau));
    }

    Scenario simulate(std::size_t scenario_id) const { return {scenario_id, superpose(launch_draws(scenario_id))}; }

private:
    SimulationConfig config_;
    std::vector<double> existing_;
    std::vector<std::vector<double>> trajectories_;
};

inline Scenario simulate_scenario(const SimulationConfig& config, std::size_t scenario_id) {
    return ScenarioEngine(config).simulate(scenario_id);
}

/// Scenarios 0 .. n-1. Identical for any thread count.
inline std::vector<Scenario> run_ensemble(const SimulationConfig& config) {
    const ScenarioEngine engine(config);
    std::vector<std::optional<Scenario>> slots(config.n_scenarios);
    parallel_for(config.n_scenarios, config.threads, [&](std::size_t i) { slots[i] = engine.simulate(i); });
    std::vector<Scenario> out;
    out.reserve(slots.size());
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// ---- exports ---------------------------------------------------------------------------

inline constexpr std::string_view kScenarioHeader = "scenario_id,day_offset,dau";
inline constexpr std::string_view kBandHeader = "day_offset,p2.5,p25,p50,p75,p97.5";
inline constexpr std::array<double, 5> kBandLevels{0.025, 0.25, 0.50, 0.75, 0.975};

inline void write_scenarios(std::ostream& out, const std::vector<Scenario>& scenarios) {
    std::string buf(kScenarioHeader);
    buf += '\n';
    for (const auto& s : scenarios) {
        for (std::size_t d = 0; d < s.dau.size(); ++d) {
            csv::append(buf, static_cast<std::int64_t>(s.scenario_id));
            buf += ',';
            csv::append(buf, static_cast<std::int64_t>(d));
            buf += ',';
            csv::append(buf, s.dau[d]);
            buf += '\n';
        }
        if (buf.size() > (1u << 20)) {
            out << buf;
            buf.clear();
        }
    }
    out << buf;
}

/// Reads `scenario_id,day_offset,dau`; each scenario must list offsets 0, 1, 2, ... in order.
inline std::vector<Scenario> read_scenarios(std::istream& in, Date present) {
    csv::Reader reader(in);
    reader.expect_header(kScenarioHeader);
    std::vector<Scenario> out;
    std::vector<double> values;
    std::int64_t current = -1;
    auto flush = [&] {
        if (current >= 0) out.push_back({static_cast<std::size_t>(current), DailySeries(present, std::move(values))});
        values = {};
    };
    std::string line;
    while (reader.next(line)) {
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 3) throw ParseError("expected 3 fields, got " + std::to_string(f.size()), reader.line_no());
        const auto id = csv::parse_int(f[0]);
        const auto day = csv::parse_int(f[1]);
        const auto dau = csv::parse_double(f[2]);
        if (!id || !day || !dau || *id < 0) throw ParseError("unparseable scenario row", reader.line_no());
        if (*id != current) {
            flush();
            current = *id;
        }
        if (*day != static_cast<std::int64_t>(values.size()))
            throw ParseError("scenario " + std::to_string(*id) + ": expected day_offset " +
                                 std::to_string(values.size()),
                             reader.line_no());
        if (*dau < 0.0) throw ValidationError("line " + std::to_string(reader.line_no()) + ": negative dau");
        values.push_back(*dau);
    }
    flush();
    if (out.empty()) throw ValidationError("scenario file contains no scenarios");
    for (const auto& s : out)
        if (s.dau.size() != out.front().dau.size())
            throw ValidationError("scenarios have different lengths");
    return out;
}

/// Per-day percentiles across scenarios (linear interpolation), columns as kBandHeader.
inline void write_band(std::ostream& out, const std::vector<Scenario>& scenarios) {
    if (scenarios.empty()) throw ArgumentError("band of an empty ensemble");
    const std::size_t days = scenarios.front().dau.size();
    std::string buf(kBandHeader);
    buf += '\n';
    std::vector<double> column(scenarios.size());
    for (std::size_t d = 0; d < days; ++d) {
        for (std::size_t i = 0; i < scenarios.size(); ++i) column[i] = scenarios[i].dau[d];
        std::sort(column.begin(), column.end());
        csv::append(buf, static_cast<std::int64_t>(d));
        for (double q : kBandLevels) {
            buf += ',';
            csv::append(buf, stats::quantile_sorted(column, q));
        }
        buf += '\n';
    }
    out << buf;
}

} // namespace dauval
