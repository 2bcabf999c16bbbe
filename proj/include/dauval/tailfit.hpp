#pragma once

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "dauval/csv.hpp"
#include "dauval/error.hpp"
#include "dauval/stats.hpp"
#include "dauval/timeseries.hpp"

namespace dauval {

/// f(t) = amplitude * t^-gamma, t in days since launch, fitted from t_min onward.
struct PowerLawTail {
    std::int64_t t_min = 1;
    double amplitude = 1.0;
    double gamma = 1.0;
    double r_squared = 0.0;

    double operator()(double t) const { return amplitude * std::pow(t, -gamma); }
};

/// A replayable game: observed trajectory verbatim, then a decaying tail scaled to meet the
/// last observation. Without a tail (explicit flat fallback) the last observed value persists.
struct GameTemplate {
    GameRecord record;
    std::optional<PowerLawTail> tail;
    double handoff_scale = 1.0;

    std::int64_t first_observed_age() const { return record.age_of_index(0); }
    std::int64_t last_observed_age() const { return record.age_of_index(record.observed.size() - 1); }

    /// DAU at game age `age` (days since launch). Zero before the first observation.
    double value_at_age(std::int64_t age) const {
        const auto lead = first_observed_age();
        if (age < lead) return 0.0;
        const auto i = static_cast<std::size_t>(age - lead);
        if (i < record.observed.size()) return record.observed[i];
        if (!tail) return record.observed.values().back();
        return handoff_scale * (*tail)(static_cast<double>(age));
    }

    /// Values for ages 0 .. n-1.
    std::vector<double> trajectory(std::size_t n) const {
        std::vector<double> out(n);
        for (std::size_t a = 0; a < n; ++a) out[a] = value_at_age(static_cast<std::int64_t>(a));
        return out;
    }
};

inline constexpr std::size_t kSmoothingWindow = 7;
inline constexpr std::size_t kMinSeriesForOnset = 14;
inline constexpr std::size_t kMinTailPoints = 10;

/// Decay onset: game age of the maximum of the 7-day centered moving average.
/// Only days with a full window and age >= 1 are eligible; ties resolve to the earliest day.
inline std::int64_t detect_tmin(const GameRecord& record) {
    const auto& v = record.observed.values();
    if (v.size() < kMinSeriesForOnset)
        throw InsufficientDataError("game '" + record.game_id + "': " + std::to_string(v.size()) +
                                    " observed days, onset detection needs " + std::to_string(kMinSeriesForOnset));
    constexpr std::size_t half = kSmoothingWindow / 2;
    std::optional<std::int64_t> best_age;
    double best = 0.0;
    for (std::size_t c = half; c + half < v.size(); ++c) {
        const auto age = record.age_of_index(c);
        if (age < 1) continue;
        // direct window sum: equal windows must compare equal for the tie rule
        double sum = 0.0;
        for (std::size_t k = c - half; k <= c + half; ++k) sum += v[k];
        if (!best_age || sum > best) {
            best = sum;
            best_age = age;
        }
    }
    if (!best_age) throw InsufficientDataError("game '" + record.game_id + "': no eligible day for onset detection");
    return *best_age;
}

/// OLS of log(DAU) on log(age) over ages >= t_min with DAU > 0.
inline PowerLawTail fit_power_law(const GameRecord& record, std::int64_t t_min) {
    if (t_min < 1) throw ArgumentError("fit_power_law: t_min must be >= 1");
    std::vector<double> lx, ly;
    std::size_t in_window = 0;
    for (std::size_t i = 0; i < record.observed.size(); ++i) {
        const auto age = record.age_of_index(i);
        if (age < t_min) continue;
        ++in_window;
        if (record.observed[i] > 0.0) {
            lx.push_back(std::log(static_cast<double>(age)));
            ly.push_back(std::log(record.observed[i]));
        }
    }
    if (lx.size() < kMinTailPoints || 2 * lx.size() < in_window)
        throw InsufficientDataError("game '" + record.game_id + "': " + std::to_string(lx.size()) +
                                    " positive tail points of " + std::to_string(in_window) + " from t_min=" +
                                    std::to_string(t_min));
    const auto fit = stats::ols(lx, ly);
    if (fit.slope >= 0.0)
        throw NoDecayError("game '" + record.game_id + "': tail slope " + csv::format(fit.slope) + " is not decaying",
                           fit.slope);
    return PowerLawTail{t_min, std::exp(fit.intercept), -fit.slope, fit.r_squared};
}

/// Attaches `tail` so that the first extrapolated day equals last_observed * f(t+1)/f(t).
inline GameTemplate make_template(GameRecord record, std::optional<PowerLawTail> tail) {
    GameTemplate tpl{std::move(record), tail, 1.0};
    if (tail) {
        const double t_last = static_cast<double>(tpl.last_observed_age());
        tpl.handoff_scale = tpl.record.observed.values().back() / (*tail)(std::max(t_last, 1.0));
    }
    return tpl;
}

/// detect_tmin + fit_power_law + make_template. With `allow_flat_fallback`, games whose tail
/// cannot be fitted keep their last observed value instead of failing.
inline GameTemplate fit_template(const GameRecord& record, bool allow_flat_fallback = false) {
    try {
        const auto t_min = detect_tmin(record);
        return make_template(record, fit_power_law(record, t_min));
    } catch (const InsufficientDataError&) {
        if (!allow_flat_fallback) throw;
    } catch (const NoDecayError&) {
        if (!allow_flat_fallback) throw;
    }
    return make_template(record, std::nullopt);
}

/// Observed values verbatim for the first observed-length days, then the scaled tail.
inline DailySeries extrapolate(const GameTemplate& tpl, std::size_t horizon_days) {
    const auto& obs = tpl.record.observed;
    if (horizon_days < obs.size())
        throw ArgumentError("extrapolate: horizon " + std::to_string(horizon_days) + " shorter than observed length " +
                            std::to_string(obs.size()));
    std::vector<double> out(obs.values());
    out.reserve(horizon_days);
    const auto lead = tpl.first_observed_age();
    for (std::size_t i = obs.size(); i < horizon_days; ++i)
        out.push_back(tpl.value_at_age(lead + static_cast<std::int64_t>(i)));
    return DailySeries(obs.start_day(), std::move(out));
}

// ---- tails CSV -------------------------------------------------------------------------

inline constexpr std::string_view kTailsHeader = "game_id,t_min,amplitude,gamma,r_squared,handoff_scale";

/// A flat-fallback template is written with gamma = 0, t_min = 0, amplitude = last value.
inline void write_tails(std::ostream& out, const std::vector<GameTemplate>& templates) {
    std::string buf(kTailsHeader);
    buf += '\n';
    for (const auto& t : templates) {
        buf += t.record.game_id;
        buf += ',';
        if (t.tail) {
            csv::append(buf, t.tail->t_min);
            buf += ',';
            csv::append(buf, t.tail->amplitude);
            buf += ',';
            csv::append(buf, t.tail->gamma);
            buf += ',';
            csv::append(buf, t.tail->r_squared);
        } else {
            buf += "0,";
            csv::append(buf, t.record.observed.values().back());
            buf += ",0,0";
        }
        buf += ',';
        csv::append(buf, t.handoff_scale);
        buf += '\n';
    }
    out << buf;
}

struct TailRow {
    std::string game_id;
    std::optional<PowerLawTail> tail;
    double handoff_scale = 1.0;
};

inline std::vector<TailRow> read_tails(std::istream& in) {
    csv::Reader reader(in);
    reader.expect_header(kTailsHeader);
    std::vector<TailRow> rows;
    std::string line;
    while (reader.next(line)) {
        if (csv::trim(line).empty()) continue;
        const auto f = csv::split(line);
        if (f.size() != 6) throw ParseError("expected 6 fields, got " + std::to_string(f.size()), reader.line_no());
        const auto t_min = csv::parse_int(f[1]);
        const auto amp = csv::parse_double(f[2]);
        const auto gamma = csv::parse_double(f[3]);
        const auto r2 = csv::parse_double(f[4]);
        const auto scale = csv::parse_double(f[5]);
        if (!t_min || !amp || !gamma || !r2 || !scale) throw ParseError("unparseable tail row", reader.line_no());
        TailRow row{std::string(csv::trim(f[0])), std::nullopt, *scale};
        if (*gamma != 0.0) {
            if (*gamma < 0.0 || *amp <= 0.0 || *t_min < 1 || *scale < 0.0)
                throw ValidationError("line " + std::to_string(reader.line_no()) + ": invalid power-law tail");
            row.tail = PowerLawTail{*t_min, *amp, *gamma, *r2};
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Re-attaches exported tails to their catalog records, in tails-file order.
inline std::vector<GameTemplate> templates_from_tails(const std::vector<TailRow>& rows, const Catalog& catalog) {
    std::map<std::string, const GameRecord*> by_id;
    for (const auto& g : catalog) by_id[g.game_id] = &g;
    std::vector<GameTemplate> out;
    out.reserve(rows.size());
    for (const auto& row : rows) {
        const auto it = by_id.find(row.game_id);
        if (it == by_id.end()) throw ValidationError("tails reference unknown game '" + row.game_id + "'");
        out.push_back(GameTemplate{*it->second, row.tail, row.tail ? row.handoff_scale : 1.0});
    }
    return out;
}

} // namespace dauval
