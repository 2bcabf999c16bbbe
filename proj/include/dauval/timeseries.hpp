#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dauval/csv.hpp"
#include "dauval/date.hpp"
#include "dauval/error.hpp"

namespace dauval {

/// Daily active users, one real value per consecutive calendar day.
class DailySeries {
public:
    DailySeries(Date start, std::vector<double> values) : start_(start), values_(std::move(values)) {
        if (values_.empty()) throw ValidationError("daily series must contain at least one day");
        for (std::size_t i = 0; i < values_.size(); ++i)
            if (!(values_[i] >= 0.0) || !std::isfinite(values_[i]))
                throw ValidationError("daily series value at " + (start_ + static_cast<std::int64_t>(i)).iso() +
                                      " is negative or not finite");
    }

    Date start_day() const noexcept { return start_; }
    Date last_day() const noexcept { return start_ + static_cast<std::int64_t>(values_.size()) - 1; }
    std::size_t size() const noexcept { return values_.size(); }
    const std::vector<double>& values() const noexcept { return values_; }
    double operator[](std::size_t i) const { return values_[i]; }

    bool contains(Date d) const noexcept { return d >= start_ && d <= last_day(); }

    /// Value on `d`, or 0 outside the support.
    double at(Date d) const noexcept { return contains(d) ? values_[static_cast<std::size_t>(d - start_)] : 0.0; }

    double peak() const { return *std::max_element(values_.begin(), values_.end()); }
    double total() const {
        double s = 0.0;
        for (double v : values_) s += v;
        return s;
    }

    friend bool operator==(const DailySeries&, const DailySeries&) = default;

private:
    Date start_;
    std::vector<double> values_;
};

struct GameRecord {
    std::string game_id;
    Date launch_date;
    DailySeries observed;

    GameRecord(std::string id, Date launch, DailySeries series)
        : game_id(std::move(id)), launch_date(launch), observed(std::move(series)) {
        if (observed.start_day() < launch_date)
            throw ValidationError("game '" + game_id + "' has observations before its launch date");
    }

    /// Game age in days of observation index `i`.
    std::int64_t age_of_index(std::size_t i) const {
        return (observed.start_day() - launch_date) + static_cast<std::int64_t>(i);
    }
};

using Catalog = std::vector<GameRecord>;

inline constexpr std::string_view kDauHeader = "date,game_id,dau";

/// Reads the DAU CSV contract. Rows may come in any order; each game's rows are sorted by
/// date and interior gaps are linearly interpolated. launch_date is the first observed date.
inline Catalog load_catalog(std::istream& in) {
    csv::Reader reader(in);
    reader.expect_header(kDauHeader);

    std::map<std::string, std::map<Date, double>> rows;
    std::string line;
    while (reader.next(line)) {
        if (csv::trim(line).empty()) continue;
        const auto fields = csv::split(line);
        if (fields.size() != 3)
            throw ParseError("expected 3 fields, got " + std::to_string(fields.size()), reader.line_no());
        Date date;
        try {
            date = Date::parse(csv::trim(fields[0]));
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), reader.line_no());
        }
        const std::string id(csv::trim(fields[1]));
        if (id.empty()) throw ParseError("empty game_id", reader.line_no());
        const auto dau = csv::parse_double(fields[2]);
        if (!dau) throw ParseError("unparseable dau '" + std::string(fields[2]) + "'", reader.line_no());
        if (*dau < 0.0)
            throw ValidationError("line " + std::to_string(reader.line_no()) + ": negative dau for game '" + id + "'");
        auto [it, inserted] = rows[id].emplace(date, *dau);
        if (!inserted)
            throw ValidationError("line " + std::to_string(reader.line_no()) + ": duplicate row for game '" + id +
                                  "' on " + date.iso());
    }

    Catalog catalog;
    catalog.reserve(rows.size());
    for (auto& [id, by_date] : rows) {
        const Date first = by_date.begin()->first;
        const Date last = by_date.rbegin()->first;
        std::vector<double> values(static_cast<std::size_t>(last - first) + 1, 0.0);
        auto prev = by_date.begin();
        values[0] = prev->second;
        for (auto it = std::next(by_date.begin()); it != by_date.end(); prev = it++) {
            const auto i0 = prev->first - first;
            const auto i1 = it->first - first;
            const double span = static_cast<double>(i1 - i0);
            for (auto k = i0 + 1; k <= i1; ++k) {
                const double w = static_cast<double>(k - i0) / span;
                values[static_cast<std::size_t>(k)] = k == i1 ? it->second : (1.0 - w) * prev->second + w * it->second;
            }
        }
        catalog.emplace_back(id, first, DailySeries(first, std::move(values)));
    }
    return catalog;
}

inline Catalog load_catalog(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ArgumentError("cannot open DAU file '" + path + "'");
    return load_catalog(in);
}

/// Writes the DAU CSV contract, games in catalog order, dates ascending.
inline void write_catalog(std::ostream& out, const Catalog& catalog) {
    std::string buf(kDauHeader);
    buf += '\n';
    for (const auto& g : catalog) {
        for (std::size_t i = 0; i < g.observed.size(); ++i) {
            buf += (g.observed.start_day() + static_cast<std::int64_t>(i)).iso();
            buf += ',';
            buf += g.game_id;
            buf += ',';
            csv::append(buf, g.observed[i]);
            buf += '\n';
        }
    }
    out << buf;
}

/// The `n` games with the largest peak DAU, descending. Ties: earlier launch, then game_id.
inline Catalog select_top(const Catalog& catalog, std::size_t n) {
    if (n == 0) throw ArgumentError("select_top needs n >= 1");
    if (n > catalog.size())
        throw ArgumentError("select_top: n = " + std::to_string(n) + " exceeds catalog size " +
                            std::to_string(catalog.size()));
    std::vector<std::pair<double, const GameRecord*>> ranked;
    ranked.reserve(catalog.size());
    for (const auto& g : catalog) ranked.emplace_back(g.observed.peak(), &g);
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        if (a.second->launch_date != b.second->launch_date) return a.second->launch_date < b.second->launch_date;
        return a.second->game_id < b.second->game_id;
    });
    Catalog out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(*ranked[i].second);
    return out;
}

/// Share of total user-days in `catalog` that belongs to `subset`.
inline double coverage_fraction(const Catalog& subset, const Catalog& catalog) {
    if (catalog.empty()) throw DegenerateInputError("coverage_fraction: empty catalog");
    std::set<std::string> ids;
    double total = 0.0;
    for (const auto& g : catalog) {
        ids.insert(g.game_id);
        total += g.observed.total();
    }
    double part = 0.0;
    for (const auto& g : subset) {
        if (!ids.contains(g.game_id))
            throw ArgumentError("coverage_fraction: game '" + g.game_id + "' is not in the catalog");
        part += g.observed.total();
    }
    if (total <= 0.0) throw DegenerateInputError("coverage_fraction: catalog has no users");
    return part / total;
}

/// Inclusive calendar window.
struct DateRange {
    Date first;
    Date last;

    std::size_t days() const { return static_cast<std::size_t>(last - first) + 1; }
};

/// Pointwise sum over `window`; each series contributes 0 outside its support.
inline DailySeries aggregate(const std::vector<DailySeries>& series, DateRange window) {
    if (window.last < window.first) throw ArgumentError("aggregate: empty window");
    std::vector<double> sum(window.days(), 0.0);
    for (const auto& s : series) {
        const Date lo = std::max(s.start_day(), window.first);
        const Date hi = std::min(s.last_day(), window.last);
        for (Date d = lo; d <= hi; d = d + 1)
            sum[static_cast<std::size_t>(d - window.first)] += s.at(d);
    }
    return DailySeries(window.first, std::move(sum));
}

/// Aggregate of every game's observed DAU over the catalog's full date span.
inline DailySeries aggregate_catalog(const Catalog& catalog) {
    if (catalog.empty()) throw DegenerateInputError("aggregate_catalog: empty catalog");
    DateRange window{catalog.front().observed.start_day(), catalog.front().observed.last_day()};
    std::vector<DailySeries> series;
    series.reserve(catalog.size());
    for (const auto& g : catalog) {
        window.first = std::min(window.first, g.observed.start_day());
        window.last = std::max(window.last, g.observed.last_day());
        series.push_back(g.observed);
    }
    return aggregate(series, window);
}

} // namespace dauval
