#pragma once

#include <charconv>
#include <chrono>
#include <compare>
#include <cstdint>
#include <cstdio>
#include <string>
#include <string_view>

#include "dauval/error.hpp"

namespace dauval {

/// Calendar date with whole-day arithmetic. No time zones, no sub-daily resolution.
class Date {
public:
    constexpr Date() = default;
    constexpr explicit Date(std::chrono::sys_days d) : days_(d) {}
    constexpr Date(int y, unsigned m, unsigned d)
        : days_(std::chrono::year{y} / std::chrono::month{m} / std::chrono::day{d}) {}

    static constexpr Date from_serial(std::int64_t days_since_epoch) {
        return Date(std::chrono::sys_days{std::chrono::days{days_since_epoch}});
    }

    constexpr std::int64_t serial() const { return days_.time_since_epoch().count(); }
    constexpr std::chrono::sys_days sys_days() const { return days_; }
    constexpr std::chrono::year_month_day ymd() const { return std::chrono::year_month_day{days_}; }

    constexpr Date operator+(std::int64_t n) const { return Date(days_ + std::chrono::days{n}); }
    constexpr Date operator-(std::int64_t n) const { return Date(days_ - std::chrono::days{n}); }
    constexpr std::int64_t operator-(Date other) const { return serial() - other.serial(); }

    constexpr auto operator<=>(const Date&) const = default;

    /// Strict `YYYY-MM-DD`; throws std::invalid_argument on anything else.
    static Date parse(std::string_view s) {
        auto bad = [&] { return std::invalid_argument("invalid ISO date '" + std::string(s) + "'"); };
        if (s.size() != 10 || s[4] != '-' || s[7] != '-') throw bad();
        int y = 0;
        unsigned m = 0, d = 0;
        auto num = [&](std::size_t pos, std::size_t len, auto& out) {
            for (std::size_t i = pos; i < pos + len; ++i)
                if (s[i] < '0' || s[i] > '9') throw bad();
            std::from_chars(s.data() + pos, s.data() + pos + len, out);
        };
        num(0, 4, y);
        num(5, 2, m);
        num(8, 2, d);
        const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
        if (!ymd.ok()) throw bad();
        return Date(std::chrono::sys_days{ymd});
    }

    std::string iso() const {
        const auto v = ymd();
        char buf[16];
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(v.year()),
                      static_cast<unsigned>(v.month()), static_cast<unsigned>(v.day()));
        return buf;
    }

private:
    std::chrono::sys_days days_{};
};

} // namespace dauval
