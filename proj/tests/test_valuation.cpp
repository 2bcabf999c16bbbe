#include <catch2/catch_amalgamated.hpp>

#include <numeric>

#include "dauval/random.hpp"
#include "dauval/valuation.hpp"

using namespace dauval;

namespace {

const Date kPresent(2012, 6, 30);

// r(t) = K for any practical t
const RevenueCurve kSaturated{{33.0, 1.0, 33.0}, kPresent - 1000};

Scenario constant_dau(double d, int years = 20) {
    return {0, DailySeries(kPresent, std::vector<double>(static_cast<std::size_t>(years) * 365 + 1, d))};
}

ValuationConfig cfg_with(double margin, double rate, Discounting mode = Discounting::year_end) {
    ValuationConfig c;
    c.profit_margin = margin;
    c.discount_rate = rate;
    c.discounting = mode;
    return c;
}

// Annual cash flows K*D*margin paid at the end of years 1..20, summed term by term.
double annual_oracle(double K, double D, double margin, double rate, int years) {
    double total = 0.0;
    double factor = 1.0;
    for (int y = 1; y <= years; ++y) {
        factor *= 1.0 + rate;
        total += K * D * margin / factor;
    }
    return total;
}

} // namespace

TEST_CASE("zero users are worth nothing", "[valuation]") {
    CHECK(value_scenario(constant_dau(0.0), kSaturated, ValuationConfig{}) == 0.0);
}

TEST_CASE("constant DAU at saturated revenue matches the annual oracle", "[valuation][oracle]") {
    const double oracle = annual_oracle(33.0, 1e6, 0.15, 0.05, 20);
    const double v = value_scenario(constant_dau(1e6), kSaturated, cfg_with(0.15, 0.05));
    CHECK(std::abs(v - oracle) <= 0.005 * oracle);

    const double undiscounted = value_scenario(constant_dau(1e6), kSaturated, cfg_with(0.15, 0.0));
    CHECK(std::abs(undiscounted - 20 * 33.0 * 1e6 * 0.15) <= 1e-9 * (20 * 33.0 * 1e6 * 0.15));
}

TEST_CASE("fractional-year discounting sits about 2.5% above the annual sum", "[valuation][discounting]") {
    const double oracle = annual_oracle(33.0, 1e6, 0.15, 0.05, 20);
    const double daily = value_scenario(constant_dau(1e6), kSaturated, cfg_with(0.15, 0.05, Discounting::daily));
    CHECK(daily > oracle);
    CHECK((daily - oracle) / oracle == Catch::Approx(0.0247).margin(0.001));
}

TEST_CASE("half-day discretization barely moves the value", "[valuation][discretization]") {
    // a growing revenue curve integrated on a half-day grid with the same discount convention
    const RevenueCurve growing{{41.0, 0.004, 10.0}, kPresent - 300};
    std::vector<double> dau(20 * 365 + 1);
    for (std::size_t d = 0; d < dau.size(); ++d) dau[d] = 1e6 * std::exp(-static_cast<double>(d) / 4000.0);
    const Scenario s{0, DailySeries(kPresent, dau)};
    const double v = value_scenario(s, growing, cfg_with(0.15, 0.05, Discounting::daily));

    double half = 0.0;
    for (int i = 1; i <= 2 * 20 * 365; ++i) {
        const double t = 0.5 * i;
        const double r = logistic_value(growing.params, static_cast<double>(kPresent - growing.origin) + t);
        const double users = 1e6 * std::exp(-t / 4000.0);
        half += 0.5 * r / 365.0 * users * 0.15 / std::pow(1.05, t / 365.0);
    }
    CHECK(std::abs(v - half) / half < 1e-3);
}

TEST_CASE("value is monotone in DAU and linear in margin", "[valuation][property]") {
    CounterStream rng(8, 0);
    const RevenueCurve curve{{33.0, 0.005, 8.0}, kPresent - 900};
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> dau(5 * 365 + 1);
        for (auto& x : dau) x = 1e5 * rng.uniform();
        std::vector<double> more = dau;
        more[1 + rng.below(more.size() - 1)] += 1000.0;
        ValuationConfig c = cfg_with(0.15, 0.05);
        c.horizon_years = 5;
        const double base = value_scenario({0, DailySeries(kPresent, dau)}, curve, c);
        REQUIRE(value_scenario({0, DailySeries(kPresent, more)}, curve, c) > base);
        c.profit_margin = 0.30;
        REQUIRE(value_scenario({0, DailySeries(kPresent, dau)}, curve, c) == 2.0 * base);
        c.profit_margin = 0.15;
        c.discount_rate = 0.10;
        REQUIRE(value_scenario({0, DailySeries(kPresent, dau)}, curve, c) < base);
    }
}

TEST_CASE("valuation preconditions", "[valuation][errors]") {
    CHECK_THROWS_AS(value_scenario(constant_dau(1.0, 19), kSaturated, ValuationConfig{}), ArgumentError);
    CHECK_THROWS_AS(value_scenario(constant_dau(1.0), kSaturated, cfg_with(0.0, 0.05)), ArgumentError);
    CHECK_THROWS_AS(value_scenario(constant_dau(1.0), kSaturated, cfg_with(0.15, -0.01)), ArgumentError);
    CHECK_THROWS_AS(summarize({}), ArgumentError);
}

TEST_CASE("percentile summary of 1..1000", "[valuation][statistics]") {
    std::vector<double> v(1000);
    std::iota(v.begin(), v.end(), 1.0);
    std::reverse(v.begin(), v.end());
    const auto d = summarize(v);
    CHECK(d.median == Catch::Approx(500.5).epsilon(1e-15));
    CHECK(d.ci95_lower == Catch::Approx(25.975).epsilon(1e-14));
    CHECK(d.ci95_upper == Catch::Approx(975.025).epsilon(1e-14));
    CHECK(d.mean == Catch::Approx(500.5).epsilon(1e-15));
    CHECK(probability_exceeds(d, 901) == 0.1);
    CHECK(probability_exceeds(d, 0) == 1.0);
    CHECK(probability_exceeds(d, 1001) == 0.0);
    CHECK(d.scenario_values.front() == 1000.0);
}

TEST_CASE("identical scenarios give a degenerate interval", "[valuation][statistics]") {
    std::vector<Scenario> same(7, constant_dau(2e5));
    for (std::size_t i = 0; i < same.size(); ++i) same[i].scenario_id = i;
    ValuationConfig c = cfg_with(0.15, 0.05);
    c.threads = 3;
    const auto d = value_ensemble(same, kSaturated, c);
    CHECK(d.ci95_lower == d.median);
    CHECK(d.ci95_upper == d.median);
    CHECK(d.median == value_scenario(same[0], kSaturated, c));
}
