#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "dauval/random.hpp"
#include "dauval/revenue.hpp"

using namespace dauval;

namespace {

std::vector<QuarterlyRevenue> quarters(Date first_end, const std::vector<double>& revenue) {
    std::vector<QuarterlyRevenue> out;
    for (std::size_t i = 0; i < revenue.size(); ++i)
        out.push_back({first_end + static_cast<std::int64_t>(91 * i), revenue[i]});
    return out;
}

std::vector<double> annual_values(const std::vector<AnnualRevenue>& a) {
    std::vector<double> v;
    for (const auto& x : a) v.push_back(x.revenue);
    return v;
}

std::vector<TimePoint> noisy_points(std::uint64_t seed, double sigma) {
    const LogisticParams truth{33.0, 0.005, 8.0};
    CounterStream rng(seed, 5);
    std::vector<TimePoint> pts;
    for (int i = 0; i < 12; ++i) {
        const double t = 91.0 * i;
        pts.push_back({t, logistic_value(truth, t) * (1.0 + sigma * rng.normal())});
    }
    return pts;
}

} // namespace

TEST_CASE("trailing annual revenue sums four quarters", "[revenue][trailing]") {
    const Date q0(2010, 3, 31);
    CHECK(annual_values(trailing_annual_revenue(quarters(q0, {25, 25, 25, 25}))) == std::vector<double>{100});
    const auto a = trailing_annual_revenue(quarters(q0, {10, 20, 30, 40, 50}));
    CHECK(annual_values(a) == std::vector<double>{100, 140});
    CHECK(a[0].quarter_end == q0 + 3 * 91);

    CHECK_THROWS_AS(trailing_annual_revenue(quarters(q0, {1, 2, 3})), ValidationError);
    auto gap = quarters(q0, {1, 2, 3, 4, 5});
    gap[4].quarter_end = gap[4].quarter_end + 91;
    CHECK_THROWS_AS(trailing_annual_revenue(gap), ValidationError);
}

TEST_CASE("revenue_per_dau divides by the trailing-year mean", "[revenue][per_dau]") {
    const Date end(2011, 12, 31);
    const DailySeries flat(end - 364, std::vector<double>(365, 10.0));
    const auto pts = revenue_per_dau({{end, 100.0}}, flat);
    REQUIRE(pts.size() == 1);
    CHECK(pts[0].t == 0.0);
    CHECK(pts[0].y == Catch::Approx(10.0).epsilon(1e-14));

    // stationary DAU D and equal quarters q give r = 4q / D at every point
    const Date q0(2010, 3, 31);
    const auto annual = trailing_annual_revenue(quarters(q0, {7, 7, 7, 7, 7, 7}));
    const DailySeries steady(Date(2009, 1, 1), std::vector<double>(1200, 2.0));
    for (const auto& p : revenue_per_dau(annual, steady)) CHECK(p.y == Catch::Approx(14.0).epsilon(1e-14));
    const auto timed = revenue_per_dau(annual, steady);
    CHECK(timed[1].t == 91.0);
    CHECK(timed[2].t == 182.0);
}

TEST_CASE("revenue_per_dau failure modes", "[revenue][per_dau][errors]") {
    const Date end(2011, 12, 31);
    const DailySeries short_series(end - 264, std::vector<double>(265, 10.0));
    CHECK_THROWS_AS(revenue_per_dau({{end, 100.0}}, short_series), CoverageError);
    const DailySeries zeros(end - 364, std::vector<double>(365, 0.0));
    CHECK_THROWS_AS(revenue_per_dau({{end, 100.0}}, zeros), DegenerateInputError);
}

TEST_CASE("revenue_per_dau is homogeneous", "[revenue][per_dau][property]") {
    CounterStream rng(3, 0);
    std::vector<double> dau(500);
    for (auto& v : dau) v = 1e5 + 1e5 * rng.uniform();
    const DailySeries series(Date(2010, 1, 1), dau);
    std::vector<double> doubled = dau;
    for (auto& v : doubled) v *= 2.0;
    const std::vector<AnnualRevenue> annual{{Date(2011, 1, 31), 3e6}, {Date(2011, 5, 2), 4e6}};
    const auto base = revenue_per_dau(annual, series);
    const auto dd = revenue_per_dau(annual, DailySeries(Date(2010, 1, 1), doubled));
    auto rr = annual;
    for (auto& a : rr) a.revenue *= 3.0;
    const auto scaled_rev = revenue_per_dau(rr, series);
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(dd[i].y == Catch::Approx(base[i].y / 2.0).epsilon(1e-14));
        CHECK(scaled_rev[i].y == Catch::Approx(base[i].y * 3.0).epsilon(1e-14));
    }
}

TEST_CASE("build_scenarios", "[revenue][scenarios]") {
    SECTION("noiseless data collapses the three cases") {
        std::vector<TimePoint> clean;
        for (int i = 0; i < 12; ++i) clean.push_back({91.0 * i, logistic_value({33.0, 0.005, 8.0}, 91.0 * i)});
        const auto s = build_scenarios(clean, Date(2011, 3, 31), 1, 200);
        CHECK(s.base.K == Catch::Approx(33.0).epsilon(1e-3));
        CHECK(std::abs(s.k95 - s.base.K) < 0.01 * s.base.K);
        CHECK(s.high.K <= s.extreme.K);
    }

    SECTION("ordering holds for every seed") {
        for (std::uint64_t seed = 0; seed < 5; ++seed) {
            const auto s = build_scenarios(noisy_points(seed, 0.03), Date(2011, 3, 31), seed, 200);
            REQUIRE(s.base.K <= s.high.K);
            REQUIRE(s.high.K <= s.extreme.K);
            REQUIRE(s.k80 <= s.k95);
            const Date later = s.origin + 2000;
            REQUIRE(s.curve(s.base).at(later) <= s.curve(s.extreme).at(later));
        }
    }

    SECTION("the curve is anchored at its origin") {
        const RevenueCurve c{{33.0, 0.005, 8.0}, Date(2011, 3, 31)};
        CHECK(c.at(Date(2011, 3, 31)) == Catch::Approx(8.0).epsilon(1e-14));
        CHECK(c.at(Date(2011, 3, 31) + 10000) == Catch::Approx(33.0).epsilon(1e-9));
    }
}

TEST_CASE("financials CSV", "[revenue][csv]") {
    std::istringstream in("quarter_end,revenue_usd\n2010-06-30,20\n2010-03-31,10\n2010-09-30,30\n");
    const auto q = load_financials(in);
    REQUIRE(q.size() == 3);
    CHECK(q[0].quarter_end == Date(2010, 3, 31));
    CHECK(q[2].revenue == 30.0);

    std::ostringstream out;
    write_financials(out, q);
    std::istringstream again(out.str());
    const auto back = load_financials(again);
    for (std::size_t i = 0; i < q.size(); ++i) CHECK(back[i].revenue == q[i].revenue);

    std::istringstream dup("quarter_end,revenue_usd\n2010-03-31,1\n2010-03-31,2\n");
    CHECK_THROWS_AS(load_financials(dup), ValidationError);
    std::istringstream bad("quarter_end,revenue_usd\n2010-03-31,x\n");
    CHECK_THROWS_AS(load_financials(bad), ParseError);
    std::istringstream neg("quarter_end,revenue_usd\n2010-03-31,-4\n");
    CHECK_THROWS_AS(load_financials(neg), ValidationError);
    std::istringstream gap("quarter_end,revenue_usd\n2010-03-31,1\n2010-12-31,2\n");
    CHECK_THROWS_AS(load_financials(gap), ValidationError);
}
