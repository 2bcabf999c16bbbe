#include <catch2/catch_amalgamated.hpp>

#include <cstring>
#include <sstream>

#include "dauval/random.hpp"
#include "dauval/timeseries.hpp"
#include "test_support.hpp"

using namespace dauval;
using dauval::testing::record;

namespace {

Catalog load(const std::string& text) {
    std::istringstream in(text);
    return load_catalog(in);
}

} // namespace

TEST_CASE("load_catalog ingests consecutive rows", "[timeseries][load]") {
    const auto c = load("date,game_id,dau\n2011-01-01,farm,100\n2011-01-02,farm,90\n2011-01-03,farm,80\n");
    REQUIRE(c.size() == 1);
    CHECK(c[0].game_id == "farm");
    CHECK(c[0].launch_date == Date(2011, 1, 1));
    CHECK(c[0].observed.values() == std::vector<double>{100, 90, 80});
}

TEST_CASE("load_catalog sorts rows and fills interior gaps linearly", "[timeseries][load]") {
    const auto c = load("date,game_id,dau\r\n2011-01-03,g,20\r\n2011-01-01,g,10\r\n");
    REQUIRE(c.size() == 1);
    CHECK(c[0].observed.values() == std::vector<double>{10, 15, 20});

    const auto wide = load("date,game_id,dau\n2011-01-01,g,0\n2011-01-05,g,8\n");
    CHECK(wide[0].observed.values() == std::vector<double>{0, 2, 4, 6, 8});
}

TEST_CASE("load_catalog groups games and does not invent leading or trailing days", "[timeseries][load]") {
    const auto c = load("date,game_id,dau\n2011-02-01,b,5\n2011-01-01,a,1\n2011-01-02,a,2\n2011-02-02,b,6\n");
    REQUIRE(c.size() == 2);
    CHECK(c[0].game_id == "a");
    CHECK(c[0].observed.size() == 2);
    CHECK(c[1].observed.start_day() == Date(2011, 2, 1));
    CHECK(c[1].observed.last_day() == Date(2011, 2, 2));
}

TEST_CASE("load_catalog rejects bad input", "[timeseries][load][errors]") {
    CHECK_THROWS_AS(load("date,game_id,dau\n2011-01-01,g,-5\n"), ValidationError);
    CHECK_THROWS_AS(load("date,game_id,dau\n2011-01-01,g,1\n2011-01-01,g,2\n"), ValidationError);
    CHECK_THROWS_AS(load(""), ParseError);
    CHECK_THROWS_AS(load("day,id,users\n"), ParseError);

    try {
        load("date,game_id,dau\n2011-01-01,g,1\n2011-13-01,g,2\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    try {
        load("date,game_id,dau\n2011-01-01,g,1\n2011-01-02,g,abc\n2011-01-03,g\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
}

TEST_CASE("header-only file is an empty catalog", "[timeseries][load]") {
    CHECK(load("date,game_id,dau\n").empty());
}

TEST_CASE("DailySeries enforces its invariants", "[timeseries]") {
    CHECK_THROWS_AS(DailySeries(Date(2011, 1, 1), {}), ValidationError);
    CHECK_THROWS_AS(DailySeries(Date(2011, 1, 1), {1.0, -0.5}), ValidationError);
    const DailySeries s(Date(2011, 1, 1), {1.0, 2.0});
    CHECK(s.at(Date(2010, 12, 31)) == 0.0);
    CHECK(s.at(Date(2011, 1, 2)) == 2.0);
    CHECK(s.at(Date(2011, 1, 3)) == 0.0);
    CHECK_THROWS_AS(GameRecord("x", Date(2011, 1, 2), s), ValidationError);
}

TEST_CASE("select_top orders by peak with launch/id tie-breaks", "[timeseries][select]") {
    const Catalog c{record("small", Date(2011, 1, 1), {10}), record("big", Date(2011, 1, 1), {100}),
                    record("mid", Date(2011, 1, 1), {50})};
    auto top = select_top(c, 2);
    REQUIRE(top.size() == 2);
    CHECK(top[0].game_id == "big");
    CHECK(top[1].game_id == "mid");

    auto all = select_top(c, 3);
    CHECK(all[2].game_id == "small");
    CHECK_THROWS_AS(select_top(c, 4), ArgumentError);

    const Catalog tie{record("feb", Date(2011, 2, 1), {100}), record("jan", Date(2011, 1, 1), {100})};
    CHECK(select_top(tie, 1)[0].game_id == "jan");
    const Catalog same_day{record("b", Date(2011, 1, 1), {7}), record("a", Date(2011, 1, 1), {7})};
    CHECK(select_top(same_day, 1)[0].game_id == "a");
}

TEST_CASE("coverage_fraction", "[timeseries][coverage]") {
    const Catalog c{record("a", Date(2011, 1, 1), {40, 57}), record("b", Date(2011, 1, 1), {3})};
    CHECK(coverage_fraction(c, c) == 1.0);
    CHECK(coverage_fraction({c[0]}, c) == Catch::Approx(0.97).epsilon(1e-15));
    CHECK_THROWS_AS(coverage_fraction({}, {}), DegenerateInputError);
    const Catalog zeros{record("z", Date(2011, 1, 1), {0, 0})};
    CHECK_THROWS_AS(coverage_fraction(zeros, zeros), DegenerateInputError);
    CHECK_THROWS_AS(coverage_fraction({record("other", Date(2011, 1, 1), {1})}, c), ArgumentError);
}

TEST_CASE("aggregate sums aligned series inside the window", "[timeseries][aggregate]") {
    const DailySeries a(Date(2011, 1, 1), {1, 2});
    const DailySeries b(Date(2011, 1, 2), {10});
    const auto sum = aggregate({a, b}, {Date(2011, 1, 1), Date(2011, 1, 3)});
    CHECK(sum.values() == std::vector<double>{1, 12, 0});
    CHECK(aggregate({a, a}, {Date(2011, 1, 1), Date(2011, 1, 2)}).values() == std::vector<double>{2, 4});
    CHECK(aggregate({a}, {Date(2011, 2, 1), Date(2011, 2, 3)}).values() == std::vector<double>{0, 0, 0});
    CHECK(aggregate({}, {Date(2011, 2, 1), Date(2011, 2, 2)}).values() == std::vector<double>{0, 0});
    CHECK_THROWS_AS(aggregate({a}, {Date(2011, 2, 2), Date(2011, 2, 1)}), ArgumentError);
}

namespace {

Catalog random_catalog(CounterStream& rng, std::size_t games) {
    Catalog c;
    for (std::size_t g = 0; g < games; ++g) {
        const auto len = 1 + rng.below(40);
        std::vector<double> v(len);
        for (auto& x : v) x = rng.uniform() * 1e6;
        const Date start = Date(2011, 1, 1) + static_cast<std::int64_t>(rng.below(60));
        c.emplace_back("g" + std::to_string(g), start, DailySeries(start, std::move(v)));
    }
    return c;
}

} // namespace

TEST_CASE("properties over random catalogs", "[timeseries][property]") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        CounterStream rng(seed, 1);
        const auto c = random_catalog(rng, 2 + rng.below(10));
        const DateRange window{Date(2010, 12, 20), Date(2011, 4, 1)};

        // aggregate is linear over any partition
        std::vector<DailySeries> all, left, right;
        for (const auto& g : c) {
            all.push_back(g.observed);
            (rng.below(2) ? left : right).push_back(g.observed);
        }
        const auto whole = aggregate(all, window);
        const auto l = aggregate(left, window), r = aggregate(right, window);
        for (std::size_t i = 0; i < whole.size(); ++i)
            REQUIRE(whole[i] == Catch::Approx(l[i] + r[i]).epsilon(1e-12));

        // select_top is idempotent, coverage non-decreasing in n
        double prev = 0.0;
        for (std::size_t n = 1; n <= c.size(); ++n) {
            const auto top = select_top(c, n);
            const auto again = select_top(top, n);
            for (std::size_t i = 0; i < n; ++i) REQUIRE(top[i].game_id == again[i].game_id);
            const double cov = coverage_fraction(top, c);
            REQUIRE(cov >= prev);
            prev = cov;
        }
        REQUIRE(prev == Catch::Approx(1.0).epsilon(1e-12));

        // serialization round-trips bit-exactly for gap-free input
        std::ostringstream out;
        write_catalog(out, c);
        std::istringstream in(out.str());
        const auto back = load_catalog(in);
        REQUIRE(back.size() == c.size());
        for (std::size_t i = 0; i < c.size(); ++i) {
            const auto& orig = *std::find_if(c.begin(), c.end(), [&](const auto& g) { return g.game_id == back[i].game_id; });
            REQUIRE(back[i].observed.start_day() == orig.observed.start_day());
            REQUIRE(std::memcmp(back[i].observed.values().data(), orig.observed.values().data(),
                                orig.observed.size() * sizeof(double)) == 0);
        }
    }
}
