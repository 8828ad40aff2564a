#include "doctest.h"

#include "stirlab/clocks.hpp"
#include "stirlab/error.hpp"
#include "stirlab/rng.hpp"

using namespace stirlab;

TEST_CASE("sigma examples")
{
    const LocalTimeLedger l({{0, 0}, {1, 0}, {2, 0.5}});
    CHECK(sigma(l, 0.25) == doctest::Approx(1.5));
    CHECK(sigma(l, 0.0) == 0.0);
    CHECK(sigma(l, 0.5) == doctest::Approx(2.0));
    CHECK_THROWS_WITH_AS(sigma(l, 0.6), "local time exhausted", Error);
}

TEST_CASE("flat stretches resolve to their left end")
{
    const LocalTimeLedger l({{0, 0}, {1, 1}, {3, 1}, {4, 2}});
    CHECK(sigma(l, 1.0) == doctest::Approx(1.0));
    CHECK(l.level_at(2.0) == doctest::Approx(1.0));
}

TEST_CASE("ledger rejects non-monotone entries")
{
    CHECK_THROWS_AS(LocalTimeLedger({{0, 0}, {1, 1}, {1, 2}}), Error);
    CHECK_THROWS_AS(LocalTimeLedger({{0, 0}, {1, 1}, {2, 0.5}}), Error);
    LocalTimeLedger l;
    l.append(0, 0);
    l.append(1, 0.5);
    CHECK_THROWS_AS(l.append(2, 0.4), Error);
}

TEST_CASE("inverse clock round trips")
{
    Rng rng(5);
    std::vector<LocalTimeLedger::Entry> es{{0, 0}};
    for (int i = 0; i < 1000; ++i)
    {
        const auto &b = es.back();
        es.push_back({b.t + 0.01 + rng.uniform(), b.L + (rng.uniform() < 0.3 ? 0.0 : rng.uniform())});
    }
    const LocalTimeLedger l(es);
    double prev = 0.0;
    for (int k = 0; k <= 1000; ++k)
    {
        const double level = k == 1000 ? l.final_level() : l.final_level() * k / 1000.0;
        const double s = sigma(l, level);
        CHECK(s >= prev);
        prev = s;
        CHECK(l.level_at(s) >= level - 1e-12 * (1.0 + level));
    }
    for (const auto &e : es)
        CHECK(sigma(l, e.L) <= e.t);
}

TEST_CASE("sample_on_local_clock")
{
    // L grows by 0.1 per unit time and the recorded value equals L
    std::vector<LocalTimeLedger::Entry> es;
    std::vector<TimedVec> series;
    for (int i = 0; i <= 1000; ++i)
    {
        es.push_back({double(i), 0.1 * i});
        series.push_back({double(i), Vec{0.1 * i}});
    }
    const LocalTimeLedger l(es);
    std::vector<double> grid;
    for (int k = 0; k <= 100; ++k)
        grid.push_back(k * 0.95);
    const auto out = sample_on_local_clock(series, l, grid);
    REQUIRE(out.size() == grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i)
        CHECK(std::abs(out[i][0] - grid[i]) <= 0.1 / 2 + 1e-12);

    std::vector<TimedVec> constant;
    for (int i = 0; i <= 1000; ++i)
        constant.push_back({double(i), Vec{7.0, -1.0}});
    for (const auto &v : sample_on_local_clock(constant, l, grid))
        CHECK(v == Vec{7.0, -1.0});
    CHECK(sample_on_local_clock(series, l, std::vector<double>{}).empty());
}
