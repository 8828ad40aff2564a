#include "doctest.h"

#include "stirlab/error.hpp"
#include "stirlab/excursions.hpp"

#include <cmath>
#include <numbers>

using namespace stirlab;

TEST_CASE("lambda1 closed forms")
{
    CHECK(lambda1(2, std::exp(2.0)) == doctest::Approx(0.5));
    CHECK(lambda1(3, 2.0) == doctest::Approx(2.0));
    CHECK(lambda1(4, INFINITY) == doctest::Approx(2.0));
    CHECK_THROWS_WITH_AS(lambda1(2, INFINITY), "recurrent case has no infinite crossing rate", Error);
    for (int d : {2, 3, 5})
        CHECK(lambda1(d, 4.0) < lambda1(d, 2.0));
}

TEST_CASE("exact crossing probability tends to lambda1 delta")
{
    for (int d : {2, 3, 4})
    {
        const double b = d == 2 ? std::numbers::e : 2.0;
        double prev = 0.0;
        for (double dl : {0.08, 0.04, 0.02, 0.01})
        {
            const double q = crossing_probability(d, b, dl) / dl;
            if (d >= 3)
                CHECK(q > prev); // increases toward the limit as delta shrinks
            prev = q;
        }
        CHECK(crossing_probability(d, b, 1e-7) / 1e-7 == doctest::Approx(lambda1(d, b)).epsilon(1e-5));
    }
}

TEST_CASE("walk on spheres reproduces the radial crossing probability")
{
    for (int d : {3, 4})
        for (double b : {2.0, 8.0})
        {
            const std::vector<double> deltas = {0.05, 0.06};
            const auto e = crossing_rate_estimate(d, b, deltas, 40000, 100 * d + std::uint64_t(b));
            const double exact = crossing_probability(d, b, 0.05) / 0.05;
            CHECK(e.levels[0].z_score(exact) < 3.0);
        }
}

TEST_CASE("crossing rate ordering in b")
{
    const std::vector<double> deltas = {0.05, 0.025};
    std::vector<ExcursionLawEstimate> e;
    for (double b : {2.0, 4.0, 8.0})
        e.push_back(crossing_rate_estimate(3, b, deltas, 300000, 7 + std::uint64_t(b)));
    for (int i = 0; i < 2; ++i)
    {
        const double gap = e[i].value - e[i + 1].value;
        CHECK(gap > 3.0 * std::hypot(e[i].std_error, e[i + 1].std_error));
    }
    CHECK(e[0].value == doctest::Approx(2.0).epsilon(0.05));
}

TEST_CASE("crossing rate argument checks")
{
    const std::vector<double> one = {0.05};
    CHECK_THROWS_AS(crossing_rate_estimate(3, 2.0, one, 10, 1), Error);
    const std::vector<double> big = {0.2, 0.05};
    CHECK_THROWS_AS(crossing_rate_estimate(3, 2.0, big, 10, 1), Error);
}

TEST_CASE("shell crossing law: d = 2, b = e")
{
    SimConfig cfg;
    cfg.dt = 6.25e-5;
    cfg.adaptive = true;
    cfg.seed = 5;
    const auto r = shell_crossing_law(2, std::numbers::e, 2000, cfg);
    CHECK(r.rate == doctest::Approx(1.0));
    CHECK(std::abs(r.mean.value - 1.0) < 0.05);
    CHECK(r.ks.p_value > 0.01);
}

TEST_CASE("shell crossing law: d = 3, b = 2 at the finest step")
{
    SimConfig cfg;
    cfg.dt = 6.25e-5;
    cfg.adaptive = true;
    cfg.seed = 6;
    const auto r = shell_crossing_law(3, 2.0, 2000, cfg);
    CHECK(std::abs(r.mean.value / 0.5 - 1.0) < 0.05);
    CHECK(r.ks.p_value > 0.01);
}

TEST_CASE("lambda2 near the b = infinity limit in d = 3")
{
    SimConfig cfg;
    cfg.dt = 2.5e-4;
    cfg.adaptive = true;
    cfg.seed = 9;
    const auto r = lambda2_estimate(3, 32.0, 4000, cfg);
    CHECK(std::abs(r.estimate.value * 3.0 - 1.0) < 0.10);
    CHECK(r.tail_rate > 0.0);
    CHECK(std::isfinite(r.tail_rate));
}

TEST_CASE("excursion records partition the run")
{
    SimConfig cfg;
    cfg.space = Space::torus(2, 10.0);
    cfg.mode = Mode::Frozen;
    cfg.dt = 1e-3;
    cfg.t_end = 2000.0;
    cfg.seed = 4;
    const auto s0 = SystemState::make(cfg.space, Vec{4.0, 2.5}, Vec{2.5, 2.5}, Vec{7.5, 7.5});
    ExcursionTracker tr(cfg);
    const auto p = run_path(cfg, s0, [&](const SystemState &s, const StepReport &r)
    {
        tr.observe(s, r);
        return true;
    });
    tr.finish(p.final_state);
    const auto &rec = tr.records();
    REQUIRE(rec.size() > 100);
    double total = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i)
    {
        CHECK(rec[i].zeta > 0.0);
        CHECK(rec[i].max_radius >= 1.0);
        total += rec[i].zeta;
        if (i + 1 < rec.size())
            CHECK(rec[i].t_start + rec[i].zeta <= rec[i + 1].t_start + cfg.dt * 1e-9 + 1e-12);
        CHECK(rec[i].censored == (i + 1 == rec.size() && rec[i].end_ball < 0));
    }
    CHECK(total <= cfg.t_end + 1e-9);
    // the excursions carry most of the time; the rest is spent at the boundary
    CHECK(total > 0.5 * cfg.t_end);
    // nested shells: reaching radius 3 implies reaching radius 2
    CHECK(tr.crossings(3.0) <= tr.crossings(2.0));
}

TEST_CASE("lifetime per local time")
{
    CHECK(sphere_area(2) == doctest::Approx(2 * std::numbers::pi));
    CHECK(sphere_area(3) == doctest::Approx(4 * std::numbers::pi));
    CHECK(ball_volume(3) == doctest::Approx(4 * std::numbers::pi / 3));

    SimConfig cfg;
    cfg.space = Space::torus(2, 10.0);
    cfg.mode = Mode::Frozen;
    cfg.dt = 1e-4;
    cfg.adaptive = true;
    cfg.t_end = 2e4;
    cfg.seed = 12;
    const auto s0 = SystemState::make(cfg.space, Vec{4.0, 2.5}, Vec{2.5, 2.5}, Vec{7.5, 7.5});
    const auto r = lifetime_per_local_time(cfg, s0);
    CHECK(r.target == doctest::Approx((100 - 2 * std::numbers::pi) / (2 * std::numbers::pi)));
    CHECK(std::abs(r.t_over_L.value / r.target - 1.0) < 0.10);

    SimConfig c3 = cfg;
    c3.space = Space::torus(3, 8.0);
    c3.t_end = 1e4;
    const auto s3 = SystemState::make(c3.space, Vec{3.5, 2.0, 2.0}, Vec{2.0, 2.0, 2.0}, Vec{6.0, 6.0, 6.0});
    const auto r3 = lifetime_per_local_time(c3, s3);
    CHECK(r3.target == doctest::Approx((512 - 8 * std::numbers::pi / 3) / (4 * std::numbers::pi)));
    CHECK(std::abs(r3.t_over_L.value / r3.target - 1.0) < 0.10);

    SimConfig close = cfg;
    const auto bad = SystemState::make(cfg.space, Vec{4.0, 2.5}, Vec{2.5, 2.5}, Vec{5.0, 2.5});
    CHECK_THROWS_AS(lifetime_per_local_time(close, bad), Error);
    SimConfig short_run = cfg;
    short_run.t_end = 5.0;
    CHECK_THROWS_AS(lifetime_per_local_time(short_run, s0), Underpowered);
}
