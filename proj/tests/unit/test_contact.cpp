#include "doctest.h"

#include "stirlab/contact.hpp"
#include "stirlab/error.hpp"
#include "stirlab/stats.hpp"

#include <cmath>

using namespace stirlab;

namespace
{
    SimConfig plane(Mode mode = Mode::Pushing)
    {
        SimConfig c;
        c.space = Space::euclidean(2);
        c.dt = 1e-3;
        c.mode = mode;
        return c;
    }
} // namespace

TEST_CASE("resolve_contacts: single push")
{
    const auto r = resolve_contacts(Vec{0.5, 0.0}, Vec{0.0, 0.0}, Vec{10.0, 0.0}, plane());
    CHECK(r.X[0] == doctest::Approx(-0.5));
    CHECK(r.X[1] == doctest::Approx(0.0));
    CHECK(r.report.dLX == doctest::Approx(0.5));
    CHECK(r.report.dLY == 0.0);
    CHECK(r.report.pushesX == 1);
    // the vector local-time increment is normal times depth, pointing from the ball to B
    CHECK(r.dvX[0] == doctest::Approx(0.5));
}

TEST_CASE("resolve_contacts: no contact is the identity")
{
    const auto r = resolve_contacts(Vec{5.0, 5.0}, Vec{0.0, 0.0}, Vec{2.5, 0.0}, plane());
    CHECK(r.X == Vec{0.0, 0.0});
    CHECK(r.Y == Vec{2.5, 0.0});
    CHECK(r.report.dLX == 0.0);
    CHECK(r.report.dLY == 0.0);
}

TEST_CASE("resolve_contacts: push transmitted to the partner")
{
    const auto r = resolve_contacts(Vec{0.9, 0.0}, Vec{0.0, 0.0}, Vec{-2.05, 0.0}, plane());
    CHECK(r.X[0] == doctest::Approx(-0.1));
    CHECK(r.Y[0] == doctest::Approx(-2.1));
    CHECK(r.report.dLX == doctest::Approx(0.1));
    CHECK(r.report.dLY == 0.0);
    CHECK(r.report.pushesY == 0);
}

TEST_CASE("resolve_contacts: brute-force check on the chain configuration")
{
    // Independent check: the result must satisfy all constraints, X must sit on
    // the unit sphere around B along the original normal, and Y must touch X.
    const Vec B{0.9, 0.0}, X{0.0, 0.0}, Y{-2.05, 0.0};
    const auto r = resolve_contacts(B, X, Y, plane());
    CHECK((B - r.X).norm() == doctest::Approx(1.0));
    CHECK((r.X - r.Y).norm() == doctest::Approx(2.0));
    CHECK((B - r.Y).norm() >= 1.0);
}

TEST_CASE("resolve_contacts: oblique chain converges")
{
    SimConfig c = plane();
    const auto r = resolve_contacts(Vec{0.6, 0.5}, Vec{0.0, 0.0}, Vec{-1.2, -1.5}, c);
    CHECK((Vec{0.6, 0.5} - r.X).norm() >= 1.0 - c.tol_overlap);
    CHECK((Vec{0.6, 0.5} - r.Y).norm() >= 1.0 - c.tol_overlap);
    CHECK((r.X - r.Y).norm() >= 2.0 - c.tol_overlap);
}

TEST_CASE("frozen step projects the driver")
{
    SimConfig c = plane(Mode::Frozen);
    c.two_balls = false;
    const auto s0 = SystemState::make(c.space, Vec{1.0, 0.0}, Vec{0.0, 0.0}, Vec{0.0, 0.0});
    StepReport rep;
    const auto s1 = step(s0, c, Vec{-0.03, 0.0}, c.dt, &rep);
    CHECK(s1.B.norm() == doctest::Approx(1.0));
    CHECK(s1.LX == doctest::Approx(0.03));
    CHECK(rep.dLX == doctest::Approx(0.03));
    CHECK(s1.X == s0.X);
}

TEST_CASE("zero noise without contact only advances time")
{
    SimConfig c = plane();
    const auto s0 = SystemState::make(c.space, Vec{3.0, 3.0}, Vec{0.0, 0.0}, Vec{5.0, 0.0});
    const auto s1 = step(s0, c, Vec{0.0, 0.0});
    CHECK(s1.t == doctest::Approx(c.dt));
    CHECK(s1.B == s0.B);
    CHECK(s1.X == s0.X);
    CHECK(s1.Y == s0.Y);
    CHECK(s1.LX == 0.0);
}

TEST_CASE("config validation")
{
    SimConfig c = plane();
    c.dt = 0.02;
    CHECK_THROWS_AS(c.validate(), Error);
    c.dt = 1e-3;
    c.max_contact_iters = 4;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("run_path with t_end = 0 returns the initial state")
{
    SimConfig c = plane();
    c.t_end = 0.0;
    const auto s0 = SystemState::make(c.space, Vec{3.0, 0.0}, Vec{0.0, 0.0}, Vec{6.0, 0.0});
    const auto p = run_path(c, s0);
    CHECK(p.ledger.empty());
    CHECK(p.steps == 0);
    CHECK(p.final_state.B == s0.B);
}

TEST_CASE("invariants along a long pushing run on the torus")
{
    SimConfig c;
    c.space = Space::torus(2, 6.0);
    c.dt = 1e-3;
    c.t_end = 1000.0; // 10^6 steps
    c.seed = 17;
    c.check_invariants = true;
    const auto s0 = SystemState::make(c.space, Vec{3.0, 4.5}, Vec{1.5, 3.0}, Vec{4.5, 3.0});
    double prevLX = 0.0, prevLY = 0.0;
    Vec prevX = s0.vLX, prevY = s0.vLY;
    bool local_ok = true, vector_ok = true;
    const auto p = run_path(c, s0, [&](const SystemState &s, const StepReport &r)
    {
        local_ok = local_ok && s.LX >= prevLX && s.LY >= prevLY;
        local_ok = local_ok && (r.pushesX > 0 || s.LX == prevLX) && (r.pushesY > 0 || s.LY == prevLY);
        vector_ok = vector_ok && (s.vLX - prevX).norm() <= s.LX - prevLX + 1e-12;
        vector_ok = vector_ok && (s.vLY - prevY).norm() <= s.LY - prevLY + 1e-12;
        prevLX = s.LX;
        prevLY = s.LY;
        prevX = s.vLX;
        prevY = s.vLY;
        return true;
    });
    CHECK(p.steps == 1000000);
    CHECK(local_ok);
    CHECK(vector_ok);
    CHECK(p.final_state.LX > 0.0);
    CHECK(p.final_state.LY > 0.0);
}

TEST_CASE("a lone pushed ball moves by minus its vector local time")
{
    // with two balls X also moves when Y transmits a push, which vLX does not record
    SimConfig c;
    c.space = Space::torus(2, 6.0);
    c.dt = 1e-3;
    c.t_end = 200.0;
    c.seed = 18;
    c.two_balls = false;
    const auto s0 = SystemState::make(c.space, Vec{3.0, 4.5}, Vec{3.0, 3.0}, Vec{0.5, 0.5});
    const auto p = run_path(c, s0);
    CHECK(p.final_state.LX > 1.0);
    CHECK((p.final_state.fX.coords - (s0.X - p.final_state.vLX)).norm() < 1e-6);
}

TEST_CASE("run_path is deterministic")
{
    SimConfig c;
    c.space = Space::torus(2, 10.0);
    c.dt = 1e-3;
    c.t_end = 20.0;
    c.seed = 99;
    c.adaptive = true;
    c.snapshot_stride = 10;
    const auto s0 = SystemState::make(c.space, Vec{4.0, 5.0}, Vec{2.5, 5.0}, Vec{7.5, 5.0});
    const auto a = run_path(c, s0), b = run_path(c, s0);
    REQUIRE(a.ledger.size() == b.ledger.size());
    for (std::size_t i = 0; i < a.ledger.size(); ++i)
    {
        CHECK(a.ledger.entries()[i].t == b.ledger.entries()[i].t);
        CHECK(a.ledger.entries()[i].L == b.ledger.entries()[i].L);
    }
    CHECK(a.final_state.X == b.final_state.X);
    CHECK(a.snapshots.size() == b.snapshots.size());
}

TEST_CASE("symmetric start: first ball touched is a fair coin")
{
    SimConfig c = plane();
    c.check_invariants = false;
    std::size_t hits_x = 0, total = 0;
    for (std::uint64_t seed = 1; seed <= 2000; ++seed)
    {
        c.seed = seed;
        // B on the perpendicular bisector of X and Y
        Engine e(c, SystemState::make(c.space, Vec{0.0, 0.3}, Vec{-1.5, 0.0}, Vec{1.5, 0.0}));
        while (e.state().t < 20.0)
        {
            const auto r = e.advance();
            if (r.pushesX || r.pushesY)
            {
                ++total;
                hits_x += r.pushesX > 0 && r.dLX >= r.dLY;
                break;
            }
        }
    }
    REQUIRE(total > 1500);
    CHECK(binomial_two_sided_p(hits_x, total, 0.5) > 0.01);
}

TEST_CASE("adaptive engine only coarsens away from the balls")
{
    SimConfig c = plane(Mode::Frozen);
    c.two_balls = false;
    c.adaptive = true;
    c.far_field_radius = 4.0;
    Engine e(c, SystemState::make(c.space, Vec{1.0, 0.0}, Vec{0.0, 0.0}, Vec{0.0, 0.0}));
    bool ok = true;
    for (int i = 0; i < 100000; ++i)
    {
        const double gap = e.state().B.norm() - 1.0;
        const auto r = e.advance();
        if (!r.far_jump)
            ok = ok && r.h >= c.dt && r.h <= std::max(c.dt, gap * gap / (c.adaptive_kappa * c.adaptive_kappa)) + 1e-15;
        ok = ok && e.state().B.norm() <= 4.0 + 1.0;
    }
    CHECK(ok);
}
