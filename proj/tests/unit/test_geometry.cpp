#include "doctest.h"

#include "stirlab/error.hpp"
#include "stirlab/geometry.hpp"
#include "stirlab/rng.hpp"

using namespace stirlab;

namespace
{
    void check_vec(const Vec &a, const Vec &b, double tol = 1e-12)
    {
        REQUIRE(a.dim == b.dim);
        for (int i = 0; i < a.dim; ++i)
            CHECK(a[i] == doctest::Approx(b[i]).epsilon(tol));
    }
} // namespace

TEST_CASE("wrap examples")
{
    const Space s = Space::torus(2, 10.0);
    const Vec w = wrap(Vec{10.5, -0.2}, s);
    CHECK(w[0] == doctest::Approx(0.5));
    CHECK(w[1] == doctest::Approx(9.8));
    CHECK(wrap(Vec{0.0, 0.0}, s) == Vec{0.0, 0.0});
    CHECK(wrap(Vec{20.0, 10.0}, s) == Vec{0.0, 0.0});
    // tiny negatives must not round up to r
    const Vec t = wrap(Vec{-1e-18, 3.0}, s);
    CHECK(t[0] >= 0.0);
    CHECK(t[0] < 10.0);
}

TEST_CASE("canonical is the identity on R^d")
{
    const Vec p{-3.5, 12.0, 7.0};
    CHECK(canonical(p, Space::euclidean(3)) == p);
}

TEST_CASE("displacement examples")
{
    const Space s = Space::torus(2, 10.0);
    check_vec(displacement(Vec{0.5, 0.5}, Vec{9.5, 9.5}, s), Vec{-1.0, -1.0});
    CHECK(displacement(Vec{3.0, 4.0}, Vec{3.0, 4.0}, s) == Vec{0.0, 0.0});
    check_vec(displacement(Vec{0.0, 0.0}, Vec{5.0, 0.0}, s), Vec{5.0, 0.0});
    check_vec(displacement(Vec{5.0, 0.0}, Vec{0.0, 0.0}, s), Vec{5.0, 0.0});
}

TEST_CASE("outward normal examples")
{
    check_vec(outward_normal(Vec{0.0, 0.0}, Vec{2.0, 0.0}, Space::euclidean(2)), Vec{1.0, 0.0});
    check_vec(outward_normal(Vec{0.0, 0.0}, Vec{0.0, -3.0}, Space::euclidean(2)), Vec{0.0, -1.0});
    check_vec(outward_normal(Vec{9.0, 0.0}, Vec{1.0, 0.0}, Space::torus(2, 10.0)), Vec{1.0, 0.0});
    CHECK_THROWS_WITH_AS(outward_normal(Vec{1.0, 1.0}, Vec{1.0, 1.0}, Space::euclidean(2)), "degenerate normal",
                         Error);
}

TEST_CASE("unfold examples")
{
    const Space s = Space::torus(2, 10.0);
    UnfoldedPoint p{Vec{9.8, 1.0}, Vec{9.8, 1.0}};
    auto q = unfold_step(p, Vec{0.1, 1.0}, s);
    CHECK(q.coords[0] == doctest::Approx(10.1));
    CHECK(q.origin_ref[0] == doctest::Approx(0.1));

    UnfoldedPoint a{Vec{5.0, 5.0}, Vec{5.0, 5.0}};
    CHECK(unfold_step(a, Vec{5.2, 5.0}, s).coords[0] == doctest::Approx(5.2));

    // three laps forward in steps of 2
    UnfoldedPoint c{Vec{1.0, 1.0}, Vec{1.0, 1.0}};
    for (int k = 1; k <= 15; ++k)
        c = unfold_step(c, wrap(Vec{1.0 + 2.0 * k, 1.0}, s), s);
    CHECK(c.coords[0] == doctest::Approx(31.0));

    CHECK_THROWS_WITH_AS(unfold_step(a, Vec{0.0, 5.0}, s), "unfolding ambiguity", Error);
}

TEST_CASE("displacement is bounded by r sqrt(d) / 2")
{
    Rng rng(3);
    for (int i = 0; i < 10000; ++i)
    {
        const Space s = Space::torus(3, 7.0);
        const Vec a = wrap(rng.gaussian(3, 100.0), s), b = wrap(rng.gaussian(3, 100.0), s);
        CHECK(displacement(a, b, s).norm() <= 7.0 * std::sqrt(3.0) / 2.0 + 1e-12);
    }
}

TEST_CASE("space validation")
{
    CHECK_THROWS_AS(Space::torus(2, 3.0).validate(), Error);
    CHECK_THROWS_AS(Space::euclidean(1).validate(), Error);
    CHECK_NOTHROW(Space::torus(3, 8.0).validate());
}
