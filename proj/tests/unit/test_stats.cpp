#include "doctest.h"

#include "stirlab/error.hpp"
#include "stirlab/rng.hpp"
#include "stirlab/stats.hpp"

#include <cmath>

using namespace stirlab;

TEST_CASE("KS examples")
{
    const std::vector<double> s = {0.1, 0.5, 1.2};
    CHECK(ks_test(s, ReferenceLaw::exponential(1.0)).statistic == doctest::Approx(0.3012).epsilon(1e-3));
    const std::vector<double> c = {0.7, 0.7, 0.7, 0.7};
    CHECK(ks_test(c, ReferenceLaw::normal(0.0, 1.0)).statistic >= 0.5);
    CHECK_THROWS_AS(ks_test(std::vector<double>{}, ReferenceLaw::exponential(1.0)), Error);
}

TEST_CASE("KS p-values are uniform under the null")
{
    Rng rng(1);
    std::vector<double> ps;
    for (int t = 0; t < 400; ++t)
    {
        std::vector<double> x;
        for (int i = 0; i < 200; ++i)
            x.push_back(rng.exponential(2.0));
        ps.push_back(ks_test(x, ReferenceLaw::exponential(2.0)).p_value);
    }
    CHECK(ks_test(ps, ReferenceLaw::uniform_torus(1, 1.0)).p_value > 0.01);
}

TEST_CASE("two-sample KS is symmetric")
{
    Rng rng(2);
    std::vector<double> a, b;
    for (int i = 0; i < 500; ++i)
        a.push_back(rng.normal());
    for (int i = 0; i < 300; ++i)
        b.push_back(rng.normal() + 0.1);
    const auto ab = ks_two_sample(a, b), ba = ks_two_sample(b, a);
    CHECK(ab.statistic == ba.statistic);
    CHECK(ab.p_value == ba.p_value);
    const auto emp = ks_test(a, ReferenceLaw::empirical(b));
    CHECK(emp.statistic == doctest::Approx(ab.statistic));
}

TEST_CASE("batch means: stderr and scaling")
{
    Rng rng(3);
    std::vector<double> x;
    for (int i = 0; i < 64000; ++i)
        x.push_back(rng.normal());
    const auto half = batch_mean(std::span<const double>(x.data(), 32000));
    const auto full = batch_mean(x);
    CHECK(full.n == 64000);
    CHECK(std::abs(full.std_error * std::sqrt(64000.0) - 1.0) < 0.3);
    // doubling n divides the stderr by sqrt 2, within 30%
    const double ratio = half.std_error / full.std_error;
    CHECK(std::abs(ratio / std::sqrt(2.0) - 1.0) < 0.3);
    CHECK_THROWS_AS(batch_mean(std::vector<double>{}), Error);
}

TEST_CASE("richardson and combine")
{
    const std::vector<double> d2 = {0.1, 0.05};
    const std::vector<EstimatorResult> lin = {{1.1, 0.01, 10, ""}, {1.05, 0.01, 10, ""}};
    CHECK(richardson(d2, lin).value == doctest::Approx(1.0));
    const std::vector<double> d3 = {0.2, 0.1, 0.05};
    // f(d) = 1 + d + d^2
    const std::vector<EstimatorResult> quad = {{1.24, 0, 1, ""}, {1.11, 0, 1, ""}, {1.0525, 0, 1, ""}};
    CHECK(richardson(d3, quad).value == doctest::Approx(1.0));
    const std::vector<double> w = {1.0, -1.0};
    const auto c = combine(lin, w);
    CHECK(c.value == doctest::Approx(0.05));
    CHECK(c.std_error == doctest::Approx(std::sqrt(2e-4)));
}

TEST_CASE("chi-square and binomial tests")
{
    const std::vector<double> counts = {25, 25, 25, 25};
    const std::vector<double> probs = {0.25, 0.25, 0.25, 0.25};
    const auto t = chi_square_gof(counts, probs);
    CHECK(t.statistic == doctest::Approx(0.0));
    CHECK(t.p_value == doctest::Approx(1.0));
    const std::vector<double> skew = {70, 10, 10, 10};
    CHECK(chi_square_gof(skew, probs).p_value < 1e-10);
    CHECK(binomial_two_sided_p(50, 100, 0.5) == doctest::Approx(1.0));
    CHECK(binomial_two_sided_p(10, 100, 0.5) < 1e-10);
    CHECK(two_proportion_p(50, 100, 50, 100) == doctest::Approx(1.0));
}

TEST_CASE("effective sample size of an AR(1) series")
{
    Rng rng(4);
    const double phi = 0.8;
    std::vector<double> x(100000);
    double v = 0.0;
    for (auto &e : x)
        e = v = phi * v + rng.normal();
    const double ess = effective_sample_size(x);
    const double expected = x.size() * (1 - phi) / (1 + phi);
    CHECK(ess == doctest::Approx(expected).epsilon(0.15));
}

TEST_CASE("tail decay rate of an exponential")
{
    Rng rng(5);
    std::vector<double> x;
    for (int i = 0; i < 100000; ++i)
        x.push_back(rng.exponential(3.0));
    CHECK(tail_decay_rate(x) == doctest::Approx(3.0).epsilon(0.05));
}

TEST_CASE("diffusion coefficient of Brownian motion")
{
    Rng rng(6);
    // two independent planar Brownian motions sampled at unit spacing
    std::vector<Vec> pos{Vec::zero(4)};
    for (int i = 0; i < 200000; ++i)
        pos.push_back(pos.back() + rng.gaussian(4, 1.0));
    const auto r = diffusion_coefficient(pos, 1.0, 4, 8, 1.0, 1.0, 2);
    for (const auto &s : r.slopes)
        CHECK(s.z_score(1.0) < 3.0);
    CHECK(r.max_cross_correlation < 4.0 * r.cross_correlation_stderr);
    CHECK(r.cross_correlation_stderr <= 0.015);

    std::vector<Vec> few(pos.begin(), pos.begin() + 500);
    CHECK_THROWS_WITH_AS(diffusion_coefficient(few, 1.0, 4, 8, 1.0, 1.0, 2), "underpowered", Underpowered);
}

TEST_CASE("stationary independence on independent uniform pairs")
{
    Rng rng(7);
    const Space s = Space::torus(2, 20.0);
    std::vector<Vec> xs, ys;
    for (int i = 0; i < 5000; ++i)
    {
        xs.push_back(Vec{20 * rng.uniform(), 20 * rng.uniform()});
        ys.push_back(Vec{20 * rng.uniform(), 20 * rng.uniform()});
    }
    const auto ref = uniform_pair_distances(s, 200000, 8);
    const auto r = stationary_independence(xs, ys, s, ref);
    CHECK(r.marginal_x.p_value > 0.01);
    CHECK(r.marginal_y.p_value > 0.01);
    CHECK(r.distance_ks.statistic < 0.05);
    CHECK(std::abs(r.test_function_correlation) < 3 * r.test_function_correlation_stderr);

    std::vector<Vec> stuck(100, Vec{1.0, 1.0});
    CHECK_THROWS_AS(stationary_independence(stuck, stuck, s, ref), Error);
}

TEST_CASE("contact split")
{
    std::vector<int> balls;
    for (int i = 0; i < 1000; ++i)
        balls.push_back(i % 2);
    const auto r = contact_split(balls);
    CHECK(r.value == doctest::Approx(0.5));
    CHECK(r.n == 1000);
}
