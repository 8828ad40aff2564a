#include "doctest.h"

#include "stirlab/error.hpp"
#include "stirlab/oracles.hpp"
#include "stirlab/samplers.hpp"
#include "stirlab/stats.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <numbers>

using namespace stirlab;

namespace
{
    constexpr double kPi = std::numbers::pi;

    double wrap_angle(double a)
    {
        a = std::fmod(a, 2 * kPi);
        return a < -kPi ? a + 2 * kPi : (a >= kPi ? a - 2 * kPi : a);
    }
} // namespace

TEST_CASE("planar Poisson kernel")
{
    CHECK(poisson_kernel_2d(0.0, std::log(2.0)) == doctest::Approx(3.0));
    using boost::math::quadrature::gauss_kronrod;
    for (double t : {0.1, 0.5, 2.0})
    {
        auto f = [t](double th) { return poisson_kernel_2d(th, t) / (2 * kPi); };
        auto g = [t](double th) { return std::cos(th) * poisson_kernel_2d(th, t) / (2 * kPi); };
        CHECK(gauss_kronrod<double, 61>::integrate(f, -kPi, kPi, 15, 1e-12) == doctest::Approx(1.0).epsilon(1e-6));
        CHECK(gauss_kronrod<double, 61>::integrate(g, -kPi, kPi, 15, 1e-12) ==
              doctest::Approx(std::exp(-t)).epsilon(1e-6));
    }
}

TEST_CASE("chain2d step: mean cosine and large-delta uniformity")
{
    Rng rng(11);
    std::vector<double> c;
    for (int i = 0; i < 1000000; ++i)
        c.push_back(std::cos(chain2d_step(0.0, 0.5, rng)));
    CHECK(batch_mean(c).z_score(std::exp(-0.5)) < 3.0);

    std::vector<double> u;
    for (int i = 0; i < 20000; ++i)
        u.push_back((wrap_angle(chain2d_step(0.0, 30.0, rng)) + kPi) / (2 * kPi));
    CHECK(ks_test(u, ReferenceLaw::uniform_torus(1, 1.0)).p_value > 0.01);
}

TEST_CASE("chain2d composition: two half steps equal one step")
{
    Rng rng(12);
    std::vector<double> a, b;
    for (int i = 0; i < 20000; ++i)
    {
        a.push_back(wrap_angle(chain2d_step(chain2d_step(0.0, 0.3, rng), 0.3, rng)));
        b.push_back(wrap_angle(chain2d_step(0.0, 0.6, rng)));
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}

TEST_CASE("chain2d Markov property: cos autocorrelation e^{-l}")
{
    Rng rng(13);
    const double lag = 0.7;
    std::vector<double> prod;
    for (int i = 0; i < 200000; ++i)
    {
        const double th = 2 * kPi * rng.uniform();
        prod.push_back(2.0 * std::cos(th) * std::cos(chain2d_step(th, lag, rng)));
    }
    CHECK(batch_mean(prod).z_score(std::exp(-lag)) < 3.0);
}

TEST_CASE("vector local time in the plane")
{
    CHECK(vector_local_time_2d(1.0, 100000, 0.05, 7).z_score(std::exp(-1.0)) < 3.0);
    const auto e = vector_local_time_2d(0.1, 50000, 0.002, 8);
    CHECK(e.z_score(0.1 + std::exp(-0.1) - 1.0) < 3.0);
}

TEST_CASE("Kelvin chain step")
{
    Rng rng(21);
    const int n = 200000;
    int alive = 0;
    std::vector<double> proj;
    const Vec v = Vec::axis(3, 0);
    for (int i = 0; i < n; ++i)
    {
        const auto s = kelvin_chain_step({v, 0.0, true}, 1.0, rng);
        CHECK(s.ell == 1.0);
        if (s.alive)
        {
            ++alive;
            CHECK(s.v.norm() == doctest::Approx(1.0).epsilon(1e-12));
            proj.push_back(s.v[0]);
        }
        else
            proj.push_back(0.0);
    }
    CHECK(binomial_two_sided_p(alive, n, std::exp(-1.0)) > 0.01);
    // defective mean e^{delta (1 - d)}
    CHECK(batch_mean(proj).z_score(std::exp(-2.0)) < 3.0);
}

TEST_CASE("Kelvin chain keeps the uniform law")
{
    Rng rng(22);
    const int bins = 10;
    std::vector<double> counts(bins, 0.0);
    for (int i = 0; i < 50000; ++i)
    {
        auto s = kelvin_chain_step({rng.direction(3), 0.0, true}, 0.3, rng);
        if (!s.alive)
            continue;
        const int k = std::min(bins - 1, int((s.v[0] + 1.0) / 2.0 * bins));
        counts[k] += 1.0;
    }
    const std::vector<double> probs(bins, 1.0 / bins);
    CHECK(chi_square_gof(counts, probs).p_value > 0.01);
}

TEST_CASE("Kelvin constant closed form and grid mean")
{
    CHECK(kelvin_Linf_sq_exact(3) == doctest::Approx(1.0 / 3));
    CHECK(kelvin_Linf_sq_exact(4) == doctest::Approx(1.0 / 12));
    CHECK(kelvin_Linf_sq_exact(6) == doctest::Approx(2.0 / 120));
    CHECK(kelvin_Linf_sq_grid_mean(3, 1e-6) == doctest::Approx(1.0 / 3).epsilon(1e-4));
    CHECK(kelvin_Linf_sq(3, 0.1, 200000, 3).z_score(kelvin_Linf_sq_grid_mean(3, 0.1)) < 3.0);
    CHECK(kelvin_Linf_sq(6, 0.1, 200000, 4).z_score(kelvin_Linf_sq_grid_mean(6, 0.1)) < 3.0);
}

TEST_CASE("ball harmonic sampler: centre is uniform, mean is the harmonic extension")
{
    Rng rng(31);
    std::vector<double> c0, c1;
    const Vec x{0.6, 0.0, 0.0};
    for (int i = 0; i < 100000; ++i)
    {
        c0.push_back(sample_ball_harmonic(Vec::zero(3), rng)[0]);
        c1.push_back(sample_ball_harmonic(x, rng)[0]);
    }
    std::vector<double> shifted;
    for (double v : c0)
        shifted.push_back((v + 1.0) / 2.0);
    CHECK(ks_test(shifted, ReferenceLaw::uniform_torus(1, 1.0)).p_value > 0.01);
    // z_1 is harmonic, so its exit mean equals x_1
    CHECK(batch_mean(c1).z_score(0.6) < 3.0);
}

TEST_CASE("exterior return hit probability")
{
    Rng rng(32);
    int hits = 0;
    const int n = 100000;
    for (int i = 0; i < n; ++i)
        hits += exterior_return(Vec{3.0, 0.0, 0.0}, 1.0, rng).has_value();
    CHECK(binomial_two_sided_p(hits, n, 1.0 / 3.0) > 0.01);
}

TEST_CASE("scaling coupling")
{
    Rng rng(41);
    CouplingOptions opt;
    opt.dim = 3;
    opt.trace_stride = 50;
    opt.levels = {0.5};
    std::vector<double> l;
    bool mono = true;
    for (int i = 0; i < 2000; ++i)
    {
        const auto p = scaling_coupling_path(opt, rng);
        l.push_back(p.local_time_inf);
        for (std::size_t k = 1; k < p.trace.size(); ++k)
        {
            mono = mono && p.trace[k].running_min <= p.trace[k - 1].running_min;
            mono = mono && p.trace[k].u.norm() >= 1.0 - 1e-12;
        }
    }
    CHECK(mono);
    CHECK(ks_test(l, ReferenceLaw::exponential(1.0)).p_value > 0.01);
    opt.dim = 2;
    CHECK_THROWS_AS(scaling_coupling_path(opt, rng), Error);
}

TEST_CASE("coupling and Kelvin chain agree at a fixed level")
{
    Rng rng(42);
    CouplingOptions opt;
    opt.dim = 3;
    opt.levels = {0.5};
    std::vector<double> a, b;
    while (a.size() < 3000)
    {
        const auto p = scaling_coupling_path(opt, rng);
        if (!p.level_samples.empty())
            a.push_back(p.level_samples[0][0]);
    }
    while (b.size() < 20000)
    {
        const auto s = kelvin_chain_step({Vec::axis(3, 0), 0.0, true}, 0.5, rng);
        if (s.alive)
            b.push_back(s.v[0]);
    }
    CHECK(ks_two_sample(a, b).p_value > 0.01);
}
