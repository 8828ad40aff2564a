#pragma once

#include "stirlab/geometry.hpp"
#include "stirlab/rng.hpp"
#include "stirlab/stats.hpp"
#include "stirlab/vec.hpp"

#include <cstdint>
#include <vector>

namespace stirlab
{
    /// Disjoint balls removed from a torus or from R^d.
    struct Obstacles
    {
        std::vector<Vec> centers;
        std::vector<double> radii;
        Space space;

        /// Throws if sizes differ or two balls overlap.
        void validate() const;
    };

    struct WosOptions
    {
        double eps = 1e-4;              ///< absorption shell width
        std::size_t max_jumps = 1000000;
        /// Outer absorbing sphere around the first center (R^d only); 0 turns
        /// on the exact far-field return instead.
        double kill_radius = 0.0;
    };

    struct WosHit
    {
        int obstacle = -1; ///< index of the ball hit; -1 on escape or kill
        Vec point;         ///< radial projection of the last position onto that sphere
        std::size_t jumps = 0;
    };

    /// Walk on spheres from `start` until within eps of a ball. Jump radius is
    /// the distance to the nearest surface, capped at r/4 on a torus.
    WosHit wos_hit(const Vec &start, const Obstacles &obs, const WosOptions &opt, Rng &rng);

    /// Hit counts per obstacle and the histogram of cos(angle) between the
    /// hit point on obstacle 0 and a reference direction (equal-width bins in
    /// [-1, 1]).
    struct HitDistributionEstimate
    {
        std::vector<std::size_t> counts;
        std::vector<double> bin_counts;
        std::size_t escaped = 0;
        std::size_t n = 0;
        double mean_jumps = 0.0;
    };

    HitDistributionEstimate sample_hits(const Vec &start, const Obstacles &obs, const WosOptions &opt,
                                        const Vec &reference_dir, int bins, std::size_t n, std::uint64_t seed,
                                        unsigned threads = 1);

    /// Bin probabilities of cos(angle) for the uniform law on the unit sphere
    /// in R^d (flat for d = 3).
    std::vector<double> uniform_cosine_bins(int d, int bins);

    /// The standard two-ball configuration: x1 at the torus center, y1 at
    /// distance r/2 along the first axis, z = x1 + b e_2.
    struct TwoBallSetup
    {
        Obstacles obstacles;
        Vec z;
    };
    TwoBallSetup two_ball_setup(int d, double b, double r);

    /// mu(S(x1,1)) / mu(S(y1,1)) from z with the delta-method standard error.
    /// Preconditions: |x1 - y1| > 2b, r > 8b, z on S(x1,b) or S(y1,b).
    EstimatorResult hitting_ratio(const Vec &z, const Vec &x1, const Vec &y1, double b, const Space &space,
                                  std::size_t n, std::uint64_t seed, unsigned threads = 1, double eps = 1e-4);
    EstimatorResult hitting_ratio(const HitDistributionEstimate &h);

    struct ExitUniformity
    {
        double tv_raw = 0.0;
        double null_mean = 0.0; ///< mean TV of a uniform multinomial at the same n
        EstimatorResult tv;     ///< tv_raw - null_mean, bootstrap standard error
        TestStatistic chi_square;
        HitDistributionEstimate hits;
    };

    /// Total variation between the binned exit law on S(x1,1) and the
    /// uniform law. Throws Underpowered below 20 expected hits per bin.
    ExitUniformity exit_uniformity(const HitDistributionEstimate &h, int d, std::uint64_t seed);
    ExitUniformity exit_uniformity(const Vec &z, const Vec &x1, const Vec &y1, double b, const Space &space,
                                   std::size_t n, std::uint64_t seed, unsigned threads = 1, int bins = 20,
                                   double eps = 1e-4);

    /// Monte Carlo estimate of the integral of (z . e_1)^2 over the uniform
    /// sphere, and the same integral by quadrature. Both equal 1/d.
    EstimatorResult sphere_moment_check(int d, std::size_t n, std::uint64_t seed);
    double sphere_moment_quadrature(int d);
} // namespace stirlab
