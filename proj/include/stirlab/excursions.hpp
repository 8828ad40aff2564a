#pragma once

#include "stirlab/contact.hpp"
#include "stirlab/stats.hpp"
#include "stirlab/vec.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stirlab
{
    enum class ExcursionFunctional
    {
        Cross,    ///< H(reach radius b)
        Lifetime, ///< t / L_t
        Lambda2   ///< E (first vector local-time component at T_b)^2
    };

    struct ExcursionLawEstimate
    {
        ExcursionFunctional id = ExcursionFunctional::Cross;
        double value = 0.0;
        double std_error = 0.0;
        double delta_used = 0.0; ///< smallest delta of a delta -> 0 scheme
        std::size_t n = 0;
        std::vector<double> deltas;
        std::vector<EstimatorResult> levels; ///< per-delta estimates

        EstimatorResult as_result(std::string label = {}) const;
    };

    /// One excursion of the driver away from a ball surface, from the last
    /// contact before it to the next contact.
    struct ExcursionRecord
    {
        Vec start;   ///< driver at the last contact
        Vec end;     ///< driver at the closing contact (or at the horizon if censored)
        double t_start = 0.0;
        double zeta = 0.0;
        double max_radius = 1.0; ///< largest distance from the originating ball center
        int which_ball = 0;      ///< 0 = X, 1 = Y
        int end_ball = 0;        ///< ball touched at the closing contact
        bool censored = false;
    };

    /// Closed-form crossing rate from radius 1 to radius b:
    /// 1/log b for d = 2, (d-2)/(1 - b^(2-d)) for d >= 3, d-2 at b = infinity.
    double lambda1(int d, double b);

    /// Exact probability that Brownian motion from radius 1 + delta reaches
    /// radius b before radius 1.
    double crossing_probability(int d, double b, double delta);

    /// P(reach b before 1 | start at 1 + delta) / delta by walk on spheres for
    /// every delta, extrapolated linearly through the two smallest deltas.
    ExcursionLawEstimate crossing_rate_estimate(int d, double b, std::span<const double> deltas, std::size_t n,
                                                std::uint64_t seed, unsigned threads = 1, double eps = 1e-6);

    struct Lambda2Result
    {
        ExcursionLawEstimate estimate;
        std::vector<double> samples; ///< first vector local-time component at T_b
        std::vector<double> local_times;
        double tail_rate = 0.0; ///< fitted decay rate of P(|sample| > a)
        std::size_t escaped = 0;
    };

    /// Frozen single ball on R^d, driver started uniformly on the unit sphere
    /// and stopped at the first exit from radius b. Uses cfg.dt, cfg.seed and
    /// the adaptive settings; the rest of cfg is overridden.
    Lambda2Result lambda2_estimate(int d, double b, std::size_t n_paths, const SimConfig &cfg,
                                   unsigned threads = 1);

    /// Splits a run into excursions. An excursion opens once the driver is
    /// farther than `threshold` from the ball it last touched and closes at
    /// the next contact.
    class ExcursionTracker
    {
    public:
        ExcursionTracker(const SimConfig &cfg, double threshold);
        /// Threshold dt^(1/4).
        explicit ExcursionTracker(const SimConfig &cfg);

        void observe(const SystemState &s, const StepReport &rep);
        /// Closes an open excursion as censored.
        void finish(const SystemState &s);

        const std::vector<ExcursionRecord> &records() const { return records_; }
        std::size_t crossings(double radius) const;

    private:
        SimConfig cfg_;
        double threshold_;
        bool touched_ = false;
        bool away_ = false;
        double last_t_ = 0.0;
        Vec last_point_;
        int last_ball_ = 0;
        double max_radius_ = 1.0;
        std::vector<ExcursionRecord> records_;
    };

    struct LifetimeReport
    {
        EstimatorResult t_over_L;      ///< horizon / total local time
        EstimatorResult mean_lifetime; ///< mean zeta over closed excursions
        double target = 0.0;           ///< |D| / s_d
        std::size_t crossings = 0;     ///< closed excursions reaching radius 2
        double horizon = 0.0;
        double local_time = 0.0;
        std::size_t steps = 0;
    };

    /// Surface area of the unit sphere in R^d.
    double sphere_area(int d);
    /// Volume of the unit ball in R^d.
    double ball_volume(int d);

    /// Frozen two-ball torus run up to cfg.t_end. Throws Underpowered with
    /// fewer than `min_crossings` crossings of radius 2.
    LifetimeReport lifetime_per_local_time(const SimConfig &cfg, const SystemState &initial,
                                           std::size_t min_crossings = 50);

    struct ShellCrossingReport
    {
        std::vector<double> samples; ///< local time per cycle
        EstimatorResult mean;
        TestStatistic ks;            ///< against Exponential(lambda1(d, b))
        double rate = 0.0;
        std::size_t steps = 0;
        std::size_t restarts = 0;    ///< cycles restarted after escape
    };

    /// Frozen single ball on R^d: local time accumulated from the unit sphere
    /// until the first exit from radius b, over n_cycles cycles. Each cycle
    /// starts where the exact return from the previous crossing point lands
    /// (on escape, at e_1).
    ShellCrossingReport shell_crossing_law(int d, double b, std::size_t n_cycles, const SimConfig &cfg,
                                           unsigned threads = 1);
} // namespace stirlab
