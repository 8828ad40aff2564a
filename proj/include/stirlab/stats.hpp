#pragma once

#include "stirlab/geometry.hpp"
#include "stirlab/vec.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace stirlab
{
    struct EstimatorResult
    {
        double value = 0.0;
        double std_error = 0.0;
        std::size_t n = 0;
        std::string label;

        /// |value - target| in units of std_error (infinity if std_error == 0
        /// and the values differ).
        double z_score(double target) const;
    };

    /// Mean with a batch-means standard error over `batches` contiguous batches
    /// (at least 16; falls back to the iid formula when n is too small).
    EstimatorResult batch_mean(std::span<const double> samples, std::size_t batches = 32,
                               std::string label = {});

    /// Linear combination sum w_i X_i of independent estimates.
    EstimatorResult combine(std::span<const EstimatorResult> parts, std::span<const double> weights,
                            std::string label = {});

    /// Value at delta = 0 of the polynomial through (delta_i, value_i):
    /// linear for two levels, quadratic for three.
    EstimatorResult richardson(std::span<const double> deltas, std::span<const EstimatorResult> values,
                               std::string label = {});

    double normal_cdf(double x);

    /// Reference laws for goodness-of-fit tests.
    class ReferenceLaw
    {
    public:
        enum class Kind
        {
            Exponential,
            Normal,
            UniformTorus,
            Empirical
        };

        static ReferenceLaw exponential(double rate);
        static ReferenceLaw normal(double mean, double variance);
        /// Uniform law on [0, edge)^d; its one-dimensional cdf is that of a
        /// single coordinate.
        static ReferenceLaw uniform_torus(int dim, double edge);
        static ReferenceLaw empirical(std::vector<double> table);

        Kind kind() const { return kind_; }
        double cdf(double x) const;
        /// Probability of the axis-aligned cell grid^d, cell index `cell`.
        double cell_probability(int grid) const;
        const std::vector<double> &table() const { return table_; }
        double param(int i) const { return params_[i]; }

    private:
        Kind kind_ = Kind::Exponential;
        double params_[2] = {1.0, 0.0};
        int dim_ = 1;
        std::vector<double> table_; // sorted
    };

    struct TestStatistic
    {
        double statistic = 0.0;
        double p_value = 1.0;
        std::size_t n = 0;
    };

    /// Asymptotic Kolmogorov tail Q(lambda) = 2 sum (-1)^(k-1) exp(-2 k^2 lambda^2).
    double kolmogorov_q(double lambda);

    /// One-sample KS test against a continuous law; two-sample test when the
    /// law is Empirical. Effective n with the Stephens correction for p.
    TestStatistic ks_test(std::span<const double> sample, const ReferenceLaw &law);
    TestStatistic ks_two_sample(std::span<const double> a, std::span<const double> b);

    /// Pearson chi-square goodness of fit; probabilities must sum to 1.
    TestStatistic chi_square_gof(std::span<const double> counts, std::span<const double> probs);
    /// Chi-square homogeneity of two histograms over the same bins.
    TestStatistic chi_square_homogeneity(std::span<const double> a, std::span<const double> b);

    /// Two-sided exact binomial test of H0: success probability p.
    double binomial_two_sided_p(std::size_t k, std::size_t n, double p);

    /// Two-proportion z-test p-value.
    double two_proportion_p(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2);

    /// n / (1 + 2 sum_k rho_k), summing autocorrelations until they first turn
    /// non-positive.
    double effective_sample_size(std::span<const double> series);

    /// Positive decay rate c of the fitted log-linear tail P(|X| > a) ~ exp(-c a)
    /// over the empirical quantile range [q_lo, q_hi].
    double tail_decay_rate(std::span<const double> samples, double q_lo = 0.5, double q_hi = 0.995);

    // ---- diffusion on the local-time clock ----

    struct DiffusionReport
    {
        std::vector<EstimatorResult> slopes; ///< one per component
        std::vector<std::vector<double>> correlation; ///< components x components
        double max_cross_correlation = 0.0; ///< largest |rho| between the two blocks
        double cross_correlation_stderr = 0.0;
        std::size_t increments = 0;
    };

    /// `positions[k]` is the unfolded configuration (one or two balls
    /// concatenated) at local-time level k * spacing. Increments over lags
    /// lag1 < lag2 (grid steps, overlapping windows) are multiplied by `scale`
    /// and local time by `time_scale`; the per-component slope is
    ///   (Var(lag2) - Var(lag1)) / ((lag2 - lag1) * spacing * time_scale),
    /// with a standard error from 16 contiguous batches.
    /// Cross correlations are between non-overlapping lag1 increments of the
    /// first `block` components and the rest.
    DiffusionReport diffusion_coefficient(std::span<const Vec> positions, double spacing, int lag1, int lag2,
                                          double scale, double time_scale, int block);

    // ---- stationary law ----

    struct StationaryReport
    {
        TestStatistic marginal_x; ///< chi-square over grid^d cells at the effective sample size
        TestStatistic marginal_y;
        TestStatistic distance_ks; ///< two-sample KS of |X-Y|/r vs reference
        double test_function_correlation = 0.0;
        double test_function_correlation_stderr = 0.0;
        double effective_n = 0.0; ///< minimum over |X-Y| and the Fourier modes of each coordinate
        EstimatorResult drift; ///< mean change of |X-Y| per sample, logged only
    };

    /// Samples are torus positions of the two balls taken along one or more
    /// long runs. `reference` holds brute-force |U-V|/r draws for independent
    /// uniform U, V. Throws Underpowered when the effective sample size is
    /// below 50.
    StationaryReport stationary_independence(std::span<const Vec> xs, std::span<const Vec> ys, const Space &space,
                                             std::span<const double> reference, int grid = 4);

    /// Draws n torus distances |U-V|/r for independent uniform U, V.
    std::vector<double> uniform_pair_distances(const Space &space, std::size_t n, std::uint64_t seed);

    /// Fraction of contact episodes attributed to ball X (0) rather than Y (1).
    EstimatorResult contact_split(std::span<const int> episode_balls);
} // namespace stirlab
