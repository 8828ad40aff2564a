#pragma once

#include "stirlab/rng.hpp"
#include "stirlab/stats.hpp"
#include "stirlab/vec.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace stirlab
{
    // ---- planar chain: reflected BM outside the unit disk sampled at inverse local times ----

    /// Angle of Z at local time l + delta given angle `theta` at l. The
    /// increment is wrapped Cauchy with rho = exp(-delta). delta > 0.
    double chain2d_step(double theta, double delta, Rng &rng);

    /// Circular density of the increment against the uniform measure:
    /// (1 - e^{-2t}) / |z - (e^{-t}, 0)|^2 at z = (cos theta, sin theta).
    double poisson_kernel_2d(double theta, double t);

    /// One path of the first vector-local-time component over [0, u]:
    /// left Riemann sum of cos(theta) along the chain with step delta (the last
    /// step is shortened to land on u). Initial angle uniform.
    double vector_local_time_2d_path(double u, double delta, Rng &rng);

    /// E (L^1_{sigma_u})^2 estimated over n_paths. Exact value u + e^{-u} - 1.
    EstimatorResult vector_local_time_2d(double u, std::size_t n_paths, double delta, std::uint64_t seed,
                                         unsigned threads = 1);

    // ---- d >= 3: defective sphere chain from the Kelvin transform ----

    struct SphereChainState
    {
        Vec v;
        double ell = 0.0;
        bool alive = true;
    };

    /// Kills the chain with probability 1 - e^{-(d-2) delta}; otherwise moves v
    /// to a Poisson-kernel sample from e^{-delta} v.
    SphereChainState kelvin_chain_step(const SphereChainState &state, double delta, Rng &rng);

    /// One path: sum of delta * v_1 over the chain until it dies, v_0 uniform.
    double kelvin_Linf_path(int d, double delta, Rng &rng);

    /// E (L^{1}_infinity)^2 at a fixed grid step.
    EstimatorResult kelvin_Linf_sq(int d, double delta, std::size_t n_paths, std::uint64_t seed,
                                   unsigned threads = 1);

    struct RefinedEstimate
    {
        std::vector<double> deltas;
        std::vector<EstimatorResult> levels;
        EstimatorResult extrapolated;
    };

    /// Runs kelvin_Linf_sq at each delta (independent seeds) and extrapolates
    /// to delta = 0 with the polynomial through all levels.
    RefinedEstimate kelvin_Linf_sq_refined(int d, std::span<const double> deltas, std::size_t n_paths,
                                           std::uint64_t seed, unsigned threads = 1);

    /// Closed form 2 / ((d-2)(d-1)d).
    double kelvin_Linf_sq_exact(int d);

    /// Expected value of the grid estimator at step delta (geometric killing,
    /// defective mean decay e^{-(d-1) delta} per step).
    double kelvin_Linf_sq_grid_mean(int d, double delta);

    // ---- scaling coupling ----

    struct CouplingState
    {
        double time = 0.0;      ///< real time of the free driver
        double running_min = 1.0; ///< M = min |B|, floored
        double clock = 0.0;     ///< C = int M^{-2} ds
        Vec u;                  ///< U = B / M
        double local_time = 0.0; ///< -log M
    };

    struct CouplingOptions
    {
        int dim = 3;
        /// Step on the coupled clock; real-time steps are dt * M^2, enlarged
        /// away from the sphere when `adaptive`.
        double dt = 1e-4;
        bool adaptive = true;
        double kappa = 6.0;
        double stop_radius_floor = 4.5399929762484854e-05; // e^{-10}
        /// |B| / M beyond which the path is resolved by an exact return to
        /// radius `return_ratio` * M or escape.
        double far_ratio = 4.0;
        double return_ratio = 2.0;
        std::vector<double> levels; ///< local-time levels at which U is recorded
        std::size_t trace_stride = 0; ///< 0 disables the state trace
    };

    struct CouplingPath
    {
        double local_time_inf = 0.0; ///< -log of the final running minimum
        bool hit_floor = false;
        std::vector<Vec> level_samples; ///< U at each requested level reached
        std::vector<CouplingState> trace;
        std::size_t steps = 0;
    };

    /// Free Brownian motion from e_1 with running minimum M; U = B/M is
    /// reflected Brownian motion outside the unit ball on the clock C with
    /// local time -log M.
    CouplingPath scaling_coupling_path(const CouplingOptions &opt, Rng &rng);
} // namespace stirlab
