#pragma once

#include "stirlab/clocks.hpp"
#include "stirlab/geometry.hpp"
#include "stirlab/rng.hpp"
#include "stirlab/vec.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace stirlab
{
    enum class Mode
    {
        Pushing, ///< B moves freely and pushes the balls
        Frozen   ///< balls fixed, B reflects off them
    };

    struct SimConfig
    {
        Space space = Space::euclidean(2);
        double dt = 1e-4;
        double t_end = 0.0;
        std::uint64_t seed = 1;
        double tol_overlap = 1e-9;
        int max_contact_iters = 64;
        Mode mode = Mode::Pushing;
        bool two_balls = true;

        /// Step size h = clamp((gap / adaptive_kappa)^2, dt, max_step), where gap
        /// is the distance from B to the nearest ball surface (or target
        /// sphere). Free Brownian increments are exact for any h, so this only
        /// coarsens the stretches far from every boundary.
        bool adaptive = false;
        double adaptive_kappa = 4.0;
        double max_step = 0.0; ///< 0: (r / (4 kappa))^2 on a torus, unbounded on R^d

        /// Single ball on R^d: once |B - X| reaches far_field_radius, B is moved
        /// by an exact harmonic-measure jump to the sphere of radius
        /// far_field_return around X, or escapes (d >= 3). Wall-clock time is not
        /// advanced by the jump. 0 disables.
        double far_field_radius = 0.0;
        double far_field_return = 2.0;

        std::size_t snapshot_stride = 0; ///< 0: no snapshots
        bool check_invariants = true;

        /// Throws on out-of-range parameters.
        void validate() const;
    };

    struct SystemState
    {
        double t = 0.0;
        Vec B, X, Y;
        UnfoldedPoint fB, fX, fY;
        double LX = 0.0, LY = 0.0;
        Vec vLX, vLY;

        /// Canonical state at time 0 with zero local times; unfolded copies
        /// start at the canonical points.
        static SystemState make(const Space &space, const Vec &b, const Vec &x, const Vec &y);
    };

    struct StepReport
    {
        double dLX = 0.0, dLY = 0.0;
        int pushesX = 0, pushesY = 0;
        bool double_contact = false;
        double h = 0.0;        ///< time step taken
        bool far_jump = false; ///< B was moved by the far-field return
    };

    struct ContactResult
    {
        Vec X, Y;
        Vec dvX, dvY; ///< vector local-time increments (sum of normal * depth)
        StepReport report;
    };

    /// Pushing mode projection: balls penetrated by B are pushed out along the
    /// normal through B (deepest first); a ball overlapping its partner pushes
    /// the partner along the center line. Iterates until all constraints hold.
    ContactResult resolve_contacts(const Vec &B, const Vec &X, const Vec &Y, const SimConfig &cfg);

    /// Frozen mode projection of B out of the fixed balls. Returns the new B.
    Vec project_driver(const Vec &B, const Vec &X, const Vec &Y, const SimConfig &cfg, StepReport &report,
                       Vec &dvX, Vec &dvY);

    /// One step with an explicit driver increment `noise` and step length h.
    SystemState step(const SystemState &state, const SimConfig &cfg, const Vec &noise, double h,
                     StepReport *report = nullptr);
    /// Fixed-step variant (h = cfg.dt).
    SystemState step(const SystemState &state, const SimConfig &cfg, const Vec &noise);

    /// Checks the hard-sphere constraints; throws with a description on violation.
    void check_state(const SystemState &s, const SimConfig &cfg);

    /// Stateful path generator: owns the random stream and applies the
    /// adaptive step and far-field rules of SimConfig.
    class Engine
    {
    public:
        Engine(const SimConfig &cfg, const SystemState &initial);

        StepReport advance();
        const SystemState &state() const { return state_; }
        bool escaped() const { return escaped_; }
        /// Adds the sphere |B - X| = radius to the adaptive gap so crossings of
        /// it are resolved at the base step.
        void set_target_sphere(double radius) { target_radius_ = radius; }
        const SimConfig &config() const { return cfg_; }
        Rng &rng() { return rng_; }

    private:
        double step_length() const;

        SimConfig cfg_;
        SystemState state_;
        Rng rng_;
        double h_max_;
        double target_radius_ = 0.0;
        bool escaped_ = false;
    };

    struct Snapshot
    {
        double t, LX, LY;
        Vec B, X, Y, fX, fY;
    };

    struct PathResult
    {
        LocalTimeLedger ledger_x, ledger_y, ledger; ///< L^X, L^Y and L = L^X + L^Y
        std::vector<Snapshot> snapshots;
        SystemState final_state;
        std::size_t steps = 0;
        std::size_t double_contact_steps = 0;
        std::size_t far_jumps = 0;
        bool escaped = false;
    };

    /// Called after every step; returning false ends the run.
    using StepObserver = std::function<bool(const SystemState &, const StepReport &)>;

    /// Runs until t_end (or escape, or the observer stops it). Ledgers keep an
    /// entry at both ends of every flat stretch, so they reproduce the
    /// piecewise-linear local time exactly.
    PathResult run_path(const SimConfig &cfg, const SystemState &initial, const StepObserver &observer = {});
} // namespace stirlab
