#include "stirlab/contact.hpp"

#include "stirlab/error.hpp"
#include "stirlab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace stirlab
{
    namespace
    {
        constexpr double kNone = -std::numeric_limits<double>::infinity();

        UnfoldedPoint lift(const UnfoldedPoint &prev, const Vec &p, const Space &space)
        {
            if (!space.finite())
                return UnfoldedPoint{p, p};
            return unfold_step(prev, p, space);
        }
    } // namespace

    void SimConfig::validate() const
    {
        space.validate();
        if (!(dt > 0.0) || !(dt < 0.01))
            throw Error("dt must lie in (0, 0.01)");
        if (!(t_end >= 0.0))
            throw Error("t_end must be nonnegative");
        if (!(tol_overlap > 0.0))
            throw Error("tol_overlap must be positive");
        if (max_contact_iters < 8)
            throw Error("max_contact_iters must be at least 8");
        if (adaptive && !(adaptive_kappa >= 1.0))
            throw Error("adaptive_kappa must be at least 1");
        if (max_step < 0.0)
            throw Error("max_step must be nonnegative");
        if (far_field_radius > 0.0)
        {
            if (space.finite() || two_balls)
                throw Error("far-field return needs a single ball on R^d");
            if (!(far_field_return > 1.0 && far_field_return < far_field_radius))
                throw Error("far-field radii must satisfy 1 < return < radius");
        }
    }

    SystemState SystemState::make(const Space &space, const Vec &b, const Vec &x, const Vec &y)
    {
        SystemState s;
        s.B = canonical(b, space);
        s.X = canonical(x, space);
        s.Y = canonical(y, space);
        s.fB = UnfoldedPoint{s.B, s.B};
        s.fX = UnfoldedPoint{s.X, s.X};
        s.fY = UnfoldedPoint{s.Y, s.Y};
        s.vLX = Vec::zero(space.dim);
        s.vLY = Vec::zero(space.dim);
        return s;
    }

    ContactResult resolve_contacts(const Vec &B, const Vec &X, const Vec &Y, const SimConfig &cfg)
    {
        const Space &sp = cfg.space;
        const bool two = cfg.two_balls;
        ContactResult r{X, Y, Vec::zero(B.dim), Vec::zero(B.dim), {}};
        int last = -1; // ball most recently pushed by B
        for (int iter = 0; iter < cfg.max_contact_iters; ++iter)
        {
            const double depth_x = 1.0 - distance(B, r.X, sp);
            const double depth_y = two ? 1.0 - distance(B, r.Y, sp) : kNone;
            const bool moved = r.report.pushesX > 0 || r.report.pushesY > 0;
            const double depth_xy = two && moved ? 2.0 - distance(r.X, r.Y, sp) : kNone;
            const double tol = cfg.tol_overlap;
            if (depth_x <= tol && depth_y <= tol && depth_xy <= tol)
            {
                r.report.double_contact = r.report.pushesX > 0 && r.report.pushesY > 0;
                return r;
            }
            if (depth_x > tol || depth_y > tol)
            {
                const bool on_x = depth_x >= depth_y;
                Vec &ball = on_x ? r.X : r.Y;
                const double depth = on_x ? depth_x : depth_y;
                const Vec n = outward_normal(ball, B, sp);
                ball = canonical(ball - n * depth, sp);
                if (on_x)
                {
                    r.dvX += n * depth;
                    r.report.dLX += depth;
                    ++r.report.pushesX;
                }
                else
                {
                    r.dvY += n * depth;
                    r.report.dLY += depth;
                    ++r.report.pushesY;
                }
                last = on_x ? 0 : 1;
            }
            else
            {
                // the ball pushed by B transmits the push to its partner
                Vec &mover = last == 1 ? r.X : r.Y;
                const Vec &other = last == 1 ? r.Y : r.X;
                const Vec u = outward_normal(other, mover, sp);
                mover = canonical(mover + u * depth_xy, sp);
            }
        }
        throw Error("contact resolution stalled");
    }

    Vec project_driver(const Vec &B, const Vec &X, const Vec &Y, const SimConfig &cfg, StepReport &report,
                       Vec &dvX, Vec &dvY)
    {
        const Space &sp = cfg.space;
        Vec b = B;
        for (int iter = 0; iter < cfg.max_contact_iters; ++iter)
        {
            const double depth_x = 1.0 - distance(b, X, sp);
            const double depth_y = cfg.two_balls ? 1.0 - distance(b, Y, sp) : kNone;
            if (depth_x <= cfg.tol_overlap && depth_y <= cfg.tol_overlap)
            {
                report.double_contact = report.pushesX > 0 && report.pushesY > 0;
                return b;
            }
            const bool on_x = depth_x >= depth_y;
            const double depth = on_x ? depth_x : depth_y;
            const Vec n = outward_normal(on_x ? X : Y, b, sp);
            b = canonical(b + n * depth, sp);
            if (on_x)
            {
                dvX += n * depth;
                report.dLX += depth;
                ++report.pushesX;
            }
            else
            {
                dvY += n * depth;
                report.dLY += depth;
                ++report.pushesY;
            }
        }
        throw Error("contact resolution stalled");
    }

    void check_state(const SystemState &s, const SimConfig &cfg)
    {
        const Space &sp = cfg.space;
        const double tol = cfg.tol_overlap;
        if (distance(s.B, s.X, sp) < 1.0 - tol)
            throw Error("invariant violated: |B-X| < 1 at t=" + std::to_string(s.t));
        if (!cfg.two_balls)
            return;
        if (distance(s.B, s.Y, sp) < 1.0 - tol)
            throw Error("invariant violated: |B-Y| < 1 at t=" + std::to_string(s.t));
        if (distance(s.X, s.Y, sp) < 2.0 - tol)
            throw Error("invariant violated: |X-Y| < 2 at t=" + std::to_string(s.t));
    }

    namespace
    {
        void advance_state(SystemState &s, const SimConfig &cfg, const Vec &noise, double h, StepReport &rep)
        {
            const Space &sp = cfg.space;
            rep = StepReport{};
            s.t += h;
            Vec b = canonical(s.B + noise, sp);
            if (cfg.mode == Mode::Pushing)
            {
                ContactResult c = resolve_contacts(b, s.X, s.Y, cfg);
                rep = c.report;
                if (rep.pushesX > 0 || rep.pushesY > 0)
                {
                    if (!(c.X == s.X))
                        s.fX = lift(s.fX, c.X, sp);
                    if (cfg.two_balls && !(c.Y == s.Y))
                        s.fY = lift(s.fY, c.Y, sp);
                    s.X = c.X;
                    s.Y = c.Y;
                    s.vLX += c.dvX;
                    s.vLY += c.dvY;
                }
            }
            else
            {
                b = project_driver(b, s.X, s.Y, cfg, rep, s.vLX, s.vLY);
            }
            rep.h = h;
            s.LX += rep.dLX;
            s.LY += rep.dLY;
            s.B = b;
            s.fB = lift(s.fB, b, sp);
            if (cfg.check_invariants)
                check_state(s, cfg);
        }
    } // namespace

    SystemState step(const SystemState &state, const SimConfig &cfg, const Vec &noise, double h,
                     StepReport *report)
    {
        SystemState s = state;
        StepReport rep;
        advance_state(s, cfg, noise, h, rep);
        if (report)
            *report = rep;
        return s;
    }

    SystemState step(const SystemState &state, const SimConfig &cfg, const Vec &noise)
    {
        return step(state, cfg, noise, cfg.dt);
    }

    // ---------------------------------------------------------------- engine

    Engine::Engine(const SimConfig &cfg, const SystemState &initial)
        : cfg_(cfg), state_(initial), rng_(cfg.seed)
    {
        cfg_.validate();
        check_state(state_, cfg_);
        if (cfg_.max_step > 0.0)
            h_max_ = cfg_.max_step;
        else if (cfg_.space.finite())
        {
            const double s = cfg_.space.edge / (4.0 * cfg_.adaptive_kappa);
            h_max_ = s * s;
        }
        else
            h_max_ = std::numeric_limits<double>::infinity();
    }

    double Engine::step_length() const
    {
        if (!cfg_.adaptive)
            return cfg_.dt;
        const Space &sp = cfg_.space;
        const double rx = distance(state_.B, state_.X, sp);
        double gap = rx - 1.0;
        if (cfg_.two_balls)
            gap = std::min(gap, distance(state_.B, state_.Y, sp) - 1.0);
        if (target_radius_ > 0.0)
            gap = std::min(gap, target_radius_ - rx);
        if (cfg_.far_field_radius > 0.0)
            gap = std::min(gap, cfg_.far_field_radius - rx);
        if (!(gap > 0.0))
            return cfg_.dt;
        const double g = gap / cfg_.adaptive_kappa;
        return std::clamp(g * g, cfg_.dt, std::max(cfg_.dt, h_max_));
    }

    StepReport Engine::advance()
    {
        if (escaped_)
            throw Error("path has escaped");
        const double h = step_length();
        StepReport rep;
        advance_state(state_, cfg_, rng_.gaussian(cfg_.space.dim, h), h, rep);
        if (cfg_.far_field_radius > 0.0)
        {
            const Vec rel = state_.B - state_.X;
            if (rel.norm() >= cfg_.far_field_radius)
            {
                rep.far_jump = true;
                auto back = exterior_return(rel, cfg_.far_field_return, rng_);
                if (!back)
                    escaped_ = true;
                else
                {
                    state_.B = state_.X + *back;
                    state_.fB = UnfoldedPoint{state_.B, state_.B};
                }
            }
        }
        return rep;
    }

    // ---------------------------------------------------------------- run_path

    namespace
    {
        /// Keeps only the corners of the piecewise-linear local-time path.
        class LedgerRecorder
        {
        public:
            void start(double t, double L)
            {
                ledger.append(t, L);
                pt_ = t;
                pL_ = L;
                pending_ = false;
            }
            void add(double t, double L)
            {
                if (L == pL_)
                {
                    pt_ = t;
                    pending_ = true;
                    return;
                }
                if (pending_)
                    ledger.append(pt_, pL_);
                ledger.append(t, L);
                pt_ = t;
                pL_ = L;
                pending_ = false;
            }
            void finish()
            {
                if (pending_)
                    ledger.append(pt_, pL_);
                pending_ = false;
            }

            LocalTimeLedger ledger;

        private:
            double pt_ = 0.0, pL_ = 0.0;
            bool pending_ = false;
        };

        Snapshot snapshot_of(const SystemState &s)
        {
            return Snapshot{s.t, s.LX, s.LY, s.B, s.X, s.Y, s.fX.coords, s.fY.coords};
        }
    } // namespace

    PathResult run_path(const SimConfig &cfg, const SystemState &initial, const StepObserver &observer)
    {
        cfg.validate();
        check_state(initial, cfg);
        PathResult res;
        res.final_state = initial;
        if (cfg.t_end <= 0.0)
            return res;

        Engine engine(cfg, initial);
        LedgerRecorder rx, ry, rl;
        rx.start(initial.t, initial.LX);
        ry.start(initial.t, initial.LY);
        rl.start(initial.t, initial.LX + initial.LY);
        if (cfg.snapshot_stride > 0)
            res.snapshots.push_back(snapshot_of(initial));

        const double t_stop = initial.t + cfg.t_end;
        const auto n_fixed = static_cast<std::size_t>(std::ceil(cfg.t_end / cfg.dt - 1e-9));
        for (;;)
        {
            if (cfg.adaptive ? engine.state().t >= t_stop : res.steps >= n_fixed)
                break;
            const StepReport rep = engine.advance();
            ++res.steps;
            const SystemState &s = engine.state();
            if (rep.double_contact)
                ++res.double_contact_steps;
            if (rep.far_jump)
                ++res.far_jumps;
            rx.add(s.t, s.LX);
            ry.add(s.t, s.LY);
            rl.add(s.t, s.LX + s.LY);
            if (cfg.snapshot_stride > 0 && res.steps % cfg.snapshot_stride == 0)
                res.snapshots.push_back(snapshot_of(s));
            if (engine.escaped())
                break;
            if (observer && !observer(s, rep))
                break;
        }
        rx.finish();
        ry.finish();
        rl.finish();
        res.ledger_x = std::move(rx.ledger);
        res.ledger_y = std::move(ry.ledger);
        res.ledger = std::move(rl.ledger);
        res.final_state = engine.state();
        res.escaped = engine.escaped();
        return res;
    }
} // namespace stirlab
