#include "stirlab/excursions.hpp"

#include "stirlab/error.hpp"
#include "stirlab/harmonic.hpp"
#include "stirlab/parallel.hpp"
#include "stirlab/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stirlab
{
    EstimatorResult ExcursionLawEstimate::as_result(std::string label) const
    {
        EstimatorResult r;
        r.value = value;
        r.std_error = std_error;
        r.n = n;
        r.label = std::move(label);
        return r;
    }

    double lambda1(int d, double b)
    {
        if (d < 2)
            throw Error("lambda1 needs d >= 2");
        if (std::isinf(b))
        {
            if (d == 2)
                throw Error("recurrent case has no infinite crossing rate");
            return d - 2.0;
        }
        if (!(b > 1.0))
            throw Error("lambda1 needs b > 1");
        if (d == 2)
            return 1.0 / std::log(b);
        return (d - 2.0) / (1.0 - std::pow(b, 2.0 - d));
    }

    double crossing_probability(int d, double b, double delta)
    {
        if (!(delta > 0.0) || !(1.0 + delta < b))
            throw Error("crossing probability needs 1 < 1 + delta < b");
        if (d == 2)
            return std::log1p(delta) / std::log(b);
        return (1.0 - std::pow(1.0 + delta, 2.0 - d)) / (1.0 - std::pow(b, 2.0 - d));
    }

    ExcursionLawEstimate crossing_rate_estimate(int d, double b, std::span<const double> deltas, std::size_t n,
                                                std::uint64_t seed, unsigned threads, double eps)
    {
        if (deltas.size() < 2)
            throw Error("crossing rate needs at least two deltas");
        for (double dl : deltas)
            if (!(dl > 0.0 && dl < 0.1))
                throw Error("deltas must lie in (0, 0.1)");
        ExcursionLawEstimate est;
        est.id = ExcursionFunctional::Cross;
        est.deltas.assign(deltas.begin(), deltas.end());
        Obstacles obs{{Vec::zero(d)}, {1.0}, Space::euclidean(d)};
        WosOptions opt;
        opt.eps = eps;
        opt.kill_radius = b;
        for (std::size_t i = 0; i < deltas.size(); ++i)
        {
            const double dl = deltas[i];
            const auto h = sample_hits(Vec::axis(d, 0, 1.0 + dl), obs, opt, Vec::axis(d, 0), 1, n,
                                       replica_seed(seed, 100 + i), threads);
            const double p = static_cast<double>(h.escaped) / static_cast<double>(h.n);
            EstimatorResult r;
            r.label = "P(cross) / delta at delta=" + std::to_string(dl);
            r.n = h.n;
            r.value = p / dl;
            r.std_error = std::sqrt(p * (1.0 - p) / static_cast<double>(h.n)) / dl;
            est.levels.push_back(r);
            est.n += h.n;
        }
        // two smallest deltas
        std::vector<std::size_t> order(deltas.size());
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](auto a, auto c) { return deltas[a] < deltas[c]; });
        const double dd[2] = {deltas[order[0]], deltas[order[1]]};
        const EstimatorResult vv[2] = {est.levels[order[0]], est.levels[order[1]]};
        const EstimatorResult ex = richardson(dd, vv, "crossing rate");
        est.value = ex.value;
        est.std_error = ex.std_error;
        est.delta_used = dd[0];
        return est;
    }

    // ---------------------------------------------------------------- lambda2

    namespace
    {
        SimConfig single_ball_config(int d, const SimConfig &cfg)
        {
            SimConfig c = cfg;
            c.space = Space::euclidean(d);
            c.mode = Mode::Frozen;
            c.two_balls = false;
            c.far_field_radius = 0.0;
            c.t_end = 0.0;
            c.snapshot_stride = 0;
            return c;
        }

        struct CrossingRun
        {
            double L = 0.0;
            double vL1 = 0.0;
            Vec exit;
            std::size_t steps = 0;
        };

        /// Frozen single ball at the origin; driver from `start` until |B| >= b.
        CrossingRun run_to_radius(const SimConfig &c, const Vec &start, double b)
        {
            const int d = c.space.dim;
            Engine engine(c, SystemState::make(c.space, start, Vec::zero(d), Vec::zero(d)));
            engine.set_target_sphere(b);
            CrossingRun run;
            while (engine.state().B.norm() < b)
            {
                engine.advance();
                ++run.steps;
            }
            run.L = engine.state().LX;
            run.vL1 = engine.state().vLX[0];
            run.exit = engine.state().B;
            return run;
        }
    } // namespace

    Lambda2Result lambda2_estimate(int d, double b, std::size_t n_paths, const SimConfig &cfg, unsigned threads)
    {
        if (!(b > 1.0))
            throw Error("lambda2 needs b > 1");
        if (n_paths == 0)
            throw Underpowered("no paths");
        const SimConfig c = single_ball_config(d, cfg);
        c.validate();
        const std::size_t blocks = std::min(kDefaultBlocks, n_paths);
        struct Part
        {
            std::vector<double> v, l;
        };
        auto parts = run_blocks<Part>(blocks, threads, [&](std::size_t blk)
        {
            Part p;
            Rng rng(replica_seed(cfg.seed, blk));
            const std::size_t lo = blk * n_paths / blocks, hi = (blk + 1) * n_paths / blocks;
            for (std::size_t i = lo; i < hi; ++i)
            {
                SimConfig ci = c;
                ci.seed = rng.next_u64();
                const CrossingRun run = run_to_radius(ci, rng.direction(d), b);
                p.v.push_back(run.vL1);
                p.l.push_back(run.L);
            }
            return p;
        });
        Lambda2Result res;
        for (auto &p : parts)
        {
            res.samples.insert(res.samples.end(), p.v.begin(), p.v.end());
            res.local_times.insert(res.local_times.end(), p.l.begin(), p.l.end());
        }
        std::vector<double> sq(res.samples.size());
        for (std::size_t i = 0; i < sq.size(); ++i)
            sq[i] = res.samples[i] * res.samples[i];
        const EstimatorResult m = batch_mean(sq, 32, "lambda2");
        res.estimate.id = ExcursionFunctional::Lambda2;
        res.estimate.value = m.value;
        res.estimate.std_error = m.std_error;
        res.estimate.n = m.n;
        res.estimate.delta_used = c.dt;
        if (res.samples.size() >= 20)
            res.tail_rate = tail_decay_rate(res.samples);
        return res;
    }

    // ---------------------------------------------------------------- tracker

    ExcursionTracker::ExcursionTracker(const SimConfig &cfg, double threshold) : cfg_(cfg), threshold_(threshold)
    {
        if (!(threshold > 0.0))
            throw Error("excursion threshold must be positive");
    }

    ExcursionTracker::ExcursionTracker(const SimConfig &cfg) : ExcursionTracker(cfg, std::pow(cfg.dt, 0.25)) {}

    void ExcursionTracker::observe(const SystemState &s, const StepReport &rep)
    {
        if (rep.dLX > 0.0 || rep.dLY > 0.0)
        {
            const int ball = rep.dLX >= rep.dLY ? 0 : 1;
            if (away_)
            {
                ExcursionRecord r;
                r.start = last_point_;
                r.end = s.B;
                r.t_start = last_t_;
                r.zeta = s.t - last_t_;
                r.max_radius = max_radius_;
                r.which_ball = last_ball_;
                r.end_ball = ball;
                records_.push_back(r);
            }
            touched_ = true;
            away_ = false;
            last_t_ = s.t;
            last_point_ = s.B;
            last_ball_ = ball;
            max_radius_ = 1.0;
            return;
        }
        if (!touched_)
            return;
        const double dist = distance(s.B, last_ball_ == 0 ? s.X : s.Y, cfg_.space);
        max_radius_ = std::max(max_radius_, dist);
        if (dist - 1.0 > threshold_)
            away_ = true;
    }

    void ExcursionTracker::finish(const SystemState &s)
    {
        if (!away_)
            return;
        ExcursionRecord r;
        r.start = last_point_;
        r.end = s.B;
        r.t_start = last_t_;
        r.zeta = s.t - last_t_;
        r.max_radius = max_radius_;
        r.which_ball = last_ball_;
        r.end_ball = -1;
        r.censored = true;
        records_.push_back(r);
        away_ = false;
    }

    std::size_t ExcursionTracker::crossings(double radius) const
    {
        return static_cast<std::size_t>(std::count_if(records_.begin(), records_.end(), [radius](const auto &r)
        {
            return !r.censored && r.max_radius >= radius;
        }));
    }

    // ---------------------------------------------------------------- lifetimes

    double sphere_area(int d)
    {
        return 2.0 * std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d);
    }

    double ball_volume(int d)
    {
        return std::pow(std::acos(-1.0), 0.5 * d) / std::tgamma(0.5 * d + 1.0);
    }

    LifetimeReport lifetime_per_local_time(const SimConfig &cfg, const SystemState &initial,
                                           std::size_t min_crossings)
    {
        if (!cfg.space.finite() || !cfg.two_balls || cfg.mode != Mode::Frozen)
            throw Error("lifetime estimate needs a frozen two-ball torus run");
        if (distance(initial.X, initial.Y, cfg.space) < cfg.space.edge / 3.0)
            throw Error("ball separation must be at least r/3");
        if (!(cfg.t_end > 0.0))
            throw Error("t_end must be positive");
        Engine engine(cfg, initial);
        ExcursionTracker tracker(cfg);

        constexpr int kBlocks = 32;
        std::vector<double> rates;
        double block_t0 = initial.t, block_L0 = initial.LX + initial.LY;
        int block = 1;
        const double t0 = initial.t;
        LifetimeReport rep;
        while (engine.state().t < t0 + cfg.t_end)
        {
            const StepReport sr = engine.advance();
            ++rep.steps;
            const SystemState &s = engine.state();
            tracker.observe(s, sr);
            if (s.t >= t0 + cfg.t_end * block / kBlocks)
            {
                rates.push_back((s.LX + s.LY - block_L0) / (s.t - block_t0));
                block_t0 = s.t;
                block_L0 = s.LX + s.LY;
                ++block;
            }
        }
        tracker.finish(engine.state());
        const SystemState &s = engine.state();
        rep.horizon = s.t - t0;
        rep.local_time = s.LX + s.LY - (initial.LX + initial.LY);
        rep.crossings = tracker.crossings(2.0);
        if (rep.crossings < min_crossings)
            throw Underpowered("underpowered");
        const int d = cfg.space.dim;
        rep.target = (std::pow(cfg.space.edge, d) - 2.0 * ball_volume(d)) / sphere_area(d);

        const EstimatorResult rate = batch_mean(rates, 16, "L/t");
        rep.t_over_L.label = "t/L";
        rep.t_over_L.n = rates.size();
        rep.t_over_L.value = rep.horizon / rep.local_time;
        rep.t_over_L.std_error = rate.std_error / (rate.value * rate.value);

        std::vector<double> zetas;
        for (const auto &r : tracker.records())
            if (!r.censored)
                zetas.push_back(r.zeta);
        if (!zetas.empty())
            rep.mean_lifetime = batch_mean(zetas, 32, "mean excursion lifetime");
        return rep;
    }

    // ---------------------------------------------------------------- shell crossings

    ShellCrossingReport shell_crossing_law(int d, double b, std::size_t n_cycles, const SimConfig &cfg,
                                           unsigned threads)
    {
        if (!(b > 1.0))
            throw Error("shell crossing needs b > 1");
        if (n_cycles == 0)
            throw Underpowered("no cycles");
        const SimConfig c = single_ball_config(d, cfg);
        c.validate();
        const std::size_t blocks = std::min(kDefaultBlocks, n_cycles);
        struct Part
        {
            std::vector<double> samples;
            std::size_t steps = 0, restarts = 0;
        };
        auto parts = run_blocks<Part>(blocks, threads, [&](std::size_t blk)
        {
            Part p;
            Rng rng(replica_seed(cfg.seed, blk));
            Vec start = Vec::axis(d, 0);
            const std::size_t lo = blk * n_cycles / blocks, hi = (blk + 1) * n_cycles / blocks;
            for (std::size_t i = lo; i < hi; ++i)
            {
                SimConfig ci = c;
                ci.seed = rng.next_u64();
                const CrossingRun run = run_to_radius(ci, start, b);
                p.samples.push_back(run.L);
                p.steps += run.steps;
                auto back = exterior_return(run.exit, 1.0, rng);
                if (back)
                    start = *back;
                else
                {
                    start = Vec::axis(d, 0);
                    ++p.restarts;
                }
            }
            return p;
        });
        ShellCrossingReport rep;
        for (auto &p : parts)
        {
            rep.samples.insert(rep.samples.end(), p.samples.begin(), p.samples.end());
            rep.steps += p.steps;
            rep.restarts += p.restarts;
        }
        rep.rate = lambda1(d, b);
        rep.mean = batch_mean(rep.samples, 32, "local time to crossing");
        rep.ks = ks_test(rep.samples, ReferenceLaw::exponential(rep.rate));
        return rep;
    }
} // namespace stirlab
