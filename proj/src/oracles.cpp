#include "stirlab/oracles.hpp"

#include "stirlab/error.hpp"
#include "stirlab/parallel.hpp"
#include "stirlab/samplers.hpp"

#include <cmath>
#include <numbers>

namespace stirlab
{
    using std::numbers::pi;

    // ---------------------------------------------------------------- samplers

    double sample_wrapped_cauchy(double rho, Rng &rng)
    {
        if (!(rho >= 0.0 && rho < 1.0))
            throw Error("wrapped Cauchy needs 0 <= rho < 1");
        const double u = rng.uniform();
        return 2.0 * std::atan((1.0 - rho) / (1.0 + rho) * std::tan(pi * (u - 0.5)));
    }

    Vec sample_ball_harmonic(const Vec &x, Rng &rng)
    {
        const int d = x.dim;
        const double rx = x.norm();
        if (!(rx < 1.0))
            throw Error("harmonic measure base point must lie inside the unit ball");
        if (rx == 0.0)
            return rng.direction(d);
        if (d == 2)
        {
            const double phi = std::atan2(x[1], x[0]) + sample_wrapped_cauchy(rx, rng);
            return Vec{std::cos(phi), std::sin(phi)};
        }
        const double c = 1.0 - rx * rx;
        for (;;)
        {
            const Vec theta = rng.direction(d);
            const double b = x.dot(theta);
            const double tau = -b + std::sqrt(b * b + c);
            Vec z = x + theta * tau;
            z *= 1.0 / z.norm();
            const double accept = (1.0 - rx) / (1.0 - z.dot(x));
            if (rng.uniform() < accept)
                return z;
        }
    }

    std::optional<Vec> exterior_return(const Vec &rel, double radius, Rng &rng)
    {
        const int d = rel.dim;
        const double r = rel.norm();
        if (!(r > radius))
            throw Error("exterior return needs a start outside the sphere");
        if (d >= 3)
        {
            const double p = std::pow(radius / r, d - 2);
            if (rng.uniform() >= p)
                return std::nullopt;
        }
        // Kelvin image of rel in the sphere, scaled to the unit ball
        const Vec inner = rel * (radius / (r * r));
        return sample_ball_harmonic(inner, rng) * radius;
    }

    // ---------------------------------------------------------------- planar chain

    double chain2d_step(double theta, double delta, Rng &rng)
    {
        if (!(delta > 0.0))
            throw Error("chain step needs delta > 0");
        double t = theta + sample_wrapped_cauchy(std::exp(-delta), rng);
        t -= 2.0 * pi * std::floor(t / (2.0 * pi));
        return t;
    }

    double poisson_kernel_2d(double theta, double t)
    {
        if (!(t > 0.0))
            throw Error("Poisson kernel needs t > 0");
        const double rho = std::exp(-t);
        return (1.0 - rho * rho) / (1.0 - 2.0 * rho * std::cos(theta) + rho * rho);
    }

    double vector_local_time_2d_path(double u, double delta, Rng &rng)
    {
        double theta = 2.0 * pi * rng.uniform();
        double s = 0.0, sum = 0.0;
        const double eps = 1e-12 * std::max(1.0, u);
        while (s < u - eps)
        {
            const double w = std::min(delta, u - s);
            sum += w * std::cos(theta);
            theta = chain2d_step(theta, w, rng);
            s += w;
        }
        return sum;
    }

    EstimatorResult vector_local_time_2d(double u, std::size_t n_paths, double delta, std::uint64_t seed,
                                         unsigned threads)
    {
        if (!(u > 0.0) || !(delta > 0.0))
            throw Error("vector_local_time_2d needs u > 0 and delta > 0");
        auto sq = sample_paths(n_paths, seed, threads, [&](Rng &rng)
        {
            const double l = vector_local_time_2d_path(u, delta, rng);
            return l * l;
        });
        return batch_mean(sq, 32, "E(L1)^2 at u=" + std::to_string(u));
    }

    // ---------------------------------------------------------------- Kelvin chain

    SphereChainState kelvin_chain_step(const SphereChainState &state, double delta, Rng &rng)
    {
        const int d = state.v.dim;
        if (d < 3)
            throw Error("Kelvin chain needs d >= 3");
        if (!state.alive)
            throw Error("Kelvin chain is already dead");
        SphereChainState next = state;
        next.ell += delta;
        if (rng.uniform() >= std::exp(-(d - 2) * delta))
        {
            next.alive = false;
            return next;
        }
        next.v = sample_ball_harmonic(state.v * std::exp(-delta), rng);
        return next;
    }

    double kelvin_Linf_path(int d, double delta, Rng &rng)
    {
        SphereChainState s{rng.direction(d), 0.0, true};
        double sum = 0.0;
        while (s.alive)
        {
            sum += delta * s.v[0];
            s = kelvin_chain_step(s, delta, rng);
        }
        return sum;
    }

    EstimatorResult kelvin_Linf_sq(int d, double delta, std::size_t n_paths, std::uint64_t seed, unsigned threads)
    {
        if (d < 3 || d > kMaxDim)
            throw Error("kelvin_Linf_sq needs 3 <= d");
        if (!(delta > 0.0))
            throw Error("kelvin_Linf_sq needs delta > 0");
        auto sq = sample_paths(n_paths, seed, threads, [&](Rng &rng)
        {
            const double l = kelvin_Linf_path(d, delta, rng);
            return l * l;
        });
        return batch_mean(sq, 32, "E(L1_inf)^2 d=" + std::to_string(d) + " delta=" + std::to_string(delta));
    }

    RefinedEstimate kelvin_Linf_sq_refined(int d, std::span<const double> deltas, std::size_t n_paths,
                                           std::uint64_t seed, unsigned threads)
    {
        RefinedEstimate out;
        out.deltas.assign(deltas.begin(), deltas.end());
        for (std::size_t i = 0; i < deltas.size(); ++i)
            out.levels.push_back(kelvin_Linf_sq(d, deltas[i], n_paths, replica_seed(seed, 1000 + i), threads));
        out.extrapolated = richardson(out.deltas, out.levels, "E(L1_inf)^2 extrapolated");
        return out;
    }

    double kelvin_Linf_sq_exact(int d)
    {
        return 2.0 / ((d - 2.0) * (d - 1.0) * d);
    }

    double kelvin_Linf_sq_grid_mean(int d, double delta)
    {
        const double q = std::exp(-(d - 2) * delta);
        const double p = std::exp(-(d - 1) * delta);
        return delta * delta / d / (1.0 - q) * (1.0 + p) / (1.0 - p);
    }

    // ---------------------------------------------------------------- scaling coupling

    CouplingPath scaling_coupling_path(const CouplingOptions &opt, Rng &rng)
    {
        const int d = opt.dim;
        if (d < 3 || d > kMaxDim)
            throw Error("scaling coupling needs d >= 3");
        if (!(opt.dt > 0.0) || !(opt.stop_radius_floor > 0.0 && opt.stop_radius_floor < 1.0))
            throw Error("invalid coupling options");
        if (!(opt.far_ratio > opt.return_ratio && opt.return_ratio > 1.0))
            throw Error("coupling needs far_ratio > return_ratio > 1");

        CouplingPath path;
        Vec b = Vec::axis(d, 0);
        double m = 1.0, clock = 0.0, time = 0.0;
        std::size_t next_level = 0;

        auto record = [&]
        {
            CouplingState s;
            s.time = time;
            s.running_min = m;
            s.clock = clock;
            s.u = b * (1.0 / m);
            s.local_time = -std::log(m);
            path.trace.push_back(s);
        };

        for (;;)
        {
            const double rb = b.norm();
            if (rb >= opt.far_ratio * m)
            {
                auto back = exterior_return(b, opt.return_ratio * m, rng);
                if (!back)
                    break;
                b = *back;
                continue;
            }
            double hu = opt.dt;
            if (opt.adaptive)
            {
                const double gap = rb / m - 1.0;
                hu = std::max(hu, (gap / opt.kappa) * (gap / opt.kappa));
            }
            const double h = hu * m * m;
            b += rng.gaussian(d, h);
            clock += hu;
            time += h;
            ++path.steps;

            const double r = b.norm();
            if (r < m)
            {
                m = std::max(r, opt.stop_radius_floor);
                const double lt = -std::log(m);
                while (next_level < opt.levels.size() && opt.levels[next_level] <= lt)
                {
                    path.level_samples.push_back(b * (1.0 / r));
                    ++next_level;
                }
                if (r <= opt.stop_radius_floor)
                {
                    // stop on the floor sphere so the last U is still outside the ball
                    b *= m / r;
                    path.hit_floor = true;
                    break;
                }
            }
            if (opt.trace_stride > 0 && path.steps % opt.trace_stride == 0)
                record();
        }
        if (opt.trace_stride > 0)
            record();
        path.local_time_inf = -std::log(m);
        return path;
    }
} // namespace stirlab
