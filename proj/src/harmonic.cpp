#include "stirlab/harmonic.hpp"

#include "stirlab/error.hpp"
#include "stirlab/parallel.hpp"
#include "stirlab/samplers.hpp"

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stirlab
{
    void Obstacles::validate() const
    {
        space.validate();
        if (centers.size() != radii.size() || centers.empty())
            throw Error("obstacles need one radius per center");
        for (std::size_t i = 0; i < centers.size(); ++i)
        {
            if (!(radii[i] > 0.0))
                throw Error("obstacle radius must be positive");
            for (std::size_t j = i + 1; j < centers.size(); ++j)
                if (distance(centers[i], centers[j], space) < radii[i] + radii[j])
                    throw Error("obstacles overlap");
        }
    }

    WosHit wos_hit(const Vec &start, const Obstacles &obs, const WosOptions &opt, Rng &rng)
    {
        const Space &sp = obs.space;
        const int d = sp.dim;
        const double cap = sp.finite() ? sp.edge / 4.0 : std::numeric_limits<double>::infinity();
        const bool kill = opt.kill_radius > 0.0 && !sp.finite();
        // radius of a ball around centers[0] enclosing every obstacle
        double enclosing = 0.0;
        for (std::size_t i = 0; i < obs.centers.size(); ++i)
            enclosing = std::max(enclosing, distance(obs.centers[0], obs.centers[i], sp) + obs.radii[i]);

        Vec z = canonical(start, sp);
        WosHit out;
        for (;;)
        {
            double gap = std::numeric_limits<double>::infinity();
            int nearest = -1;
            for (std::size_t i = 0; i < obs.centers.size(); ++i)
            {
                const double g = distance(z, obs.centers[i], sp) - obs.radii[i];
                if (g < gap)
                {
                    gap = g;
                    nearest = static_cast<int>(i);
                }
            }
            if (gap <= opt.eps)
            {
                out.obstacle = nearest;
                const Vec &c = obs.centers[nearest];
                const Vec u = outward_normal(c, z, sp);
                out.point = canonical(c + u * obs.radii[nearest], sp);
                return out;
            }
            double radius = std::min(gap, cap);
            if (!sp.finite())
            {
                const Vec rel = z - obs.centers[0];
                const double rz = rel.norm();
                if (kill)
                {
                    const double outer = opt.kill_radius - rz;
                    if (outer <= opt.eps)
                    {
                        out.point = z;
                        return out;
                    }
                    radius = std::min(radius, outer);
                }
                else if (rz > 4.0 * enclosing)
                {
                    ++out.jumps;
                    auto back = exterior_return(rel, 2.0 * enclosing, rng);
                    if (!back)
                    {
                        out.point = z;
                        return out;
                    }
                    z = obs.centers[0] + *back;
                    continue;
                }
            }
            if (++out.jumps > opt.max_jumps)
                throw Error("WOS stalled");
            z = canonical(z + rng.direction(d) * radius, sp);
        }
    }

    HitDistributionEstimate sample_hits(const Vec &start, const Obstacles &obs, const WosOptions &opt,
                                        const Vec &reference_dir, int bins, std::size_t n, std::uint64_t seed,
                                        unsigned threads)
    {
        obs.validate();
        if (bins < 1)
            throw Error("need at least one bin");
        for (std::size_t i = 0; i < obs.centers.size(); ++i)
            if (distance(start, obs.centers[i], obs.space) - obs.radii[i] <= opt.eps)
                throw Error("start must lie outside every obstacle shell");
        const Vec ref = reference_dir * (1.0 / reference_dir.norm());
        const std::size_t blocks = std::max<std::size_t>(1, std::min(kDefaultBlocks, n));
        auto parts = run_blocks<HitDistributionEstimate>(blocks, threads, [&](std::size_t b)
        {
            HitDistributionEstimate h;
            h.counts.assign(obs.centers.size(), 0);
            h.bin_counts.assign(bins, 0.0);
            Rng rng(replica_seed(seed, b));
            const std::size_t lo = b * n / blocks, hi = (b + 1) * n / blocks;
            double jumps = 0.0;
            for (std::size_t i = lo; i < hi; ++i)
            {
                const WosHit w = wos_hit(start, obs, opt, rng);
                jumps += static_cast<double>(w.jumps);
                ++h.n;
                if (w.obstacle < 0)
                {
                    ++h.escaped;
                    continue;
                }
                ++h.counts[w.obstacle];
                if (w.obstacle == 0)
                {
                    const Vec u = outward_normal(obs.centers[0], w.point, obs.space);
                    const double c = std::clamp(u.dot(ref), -1.0, 1.0);
                    const int k = std::min(bins - 1, static_cast<int>((c + 1.0) / 2.0 * bins));
                    h.bin_counts[k] += 1.0;
                }
            }
            h.mean_jumps = jumps;
            return h;
        });
        HitDistributionEstimate total;
        total.counts.assign(obs.centers.size(), 0);
        total.bin_counts.assign(bins, 0.0);
        double jumps = 0.0;
        for (const auto &p : parts)
        {
            for (std::size_t i = 0; i < p.counts.size(); ++i)
                total.counts[i] += p.counts[i];
            for (int k = 0; k < bins; ++k)
                total.bin_counts[k] += p.bin_counts[k];
            total.escaped += p.escaped;
            total.n += p.n;
            jumps += p.mean_jumps;
        }
        total.mean_jumps = total.n ? jumps / total.n : 0.0;
        return total;
    }

    std::vector<double> uniform_cosine_bins(int d, int bins)
    {
        // cos(angle) = 2u - 1 with u ~ Beta((d-1)/2, (d-1)/2)
        const double a = 0.5 * (d - 1);
        std::vector<double> p(bins);
        double prev = 0.0;
        for (int k = 0; k < bins; ++k)
        {
            const double u = static_cast<double>(k + 1) / bins;
            const double f = k + 1 == bins ? 1.0 : boost::math::ibeta(a, a, u);
            p[k] = f - prev;
            prev = f;
        }
        return p;
    }

    TwoBallSetup two_ball_setup(int d, double b, double r)
    {
        TwoBallSetup s;
        s.obstacles.space = Space::torus(d, r);
        Vec x1(d);
        for (int i = 0; i < d; ++i)
            x1[i] = r / 2.0;
        Vec y1 = x1;
        y1[0] = 0.0;
        s.obstacles.centers = {x1, y1};
        s.obstacles.radii = {1.0, 1.0};
        s.z = x1 + Vec::axis(d, 1, b);
        return s;
    }

    namespace
    {
        void check_two_ball_geometry(const Vec &z, const Vec &x1, const Vec &y1, double b, const Space &space)
        {
            if (!space.finite())
                throw Error("hitting estimates need a torus");
            if (!(distance(x1, y1, space) > 2.0 * b))
                throw Error("need dist(x1, y1) > 2b");
            if (!(space.edge > 8.0 * b))
                throw Error("need r > 8b");
            const double tol = 1e-9 * std::max(1.0, b);
            if (std::abs(distance(z, x1, space) - b) > tol && std::abs(distance(z, y1, space) - b) > tol)
                throw Error("z must lie on S(x1,b) or S(y1,b)");
        }
    } // namespace

    EstimatorResult hitting_ratio(const HitDistributionEstimate &h)
    {
        if (h.counts.size() < 2)
            throw Error("hitting ratio needs two obstacles");
        const double kx = static_cast<double>(h.counts[0]), ky = static_cast<double>(h.counts[1]);
        if (kx == 0.0 || ky == 0.0)
            throw Underpowered("no hits on one of the balls");
        EstimatorResult r;
        r.label = "hitting ratio";
        r.n = h.n;
        r.value = kx / ky;
        r.std_error = r.value * std::sqrt(1.0 / kx + 1.0 / ky);
        return r;
    }

    EstimatorResult hitting_ratio(const Vec &z, const Vec &x1, const Vec &y1, double b, const Space &space,
                                  std::size_t n, std::uint64_t seed, unsigned threads, double eps)
    {
        check_two_ball_geometry(z, x1, y1, b, space);
        Obstacles obs{{x1, y1}, {1.0, 1.0}, space};
        WosOptions opt;
        opt.eps = eps;
        return hitting_ratio(sample_hits(z, obs, opt, displacement(x1, z, space), 20, n, seed, threads));
    }

    ExitUniformity exit_uniformity(const HitDistributionEstimate &h, int d, std::uint64_t seed)
    {
        const int bins = static_cast<int>(h.bin_counts.size());
        const double total = std::accumulate(h.bin_counts.begin(), h.bin_counts.end(), 0.0);
        const auto probs = uniform_cosine_bins(d, bins);
        for (double p : probs)
            if (total * p < 20.0)
                throw Underpowered("underpowered bins");
        const auto n = static_cast<std::size_t>(total);

        auto tv_of = [&](const std::vector<double> &counts)
        {
            double s = 0.0;
            for (int k = 0; k < bins; ++k)
                s += std::abs(counts[k] / total - probs[k]);
            return 0.5 * s;
        };
        auto multinomial = [&](const std::vector<double> &cum, Rng &rng)
        {
            std::vector<double> c(bins, 0.0);
            for (std::size_t i = 0; i < n; ++i)
            {
                const auto it = std::upper_bound(cum.begin(), cum.end(), rng.uniform());
                c[std::min<std::ptrdiff_t>(it - cum.begin(), bins - 1)] += 1.0;
            }
            return c;
        };
        auto cumulative = [&](const std::vector<double> &p)
        {
            std::vector<double> cum(bins);
            std::partial_sum(p.begin(), p.end(), cum.begin());
            return cum;
        };

        ExitUniformity out;
        out.hits = h;
        out.tv_raw = tv_of(h.bin_counts);
        out.chi_square = chi_square_gof(h.bin_counts, probs);

        constexpr int kReps = 200;
        Rng rng(seed);
        const auto null_cum = cumulative(probs);
        double null_sum = 0.0;
        for (int rep = 0; rep < kReps; ++rep)
            null_sum += tv_of(multinomial(null_cum, rng));
        out.null_mean = null_sum / kReps;

        std::vector<double> emp(bins);
        for (int k = 0; k < bins; ++k)
            emp[k] = h.bin_counts[k] / total;
        const auto emp_cum = cumulative(emp);
        std::vector<double> boot(kReps);
        for (int rep = 0; rep < kReps; ++rep)
            boot[rep] = tv_of(multinomial(emp_cum, rng));
        const double mb = std::accumulate(boot.begin(), boot.end(), 0.0) / kReps;
        double ss = 0.0;
        for (double v : boot)
            ss += (v - mb) * (v - mb);

        out.tv.label = "exit-law total variation (debiased)";
        out.tv.n = n;
        out.tv.value = out.tv_raw - out.null_mean;
        out.tv.std_error = std::sqrt(ss / (kReps - 1));
        return out;
    }

    ExitUniformity exit_uniformity(const Vec &z, const Vec &x1, const Vec &y1, double b, const Space &space,
                                   std::size_t n, std::uint64_t seed, unsigned threads, int bins, double eps)
    {
        check_two_ball_geometry(z, x1, y1, b, space);
        if (!(b > 4.0))
            throw Error("exit uniformity needs b > 4");
        if (bins < 20)
            throw Error("need at least 20 bins");
        Obstacles obs{{x1, y1}, {1.0, 1.0}, space};
        WosOptions opt;
        opt.eps = eps;
        const auto h = sample_hits(z, obs, opt, displacement(x1, z, space), bins, n, seed, threads);
        return exit_uniformity(h, space.dim, replica_seed(seed, 0xB007));
    }

    EstimatorResult sphere_moment_check(int d, std::size_t n, std::uint64_t seed)
    {
        if (d < 2)
            throw Error("sphere moment needs d >= 2");
        const auto samples = sample_paths(n, seed, 1, [d](Rng &rng)
        {
            const double x = rng.direction(d)[0];
            return x * x;
        });
        return batch_mean(samples, 32, "E (z.e1)^2");
    }

    double sphere_moment_quadrature(int d)
    {
        if (d < 2)
            throw Error("sphere moment needs d >= 2");
        // polar angle phi of a uniform point has density proportional to sin^(d-2) phi
        using gk = boost::math::quadrature::gauss_kronrod<double, 61>;
        const double pi = std::acos(-1.0);
        const double num = gk::integrate([d](double phi)
        {
            const double c = std::cos(phi);
            return c * c * std::pow(std::sin(phi), d - 2);
        }, 0.0, pi, 10, 1e-14);
        const double den = gk::integrate([d](double phi) { return std::pow(std::sin(phi), d - 2); }, 0.0, pi, 10,
                                         1e-14);
        return num / den;
    }
} // namespace stirlab
