#include "stirlab/stats.hpp"

#include "stirlab/error.hpp"
#include "stirlab/rng.hpp"

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace stirlab
{
    double EstimatorResult::z_score(double target) const
    {
        const double diff = std::abs(value - target);
        if (std_error > 0.0)
            return diff / std_error;
        return diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }

    EstimatorResult batch_mean(std::span<const double> samples, std::size_t batches, std::string label)
    {
        EstimatorResult r;
        r.label = std::move(label);
        r.n = samples.size();
        if (samples.empty())
            throw Underpowered("no samples");
        const double n = static_cast<double>(samples.size());
        r.value = std::accumulate(samples.begin(), samples.end(), 0.0) / n;
        if (samples.size() < 2)
            return r;
        batches = std::max<std::size_t>(batches, 16);
        if (samples.size() < 2 * batches)
        {
            double ss = 0.0;
            for (double x : samples)
                ss += (x - r.value) * (x - r.value);
            r.std_error = std::sqrt(ss / (n - 1.0) / n);
            return r;
        }
        std::vector<double> means(batches);
        for (std::size_t b = 0; b < batches; ++b)
        {
            const std::size_t lo = b * samples.size() / batches;
            const std::size_t hi = (b + 1) * samples.size() / batches;
            double s = 0.0;
            for (std::size_t i = lo; i < hi; ++i)
                s += samples[i];
            means[b] = s / static_cast<double>(hi - lo);
        }
        const double mb = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(batches);
        double ss = 0.0;
        for (double m : means)
            ss += (m - mb) * (m - mb);
        const double k = static_cast<double>(batches);
        r.std_error = std::sqrt(ss / (k - 1.0) / k);
        return r;
    }

    EstimatorResult combine(std::span<const EstimatorResult> parts, std::span<const double> weights,
                            std::string label)
    {
        if (parts.size() != weights.size())
            throw Error("combine: size mismatch");
        EstimatorResult r;
        r.label = std::move(label);
        double var = 0.0;
        for (std::size_t i = 0; i < parts.size(); ++i)
        {
            r.value += weights[i] * parts[i].value;
            var += weights[i] * weights[i] * parts[i].std_error * parts[i].std_error;
            r.n += parts[i].n;
        }
        r.std_error = std::sqrt(var);
        return r;
    }

    EstimatorResult richardson(std::span<const double> deltas, std::span<const EstimatorResult> values,
                               std::string label)
    {
        if (deltas.size() != values.size() || deltas.size() < 2)
            throw Error("richardson needs at least two levels");
        std::vector<double> w(deltas.size(), 1.0);
        for (std::size_t i = 0; i < deltas.size(); ++i)
            for (std::size_t j = 0; j < deltas.size(); ++j)
                if (i != j)
                {
                    if (deltas[i] == deltas[j])
                        throw Error("richardson needs distinct levels");
                    w[i] *= -deltas[j] / (deltas[i] - deltas[j]);
                }
        return combine(values, w, std::move(label));
    }

    double normal_cdf(double x)
    {
        return 0.5 * std::erfc(-x / std::sqrt(2.0));
    }

    // ---------------------------------------------------------------- reference laws

    ReferenceLaw ReferenceLaw::exponential(double rate)
    {
        if (!(rate > 0.0))
            throw Error("exponential rate must be positive");
        ReferenceLaw l;
        l.kind_ = Kind::Exponential;
        l.params_[0] = rate;
        return l;
    }

    ReferenceLaw ReferenceLaw::normal(double mean, double variance)
    {
        if (!(variance > 0.0))
            throw Error("normal variance must be positive");
        ReferenceLaw l;
        l.kind_ = Kind::Normal;
        l.params_[0] = mean;
        l.params_[1] = variance;
        return l;
    }

    ReferenceLaw ReferenceLaw::uniform_torus(int dim, double edge)
    {
        if (dim < 1 || !(edge > 0.0) || !std::isfinite(edge))
            throw Error("uniform torus law needs a finite positive edge");
        ReferenceLaw l;
        l.kind_ = Kind::UniformTorus;
        l.params_[0] = edge;
        l.dim_ = dim;
        return l;
    }

    ReferenceLaw ReferenceLaw::empirical(std::vector<double> table)
    {
        if (table.empty())
            throw Error("empirical law needs data");
        ReferenceLaw l;
        l.kind_ = Kind::Empirical;
        std::sort(table.begin(), table.end());
        l.table_ = std::move(table);
        return l;
    }

    double ReferenceLaw::cdf(double x) const
    {
        switch (kind_)
        {
        case Kind::Exponential:
            return x <= 0.0 ? 0.0 : -std::expm1(-params_[0] * x);
        case Kind::Normal:
            return normal_cdf((x - params_[0]) / std::sqrt(params_[1]));
        case Kind::UniformTorus:
            return std::clamp(x / params_[0], 0.0, 1.0);
        case Kind::Empirical:
        {
            auto it = std::upper_bound(table_.begin(), table_.end(), x);
            return static_cast<double>(it - table_.begin()) / static_cast<double>(table_.size());
        }
        }
        return 0.0;
    }

    double ReferenceLaw::cell_probability(int grid) const
    {
        if (kind_ != Kind::UniformTorus)
            throw Error("cell probabilities are defined for the uniform torus law");
        return std::pow(1.0 / grid, dim_);
    }

    // ---------------------------------------------------------------- tests

    double kolmogorov_q(double lambda)
    {
        if (lambda < 0.2)
            return 1.0;
        double sum = 0.0, sign = 1.0;
        for (int k = 1; k <= 100; ++k)
        {
            const double term = std::exp(-2.0 * k * k * lambda * lambda);
            sum += sign * term;
            sign = -sign;
            if (term < 1e-16)
                break;
        }
        return std::clamp(2.0 * sum, 0.0, 1.0);
    }

    namespace
    {
        double ks_p(double d, double n_eff)
        {
            const double sn = std::sqrt(n_eff);
            return kolmogorov_q((sn + 0.12 + 0.11 / sn) * d);
        }
    } // namespace

    TestStatistic ks_test(std::span<const double> sample, const ReferenceLaw &law)
    {
        if (sample.empty())
            throw Error("empty sample");
        if (law.kind() == ReferenceLaw::Kind::Empirical)
            return ks_two_sample(sample, law.table());
        std::vector<double> xs(sample.begin(), sample.end());
        std::sort(xs.begin(), xs.end());
        const double n = static_cast<double>(xs.size());
        double d = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            const double f = law.cdf(xs[i]);
            d = std::max({d, (i + 1) / n - f, f - i / n});
        }
        return {d, ks_p(d, n), xs.size()};
    }

    TestStatistic ks_two_sample(std::span<const double> a, std::span<const double> b)
    {
        if (a.empty() || b.empty())
            throw Error("empty sample");
        std::vector<double> x(a.begin(), a.end()), y(b.begin(), b.end());
        std::sort(x.begin(), x.end());
        std::sort(y.begin(), y.end());
        const double n1 = static_cast<double>(x.size()), n2 = static_cast<double>(y.size());
        std::size_t i = 0, j = 0;
        double d = 0.0;
        while (i < x.size() && j < y.size())
        {
            const double v = std::min(x[i], y[j]);
            while (i < x.size() && x[i] == v)
                ++i;
            while (j < y.size() && y[j] == v)
                ++j;
            d = std::max(d, std::abs(i / n1 - j / n2));
        }
        return {d, ks_p(d, n1 * n2 / (n1 + n2)), x.size()};
    }

    TestStatistic chi_square_gof(std::span<const double> counts, std::span<const double> probs)
    {
        if (counts.size() != probs.size() || counts.empty())
            throw Error("chi-square: size mismatch");
        const double total = std::accumulate(counts.begin(), counts.end(), 0.0);
        if (!(total > 0.0))
            throw Error("chi-square: no observations");
        double stat = 0.0;
        int bins = 0;
        for (std::size_t i = 0; i < counts.size(); ++i)
        {
            if (probs[i] <= 0.0)
            {
                if (counts[i] > 0.0)
                    return {std::numeric_limits<double>::infinity(), 0.0, static_cast<std::size_t>(total)};
                continue;
            }
            const double e = total * probs[i];
            stat += (counts[i] - e) * (counts[i] - e) / e;
            ++bins;
        }
        const double dof = std::max(1, bins - 1);
        return {stat, boost::math::gamma_q(dof / 2.0, stat / 2.0), static_cast<std::size_t>(total)};
    }

    TestStatistic chi_square_homogeneity(std::span<const double> a, std::span<const double> b)
    {
        if (a.size() != b.size() || a.empty())
            throw Error("chi-square: size mismatch");
        const double na = std::accumulate(a.begin(), a.end(), 0.0);
        const double nb = std::accumulate(b.begin(), b.end(), 0.0);
        const double n = na + nb;
        if (!(na > 0.0 && nb > 0.0))
            throw Error("chi-square: no observations");
        double stat = 0.0;
        int bins = 0;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            const double col = a[i] + b[i];
            if (col <= 0.0)
                continue;
            const double ea = na * col / n, eb = nb * col / n;
            stat += (a[i] - ea) * (a[i] - ea) / ea + (b[i] - eb) * (b[i] - eb) / eb;
            ++bins;
        }
        const double dof = std::max(1, bins - 1);
        return {stat, boost::math::gamma_q(dof / 2.0, stat / 2.0), static_cast<std::size_t>(n)};
    }

    double binomial_two_sided_p(std::size_t k, std::size_t n, double p)
    {
        if (n == 0)
            return 1.0;
        boost::math::binomial_distribution<double> law(static_cast<double>(n), p);
        const double kk = static_cast<double>(k);
        double tail;
        if (kk < n * p)
            tail = boost::math::cdf(law, kk);
        else
            tail = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(law, kk - 1.0));
        return std::min(1.0, 2.0 * tail);
    }

    double two_proportion_p(std::size_t k1, std::size_t n1, std::size_t k2, std::size_t n2)
    {
        if (n1 == 0 || n2 == 0)
            throw Error("two-proportion test needs samples");
        const double p1 = static_cast<double>(k1) / n1, p2 = static_cast<double>(k2) / n2;
        const double pool = static_cast<double>(k1 + k2) / (n1 + n2);
        const double se = std::sqrt(pool * (1.0 - pool) * (1.0 / n1 + 1.0 / n2));
        if (se == 0.0)
            return p1 == p2 ? 1.0 : 0.0;
        const double z = std::abs(p1 - p2) / se;
        return 2.0 * (1.0 - normal_cdf(z));
    }

    double effective_sample_size(std::span<const double> series)
    {
        const std::size_t n = series.size();
        if (n < 3)
            return static_cast<double>(n);
        const double mean = std::accumulate(series.begin(), series.end(), 0.0) / n;
        double c0 = 0.0;
        for (double x : series)
            c0 += (x - mean) * (x - mean);
        c0 /= n;
        if (c0 == 0.0)
            return static_cast<double>(n);
        double tau = 1.0;
        for (std::size_t lag = 1; lag < n / 2; ++lag)
        {
            double c = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i)
                c += (series[i] - mean) * (series[i + lag] - mean);
            const double rho = c / n / c0;
            if (rho <= 0.0)
                break;
            tau += 2.0 * rho;
        }
        return n / tau;
    }

    double tail_decay_rate(std::span<const double> samples, double q_lo, double q_hi)
    {
        std::vector<double> a;
        a.reserve(samples.size());
        for (double x : samples)
            a.push_back(std::abs(x));
        if (a.size() < 20)
            throw Underpowered("tail fit needs at least 20 samples");
        std::sort(a.begin(), a.end());
        const double n = static_cast<double>(a.size());
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < a.size(); ++i)
        {
            const double q = (i + 0.5) / n;
            if (q < q_lo || q > q_hi)
                continue;
            xs.push_back(a[i]);
            ys.push_back(std::log(1.0 - q));
        }
        if (xs.size() < 5)
            throw Underpowered("tail fit window too narrow");
        const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / xs.size();
        const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / ys.size();
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            sxy += (xs[i] - mx) * (ys[i] - my);
            sxx += (xs[i] - mx) * (xs[i] - mx);
        }
        if (sxx == 0.0)
            return std::numeric_limits<double>::infinity();
        return -sxy / sxx;
    }

    // ---------------------------------------------------------------- diffusion

    namespace
    {
        double lag_variance(std::span<const Vec> pos, int comp, int lag, double scale, std::size_t lo, std::size_t hi)
        {
            double s = 0.0, s2 = 0.0;
            std::size_t m = 0;
            for (std::size_t k = lo; k < hi && k + lag < pos.size(); ++k)
            {
                const double inc = scale * (pos[k + lag][comp] - pos[k][comp]);
                s += inc;
                s2 += inc * inc;
                ++m;
            }
            if (m < 2)
                return 0.0;
            const double mean = s / m;
            return s2 / m - mean * mean;
        }
    } // namespace

    DiffusionReport diffusion_coefficient(std::span<const Vec> positions, double spacing, int lag1, int lag2,
                                          double scale, double time_scale, int block)
    {
        if (!(lag1 >= 1 && lag2 > lag1) || !(spacing > 0.0))
            throw Error("diffusion_coefficient: need 1 <= lag1 < lag2 and spacing > 0");
        if (positions.size() < 2)
            throw Underpowered("underpowered");
        const std::size_t n_incr = (positions.size() - 1) / static_cast<std::size_t>(lag2);
        if (n_incr < 100)
            throw Underpowered("underpowered");
        const int dim = positions[0].dim;
        const double denom = (lag2 - lag1) * spacing * time_scale;

        DiffusionReport rep;
        rep.increments = n_incr;
        constexpr std::size_t kBatches = 16;
        const std::size_t span = positions.size() - lag2;
        for (int c = 0; c < dim; ++c)
        {
            EstimatorResult e;
            e.n = n_incr;
            e.label = "slope component " + std::to_string(c);
            e.value = (lag_variance(positions, c, lag2, scale, 0, span) -
                       lag_variance(positions, c, lag1, scale, 0, span)) /
                      denom;
            std::vector<double> per;
            for (std::size_t b = 0; b < kBatches; ++b)
            {
                const std::size_t lo = b * span / kBatches, hi = (b + 1) * span / kBatches;
                per.push_back((lag_variance(positions, c, lag2, scale, lo, hi) -
                               lag_variance(positions, c, lag1, scale, lo, hi)) /
                              denom);
            }
            const double mb = std::accumulate(per.begin(), per.end(), 0.0) / kBatches;
            double ss = 0.0;
            for (double v : per)
                ss += (v - mb) * (v - mb);
            e.std_error = std::sqrt(ss / (kBatches - 1) / kBatches);
            rep.slopes.push_back(e);
        }

        // correlations of non-overlapping lag1 increments
        const std::size_t m = (positions.size() - 1) / static_cast<std::size_t>(lag1);
        std::vector<std::vector<double>> inc(dim, std::vector<double>(m));
        for (std::size_t k = 0; k < m; ++k)
            for (int c = 0; c < dim; ++c)
                inc[c][k] = positions[(k + 1) * lag1][c] - positions[k * lag1][c];
        std::vector<double> mean(dim, 0.0), sd(dim, 0.0);
        for (int c = 0; c < dim; ++c)
        {
            mean[c] = std::accumulate(inc[c].begin(), inc[c].end(), 0.0) / m;
            double ss = 0.0;
            for (double v : inc[c])
                ss += (v - mean[c]) * (v - mean[c]);
            sd[c] = std::sqrt(ss / m);
        }
        rep.correlation.assign(dim, std::vector<double>(dim, 0.0));
        for (int a = 0; a < dim; ++a)
            for (int b = 0; b < dim; ++b)
            {
                double s = 0.0;
                for (std::size_t k = 0; k < m; ++k)
                    s += (inc[a][k] - mean[a]) * (inc[b][k] - mean[b]);
                const double den = sd[a] * sd[b] * m;
                rep.correlation[a][b] = den > 0.0 ? s / den : 0.0;
                if (a < block && b >= block)
                    rep.max_cross_correlation = std::max(rep.max_cross_correlation, std::abs(rep.correlation[a][b]));
            }
        rep.cross_correlation_stderr = 1.0 / std::sqrt(static_cast<double>(m));
        return rep;
    }

    // ---------------------------------------------------------------- stationary law

    std::vector<double> uniform_pair_distances(const Space &space, std::size_t n, std::uint64_t seed)
    {
        if (!space.finite())
            throw Error("uniform pairs need a torus");
        Rng rng(seed);
        std::vector<double> out(n);
        for (auto &x : out)
        {
            Vec a(space.dim), b(space.dim);
            for (int i = 0; i < space.dim; ++i)
            {
                a[i] = space.edge * rng.uniform();
                b[i] = space.edge * rng.uniform();
            }
            x = distance(a, b, space) / space.edge;
        }
        return out;
    }

    namespace
    {
        // Pearson statistic with counts deflated to the effective sample size,
        // so serial correlation along a run does not masquerade as non-uniformity.
        TestStatistic marginal_test(std::span<const Vec> pts, const Space &space, int grid, double n_eff)
        {
            const int d = space.dim;
            std::size_t cells = 1;
            for (int i = 0; i < d; ++i)
                cells *= grid;
            std::vector<double> counts(cells, 0.0);
            for (const auto &p : pts)
            {
                std::size_t idx = 0;
                for (int i = 0; i < d; ++i)
                {
                    int k = static_cast<int>(p[i] / space.edge * grid);
                    k = std::clamp(k, 0, grid - 1);
                    idx = idx * grid + k;
                }
                counts[idx] += 1.0;
            }
            const double shrink = std::min(1.0, n_eff / static_cast<double>(pts.size()));
            for (auto &c : counts)
                c *= shrink;
            const auto law = ReferenceLaw::uniform_torus(d, space.edge);
            std::vector<double> probs(cells, law.cell_probability(grid));
            TestStatistic t = chi_square_gof(counts, probs);
            t.n = pts.size();
            return t;
        }
    } // namespace

    StationaryReport stationary_independence(std::span<const Vec> xs, std::span<const Vec> ys, const Space &space,
                                             std::span<const double> reference, int grid)
    {
        if (!space.finite())
            throw Error("stationary law is defined on a torus");
        if (xs.size() != ys.size() || xs.empty())
            throw Error("stationary_independence: size mismatch");
        StationaryReport rep;
        std::vector<double> dist(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
            dist[i] = distance(xs[i], ys[i], space) / space.edge;
        // smallest effective size over the distance and the Fourier modes of each coordinate
        const double w = 2.0 * std::acos(-1.0) / space.edge;
        rep.effective_n = effective_sample_size(dist);
        std::vector<double> series(xs.size());
        for (const auto *pts : {&xs, &ys})
            for (int c = 0; c < space.dim; ++c)
                for (int trig = 0; trig < 2; ++trig)
                {
                    for (std::size_t i = 0; i < xs.size(); ++i)
                    {
                        const double a = w * (*pts)[i][c];
                        series[i] = trig ? std::sin(a) : std::cos(a);
                    }
                    rep.effective_n = std::min(rep.effective_n, effective_sample_size(series));
                }
        if (rep.effective_n < 50.0)
            throw Underpowered("insufficient effective sample size");
        rep.marginal_x = marginal_test(xs, space, grid, rep.effective_n);
        rep.marginal_y = marginal_test(ys, space, grid, rep.effective_n);
        rep.distance_ks = ks_two_sample(dist, reference);

        std::vector<double> f(xs.size()), g(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i)
        {
            f[i] = std::cos(w * xs[i][0]);
            g[i] = std::cos(w * ys[i][0]);
        }
        const double n = static_cast<double>(xs.size());
        const double mf = std::accumulate(f.begin(), f.end(), 0.0) / n;
        const double mg = std::accumulate(g.begin(), g.end(), 0.0) / n;
        double sfg = 0.0, sff = 0.0, sgg = 0.0;
        for (std::size_t i = 0; i < f.size(); ++i)
        {
            sfg += (f[i] - mf) * (g[i] - mg);
            sff += (f[i] - mf) * (f[i] - mf);
            sgg += (g[i] - mg) * (g[i] - mg);
        }
        rep.test_function_correlation = (sff > 0.0 && sgg > 0.0) ? sfg / std::sqrt(sff * sgg) : 0.0;
        rep.test_function_correlation_stderr = 1.0 / std::sqrt(rep.effective_n);

        std::vector<double> steps;
        for (std::size_t i = 1; i < dist.size(); ++i)
            steps.push_back((dist[i] - dist[i - 1]) * space.edge);
        if (!steps.empty())
            rep.drift = batch_mean(steps, 16, "drift of |X-Y| per sample");
        return rep;
    }

    EstimatorResult contact_split(std::span<const int> episode_balls)
    {
        EstimatorResult r;
        r.label = "fraction of contact episodes on X";
        r.n = episode_balls.size();
        if (episode_balls.empty())
            throw Underpowered("no contact episodes");
        const double k = static_cast<double>(std::count(episode_balls.begin(), episode_balls.end(), 0));
        const double n = static_cast<double>(r.n);
        r.value = k / n;
        r.std_error = std::sqrt(r.value * (1.0 - r.value) / n);
        return r;
    }
} // namespace stirlab
