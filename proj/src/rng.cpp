#include "stirlab/rng.hpp"

#include <cmath>

namespace stirlab
{
    std::uint64_t splitmix64(std::uint64_t x)
    {
        x += 0x9E3779B97F4A7C15ULL;
        x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
        x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
        return x ^ (x >> 31);
    }

    std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t index)
    {
        return splitmix64(base_seed ^ splitmix64(index + 0x9E3779B97F4A7C15ULL));
    }

    double Rng::normal()
    {
        if (has_cached_)
        {
            has_cached_ = false;
            return cached_;
        }
        double u, v, s;
        do
        {
            u = 2.0 * uniform() - 1.0;
            v = 2.0 * uniform() - 1.0;
            s = u * u + v * v;
        } while (s >= 1.0 || s == 0.0);
        const double f = std::sqrt(-2.0 * std::log(s) / s);
        cached_ = v * f;
        has_cached_ = true;
        return u * f;
    }

    Vec Rng::gaussian(int d, double variance)
    {
        const double sd = std::sqrt(variance);
        Vec v(d);
        for (int i = 0; i < d; ++i)
            v[i] = sd * normal();
        return v;
    }

    Vec Rng::direction(int d)
    {
        for (;;)
        {
            Vec v = gaussian(d, 1.0);
            const double n = v.norm();
            if (n > 1e-300)
                return v * (1.0 / n);
        }
    }
} // namespace stirlab
