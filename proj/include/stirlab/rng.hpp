#pragma once

#include "stirlab/vec.hpp"

#include <cstdint>
#include <random>

namespace stirlab
{
    /// SplitMix64 finalizer; used to derive independent seeds.
    std::uint64_t splitmix64(std::uint64_t x);

    /// Seed of replica (or block) `index` under `base_seed`:
    ///   splitmix64(base_seed ^ splitmix64(index + 0x9E3779B97F4A7C15)).
    std::uint64_t replica_seed(std::uint64_t base_seed, std::uint64_t index);

    /// Reproducible random source. The raw stream is std::mt19937_64 seeded
    /// with the 64-bit seed; every variate below consumes that stream in a
    /// fixed, documented way so paths replay bit-for-bit on any platform:
    ///   uniform()   one draw, top 53 bits scaled to [0,1)
    ///   normal()    Marsaglia polar method, pairs cached (second value of a
    ///               pair is returned by the next call)
    ///   direction() d normals, normalized
    class Rng
    {
    public:
        explicit Rng(std::uint64_t seed) : engine_(seed) {}

        std::uint64_t next_u64() { return engine_(); }
        double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
        /// Uniform on (0,1], safe for logarithms.
        double uniform_pos() { return 1.0 - uniform(); }
        double normal();
        double exponential(double rate) { return -std::log(uniform_pos()) / rate; }
        /// Vector of `d` independent N(0, variance) components.
        Vec gaussian(int d, double variance);
        /// Uniformly distributed point on the unit sphere in R^d.
        Vec direction(int d);

    private:
        std::mt19937_64 engine_;
        double cached_ = 0.0;
        bool has_cached_ = false;
    };
} // namespace stirlab
