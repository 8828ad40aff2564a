#pragma once

#include "stirlab/rng.hpp"

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace stirlab
{
    /// Runs fn(block) for every block in [0, n_blocks) on up to `threads`
    /// workers and returns the results in block order. Blocks own disjoint
    /// state, so the result is independent of the worker count.
    template <class R, class F>
    std::vector<R> run_blocks(std::size_t n_blocks, unsigned threads, F &&fn)
    {
        std::vector<R> out(n_blocks);
        threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n_blocks, 1))));
        if (threads == 1)
        {
            for (std::size_t b = 0; b < n_blocks; ++b)
                out[b] = fn(b);
            return out;
        }
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex failure_mutex;
        auto worker = [&]
        {
            for (;;)
            {
                const std::size_t b = next.fetch_add(1);
                if (b >= n_blocks)
                    return;
                try
                {
                    out[b] = fn(b);
                }
                catch (...)
                {
                    std::lock_guard lock(failure_mutex);
                    if (!failure)
                        failure = std::current_exception();
                }
            }
        };
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned i = 0; i < threads; ++i)
            pool.emplace_back(worker);
        for (auto &t : pool)
            t.join();
        if (failure)
            std::rethrow_exception(failure);
        return out;
    }

    inline constexpr std::size_t kDefaultBlocks = 64;

    /// Draws n independent samples fn(rng) split over fixed seed blocks;
    /// block b uses Rng(replica_seed(seed, b)). Output is in path order.
    template <class F>
    std::vector<double> sample_paths(std::size_t n, std::uint64_t seed, unsigned threads, F &&fn,
                                     std::size_t blocks = kDefaultBlocks)
    {
        blocks = std::max<std::size_t>(1, std::min(blocks, n));
        auto chunks = run_blocks<std::vector<double>>(blocks, threads, [&](std::size_t b)
        {
            const std::size_t lo = b * n / blocks;
            const std::size_t hi = (b + 1) * n / blocks;
            Rng rng(replica_seed(seed, b));
            std::vector<double> v;
            v.reserve(hi - lo);
            for (std::size_t i = lo; i < hi; ++i)
                v.push_back(fn(rng));
            return v;
        });
        std::vector<double> all;
        all.reserve(n);
        for (auto &c : chunks)
            all.insert(all.end(), c.begin(), c.end());
        return all;
    }
} // namespace stirlab
