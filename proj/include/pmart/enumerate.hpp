#pragma once

#include "pmart/scalar.hpp"

#include <algorithm>
#include <cstddef>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace pmart {

inline constexpr std::size_t default_enumeration_cutoff = 10;
inline constexpr std::size_t max_enumeration_cutoff = 12;

struct EnumerationConfig {
    std::size_t cutoff = default_enumeration_cutoff;
    unsigned workers = 0; // 0: one per hardware thread
};

inline void require_enumerable(std::size_t n, const EnumerationConfig& cfg)
{
    if (cfg.cutoff > max_enumeration_cutoff)
        throw InvalidInput("enumeration cutoff may not exceed " +
                           std::to_string(max_enumeration_cutoff));
    if (n > cfg.cutoff)
        throw CutoffExceeded("n = " + std::to_string(n) + " exceeds the enumeration cutoff " +
                             std::to_string(cfg.cutoff) +
                             "; reduce n or use Monte Carlo mode");
}

inline unsigned resolve_workers(unsigned requested, std::size_t blocks)
{
    unsigned w = requested ? requested : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::size_t>(w, std::max<std::size_t>(blocks, 1)));
}

// Evaluates fn(b) for b in [0, blocks) and returns the results in block
// order, so any reduction over them is independent of the worker count.
template <typename Fn>
auto run_blocks(std::size_t blocks, unsigned workers, Fn&& fn)
{
    using R = decltype(fn(std::size_t{0}));
    std::vector<R> out(blocks);
    unsigned w = resolve_workers(workers, blocks);
    if (w <= 1) {
        for (std::size_t b = 0; b < blocks; ++b)
            out[b] = fn(b);
        return out;
    }
    std::vector<std::exception_ptr> errors(w);
    {
        std::vector<std::jthread> pool;
        pool.reserve(w);
        for (unsigned t = 0; t < w; ++t)
            pool.emplace_back([&, t] {
                try {
                    for (std::size_t b = t; b < blocks; b += w)
                        out[b] = fn(b);
                } catch (...) {
                    errors[t] = std::current_exception();
                }
            });
    }
    for (auto& e : errors)
        if (e)
            std::rethrow_exception(e);
    return out;
}

} // namespace pmart
