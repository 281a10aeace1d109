#pragma once

#include "gausslab/common.hpp"

#include <cmath>
#include <cstdint>

namespace gausslab {

namespace detail {

// splitmix64 finalizer; full avalanche on 64 bits.
inline std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace detail

/// Counter-based Gaussian sampler: output depends only on (seed, stream,
/// counter), so substreams obtained via split() are independent of call
/// order and safe to hand to worker threads. No global state.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed, std::uint64_t stream = 0)
        : base_(detail::mix64(seed ^ detail::mix64(stream * 0xda942042e4dd58b5ULL))) {}

    /// Derived sampler with an independent substream.
    GaussianSampler split(std::uint64_t substream) const {
        GaussianSampler s(0);
        s.base_ = detail::mix64(base_ ^ detail::mix64(substream + 0x9e3779b97f4a7c15ULL));
        s.counter_ = 0;
        s.have_cached_ = false;
        return s;
    }

    std::uint64_t next_u64() { return detail::mix64(base_ ^ (counter_++ * 0xbf58476d1ce4e5b9ULL)); }

    /// Uniform in (0, 1].
    double uniform() { return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53; }

    /// Standard normal via Box-Muller; caches the paired draw.
    double normal() {
        if (have_cached_) {
            have_cached_ = false;
            return cached_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        cached_ = r * std::sin(2.0 * pi * u2);
        have_cached_ = true;
        return r * std::cos(2.0 * pi * u2);
    }

    Point normal_vector(int n) {
        Point x(n);
        for (int i = 0; i < n; ++i) x[i] = normal();
        return x;
    }

private:
    std::uint64_t base_;
    std::uint64_t counter_ = 0;
    double cached_ = 0.0;
    bool have_cached_ = false;
};

}  // namespace gausslab
