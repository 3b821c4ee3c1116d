#pragma once

#include <array>
#include <cstdint>

namespace lab {

/// Counter-based RNG (Philox4x32-10).  A generator is addressed by
/// (seed, stream); ensemble members get their own streams by split(),
/// so parallel sampling is reproducible regardless of scheduling.
class Rng {
public:
    explicit Rng(uint64_t seed, uint64_t stream = 0)
        : seed_(seed), stream_(stream), counter_(0), have_(0) {}

    /// Independent generator for substream `i` (counter space is disjoint).
    Rng split(uint64_t i) const { return Rng(seed_, stream_ * 0x9E3779B97F4A7C15ull + i + 1); }

    uint64_t next_u64();
    /// Uniform on the open interval (0,1).
    double uniform();
    /// Standard normal via the inverse CDF (deterministic across platforms).
    double normal();

    uint64_t seed() const { return seed_; }
    uint64_t stream() const { return stream_; }

    /// Raw Philox4x32-10 block; exposed for the known-answer tests.
    static std::array<uint32_t, 4> philox4x32(const std::array<uint32_t, 4>& ctr,
                                              const std::array<uint32_t, 2>& key);

private:
    uint64_t seed_;
    uint64_t stream_;
    uint64_t counter_;
    std::array<uint32_t, 4> buf_{};
    int have_;
};

/// Inverse of the standard normal CDF (Wichura's AS241, double precision).
double inverse_normal_cdf(double p);
/// Standard normal CDF.
double normal_cdf(double x);

}  // namespace lab
