#pragma once

#include <cstdint>

namespace pixmatch {

/// xoshiro256** seeded through splitmix64. Every stochastic step in the
/// toolkit draws from this generator so that seeded outputs are identical
/// across runs and platforms; the std:: distributions are avoided because
/// their algorithms are implementation-defined.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    /// Uniform in [0, 1) with 53 random bits.
    double uniform();

    /// Uniform integer in [0, n). n must be > 0.
    std::uint64_t below(std::uint64_t n);

    /// Standard normal via Box-Muller (one value per call, pair cached).
    double normal();

private:
    std::uint64_t s_[4];
    double cached_normal_ = 0.0;
    bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t& state);

/// Derive an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

}  // namespace pixmatch
