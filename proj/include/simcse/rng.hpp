// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <string_view>

namespace simcse {

/// Deterministic pseudo-random generator used for every stochastic choice in the
/// library (weight init, shuffling, dropout masks).
///
/// Algorithm: xoshiro256** with its 256-bit state expanded from the 64-bit seed by
/// four successive splitmix64 outputs. Uniform doubles take the top 53 bits of a
/// draw; normals use the Box-Muller transform with the sine branch cached. Nothing
/// here depends on <random> distributions, so streams are identical on every
/// platform.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0);

    /// Independent generator for a named sub-stream of `seed`.
    static Rng for_stream(std::uint64_t seed, std::string_view stream);

    std::uint64_t seed() const { return seed_; }

    std::uint64_t next_u64();
    /// Uniform in [0, 1).
    double uniform();
    /// Uniform integer in [0, bound); bound must be positive.
    std::uint64_t below(std::uint64_t bound);
    double normal(double mean = 0.0, double stddev = 1.0);
    bool bernoulli(double p);

private:
    std::uint64_t seed_;
    std::array<std::uint64_t, 4> state_{};
    bool has_spare_ = false;
    double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis = 0xcbf29ce484222325ULL);

}  // namespace simcse
