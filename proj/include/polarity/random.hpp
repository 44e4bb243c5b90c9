#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace polarity {

// mt19937_64 has a fully specified output sequence, so seeded runs agree
// across standard library implementations as long as we avoid the
// implementation-defined std::*_distribution adaptors.
using Rng = std::mt19937_64;

// Derives an independent seed for a named consumer (e.g. "crossover",
// "bootstrap" member k) from the top-level experiment seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view consumer,
                          std::uint64_t index = 0);

// Uniform integer in [0, n) by rejection sampling. n must be > 0.
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace polarity
