#pragma once

#include <cstdint>
#include <random>

namespace evidential {

using Rng = std::mt19937_64;

/// Independent stream for replicate `index` under master `seed`.
/// Streams depend only on (seed, index), never on scheduling order.
Rng make_stream(std::uint64_t seed, std::uint64_t index);

/// Derives a child seed from a parent seed and a path of indices.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0);

}  // namespace evidential
