#pragma once

#include <cstdint>
#include <random>

namespace critmkt {

/// Engine used for every stochastic operation in the toolkit.
using Rng = std::mt19937_64;

/// SplitMix64 finalizer. Bijective on 64-bit words.
[[nodiscard]] std::uint64_t splitmix64(std::uint64_t x) noexcept;

/**
 * Derive the seed of an independent sub-stream from a master seed.
 *
 * Stream splitting: stream `i` of master `m` is seeded with
 * splitmix64(splitmix64(m) ^ splitmix64(i + golden)). Replicas, bootstrap
 * resamples and CV folds each take their own stream index, so results do not
 * depend on scheduling or thread count.
 */
[[nodiscard]] std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) noexcept;

/// Engine for sub-stream `stream` of `master`.
[[nodiscard]] Rng make_rng(std::uint64_t master, std::uint64_t stream = 0);

}  // namespace critmkt
