#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace comets {

using Rng = std::mt19937_64;

/// Mixes a 64-bit value (splitmix64 finalizer).
std::uint64_t mix64(std::uint64_t x) noexcept;

/// Seed for a named substream of a root seed ("data", "init", "train", "sample", ...).
std::uint64_t substream_seed(std::uint64_t root, std::string_view name) noexcept;

/// Seed for the index-th member of a family of streams (e.g. one per sampled window).
std::uint64_t indexed_seed(std::uint64_t root, std::uint64_t index) noexcept;

inline Rng make_rng(std::uint64_t root, std::string_view name) {
    return Rng(substream_seed(root, name));
}

/// Standard normal draw via Box-Muller so streams are identical across standard libraries.
double standard_normal(Rng& rng);

/// Uniform draw on [0, 1).
double uniform01(Rng& rng);

/// Uniform integer on [0, n).
std::uint64_t uniform_index(Rng& rng, std::uint64_t n);

}  // namespace comets
