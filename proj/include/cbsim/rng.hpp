#pragma once

#include <cstdint>

namespace cbsim {

// SplitMix64 finalizer. Used as a counter-based generator: the n-th output of
// the stream keyed by `key` is mix64(key + (n + 1) * gamma), so any draw can be
// computed without sequential state.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept
{
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t stream_draw(std::uint64_t key, std::uint64_t counter) noexcept
{
    return mix64(key + (counter + 1) * kGoldenGamma);
}

/// Per-agent stream key. Agent i of a population seeded with `seed` draws
/// from exactly the same stream as a single-agent run given this key.
constexpr std::uint64_t agent_key(std::uint64_t seed, std::uint64_t agent) noexcept
{
    return mix64(mix64(seed) ^ mix64(agent + 0x5851F42D4C957F2DULL));
}

/// Uniform in [0, 1) with 53 random bits.
constexpr double to_unit(std::uint64_t bits) noexcept
{
    return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// Standard normal for (key, day). Pure function of its arguments: the draws
/// come from the counter block reserved for `day` in the stream `key`.
double standard_normal(std::uint64_t key, std::uint64_t day) noexcept;

}  // namespace cbsim
