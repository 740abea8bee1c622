#pragma once

#include <cstdint>
#include <random>

namespace contagion {

// Counter-based stream derivation: the engine for (seed, stream) is seeded by
// two SplitMix64 rounds, so streams never depend on draw order elsewhere.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

using Engine = std::mt19937_64;
Engine make_engine(std::uint64_t seed, std::uint64_t stream);

// Reserved stream ids. Idiosyncratic bank streams use the bank index.
inline constexpr std::uint64_t kCommonNoiseStream = 0xC0FFEE0000000001ULL;
inline constexpr std::uint64_t kNetworkNoiseStream = 0xC0FFEE0000000002ULL;
inline constexpr std::uint64_t kInitialStateStream = 0xC0FFEE0000000003ULL;
inline constexpr std::uint64_t kThetaStream = 0xC0FFEE0000000004ULL;

}  // namespace contagion
