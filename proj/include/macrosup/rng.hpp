#pragma once

#include <cstdint>

namespace macrosup::detail {

// splitmix64 finalizer; used only to derive decorrelated seeds.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic seed for (master seed, stream, unit index). Sampler chunks
// and bootstrap resamples both derive their generators this way, which is
// what makes parallel and serial execution bit-identical.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  return splitmix64(splitmix64(splitmix64(master) ^ stream) ^ index);
}

inline constexpr std::uint64_t kStreamQuadratureX = 1;
inline constexpr std::uint64_t kStreamQuadratureP = 2;
inline constexpr std::uint64_t kStreamBootstrapX = 3;
inline constexpr std::uint64_t kStreamBootstrapP = 4;

// Uniform double in [0, 1) from a 64-bit word (53 mantissa bits).
inline double u01(std::uint64_t word) {
  return static_cast<double>(word >> 11) * 0x1.0p-53;
}

}  // namespace macrosup::detail
