#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace fairsample {

using Rng = std::mt19937_64;

// splitmix64 finalizer; used to decorrelate derived seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Labeled sub-seed derivation: every component draws from one master seed
/// but can be re-run in isolation given the label.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label) {
  return splitmix64(master ^ fnv1a64(label));
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::string_view label,
                                    std::uint64_t index) {
  return splitmix64(derive_seed(master, label) + 0x9e3779b97f4a7c15ULL * (index + 1));
}

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

/// Uniform draw from [0, n). Requires n >= 1.
inline std::int64_t uniform_index(Rng& rng, std::int64_t n) {
  return std::uniform_int_distribution<std::int64_t>(0, n - 1)(rng);
}

}  // namespace fairsample
