#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace hubforge {

/// splitmix64 finalizer. Used to derive independent replicate streams.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// seed_r = mix64(mix64(master) ^ (r * golden)). Replicate r can be replayed alone.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t replicate) {
  return mix64(mix64(master) ^ (replicate * 0xd1b54a32d192ed03ULL + 0x8cb92ba72f3d8dd7ULL));
}

/// Caller-owned random stream. Draws are produced by explicit transforms of the
/// 64-bit engine output so that results do not depend on the standard library's
/// distribution implementations.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed) : engine_(mix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Exp(rate) by inversion; strictly positive with probability one.
  double exponential(double rate) { return -std::log1p(-uniform()) / rate; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hubforge
