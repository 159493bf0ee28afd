#pragma once

// Random streams for simulation and Monte Carlo.
//
// Every stream is seeded from a 64-bit value; replicate streams are derived
// from (master seed, coordinates) through a counter-based mix so results do
// not depend on scheduling order.

#include <cmath>
#include <cstdint>
#include <random>

namespace dmnlife {

// SplitMix64 finalizer. A bijection on 64-bit words.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  using engine_type = std::mt19937_64;

  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t seed() const noexcept { return seed_; }

  // Uniform on the open interval (0, 1), 53 bits of resolution.
  double uniform_open() {
    const std::uint64_t bits = engine_() >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
  }

  // Standard exponential by inversion.
  double exponential() { return -std::log(uniform_open()); }

  engine_type& engine() noexcept { return engine_; }

 private:
  std::uint64_t seed_;
  engine_type engine_;
};

}  // namespace dmnlife
