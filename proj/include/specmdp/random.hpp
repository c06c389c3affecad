#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace specmdp {

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

}  // namespace detail

/// Deterministic random stream. Streams are derived from
/// (master seed, stream index), so replicate k always sees the same draws
/// no matter how replicates are partitioned across workers.
///
/// All primitive samplers are hand-rolled on top of the 64-bit engine;
/// output does not depend on the standard library's distribution
/// implementations.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) { seed_from(seed, 0); }

  RandomStream(std::uint64_t master_seed, std::uint64_t stream_index) {
    seed_from(master_seed, stream_index);
  }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform on (lo, hi).
  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  /// Standard normal via Box-Muller; consumes exactly two engine steps.
  double normal() {
    const double u1 = 1.0 - uniform01();  // (0, 1], log is safe
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t bits() { return engine_(); }

 private:
  void seed_from(std::uint64_t master_seed, std::uint64_t stream_index) {
    std::uint64_t s = master_seed + 0x9E3779B97F4A7C15ull * (stream_index + 1);
    const std::uint64_t k0 = detail::splitmix64(s);
    const std::uint64_t k1 = detail::splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(k0),
                      static_cast<std::uint32_t>(k0 >> 32),
                      static_cast<std::uint32_t>(k1),
                      static_cast<std::uint32_t>(k1 >> 32)};
    engine_.seed(seq);
  }

  std::mt19937_64 engine_;
};

}  // namespace specmdp
