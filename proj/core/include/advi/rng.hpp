#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "advi/math.hpp"

namespace advi {

/**
 * Deterministic random source: a seeded mt19937_64 with explicit draw
 * algorithms (Box-Muller normals, rejection-sampled bounded integers).
 * Standard-library distributions are avoided on purpose: their algorithms are
 * implementation-defined, and reproducibility here must depend only on the
 * engine, which the standard pins down exactly.
 */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /** Uniform on (0, 1]; never returns 0, so log(u) is always finite. */
  double uniform() {
    return static_cast<double>((engine_() >> 11) + 1) * 0x1p-53;
  }

  /** Standard normal via Box-Muller; caches the second draw of each pair. */
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    const double u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * math::pi() * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  /** Uniform integer in [0, n) by rejection (no modulo bias). */
  std::uint64_t uniform_below(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t x = engine_();
      if (x >= threshold) return x % n;
    }
  }

  std::uint64_t raw() { return engine_(); }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/** SplitMix64 hash; used to derive independent stream seeds from a base seed. */
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

}  // namespace advi
