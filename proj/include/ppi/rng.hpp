#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace ppi {

/// Deterministic random source. Uniform doubles are derived from the raw
/// 64-bit stream instead of std::uniform_real_distribution so that traces
/// are reproducible across standard library implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in [0, hi).
  double uniform(double hi) { return uniform() * hi; }

  /// Uniform double in [lo, hi).
  double uniform(double lo, double hi) { return lo + uniform() * (hi - lo); }

  std::uint64_t next() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

/// splitmix64 step; used to derive independent per-run seeds.
inline std::uint64_t mix_seed(std::uint64_t state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for the k-th run of a Monte Carlo batch.
inline std::uint64_t derive_run_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(master ^ mix_seed(index + 1));
}

/// FNV-1a over (master, a, b); used for per-cell grid seeds so any subset of
/// cells reproduces independently of scheduling order.
inline std::uint64_t derive_cell_seed(std::uint64_t master, std::string_view a,
                                      std::string_view b) {
  std::uint64_t h = 1469598103934665603ULL;
  auto eat = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    h ^= 0xff;
    h *= 1099511628211ULL;
  };
  for (int i = 0; i < 8; ++i) {
    h ^= (master >> (8 * i)) & 0xffu;
    h *= 1099511628211ULL;
  }
  eat(a);
  eat(b);
  return h;
}

}  // namespace ppi
