#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

namespace deformloc {

/// splitmix64 finalizer; used both as a hash and to expand seeds.
inline uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Derive an independent stream seed from (seed, tag). The whole pipeline
/// keys parallel work off this so batch runs equal isolated runs.
inline uint64_t derive_seed(uint64_t seed, uint64_t tag) {
  return mix64(seed ^ mix64(tag + 0x517cc1b727220a95ULL));
}
inline uint64_t derive_seed(uint64_t seed, uint64_t tag, uint64_t index) {
  return derive_seed(derive_seed(seed, tag), index);
}

/// Deterministic RNG with explicit transforms (the std distributions are
/// implementation-defined; these are not).
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(mix64(seed)) {}

  uint64_t next_u64() { return gen_(); }

  /// Uniform in [0, 1).
  double uniform() { return (gen_() >> 11) * 0x1.0p-53; }

  /// Uniform in [a, b).
  double uniform(double a, double b) { return a + (b - a) * uniform(); }

  /// Uniform integer in [0, n). Rejection-free Lemire-style reduction is
  /// overkill here; 64-bit modulo bias at our n is < 2^-50.
  uint64_t uniform_index(uint64_t n) { return gen_() % n; }

  /// Standard normal via Box-Muller (cached pair).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// FNV-1a over a byte string; stable across platforms, used for config hashes.
inline uint64_t fnv1a64(const std::string& s) {
  uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace deformloc
