#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace rrsens {

// All randomness in the library flows through this wrapper. The mt19937_64
// engine is fully specified by the standard, and the distribution transforms
// below are our own, so identical seeds give identical streams on every
// platform and at every thread count.
// Whitened sub-seed for job `index` of a run seeded with `seed`; `salt`
// separates consumers (bootstrap vs. data generation) so they never share a
// stream even for equal (seed, index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(mix(seed)) {}

  // Independent stream for job `index` of a run seeded with `seed`.
  static Rng stream(std::uint64_t seed, std::uint64_t index, std::uint64_t salt = 0) {
    return Rng(derive_seed(seed, index, salt));
  }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n); n must be positive.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - n + 1;
    for (;;) {
      const std::uint64_t x = engine_();
      const std::uint64_t r = x % n;
      if (x - r <= limit) return r;
    }
  }

  bool bernoulli(double p) { return uniform() < p; }

  // Box-Muller; the spare value is cached, so draw order matters for
  // reproducibility (as with any stream).
  double normal(double mean, double sd) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sd * spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * 3.14159265358979323846 * u2;
    spare_ = radius * std::sin(theta);
    have_spare_ = true;
    return mean + sd * radius * std::cos(theta);
  }

  // Index in [0, k) drawn with probabilities p[0..k); p must sum to ~1.
  int categorical(const double* p, int k) {
    const double u = uniform();
    double cum = 0.0;
    for (int i = 0; i < k - 1; ++i) {
      cum += p[i];
      if (u < cum) return i;
    }
    return k - 1;
  }

 private:
  friend std::uint64_t derive_seed(std::uint64_t, std::uint64_t, std::uint64_t);

  static std::uint64_t mix(std::uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index, std::uint64_t salt) {
  std::uint64_t s = Rng::mix(seed ^ (0x9e3779b97f4a7c15ULL + salt));
  return Rng::mix(s ^ index);
}

}  // namespace rrsens
