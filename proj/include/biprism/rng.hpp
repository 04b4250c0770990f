#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace biprism {

/// Deterministic random generator (xoshiro256++) with hand-rolled samplers.
///
/// The standard <random> distributions are implementation-defined, so two
/// builds of the same seed could disagree. Everything downstream (event
/// streams, images, frames) must be bit-reproducible from (seed, parameters),
/// which is why the samplers live here instead.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    // splitmix64 expansion of the seed into the xoshiro state
    uint64_t s = seed;
    for (auto& w : state_) w = splitmix(s);
  }

  /// Derived, statistically independent stream. Streams are keyed by a
  /// name (module role) and an index (run/block number).
  static Rng substream(uint64_t root, std::string_view name, uint64_t index = 0) {
    uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (char c : name) {
      h ^= static_cast<unsigned char>(c);
      h *= 1099511628211ull;
    }
    uint64_t s = root ^ h;
    s = splitmix(s) + index * 0x9e3779b97f4a7c15ull;
    return Rng(splitmix(s));
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0,1) with 53 random bits.
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  bool bernoulli(double p) { return uniform01() < p; }

  /// Exponential with the given mean; uses -mean*log(1-u), u in [0,1).
  double exponential(double mean) { return -mean * std::log1p(-uniform01()); }

  /// Standard normal (polar method; second deviate cached).
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    have_spare_ = true;
    return u * m;
  }

  /// Exact Poisson deviate. Inversion below mean 30; larger means are split
  /// using Poisson additivity so the inversion loop stays short.
  int64_t poisson(double mean) {
    if (mean <= 0.0) return 0;
    int64_t total = 0;
    while (mean > 30.0) {
      total += poisson_inversion(15.0);
      mean -= 15.0;
    }
    return total + poisson_inversion(mean);
  }

 private:
  static constexpr uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  static uint64_t splitmix(uint64_t& s) {
    uint64_t z = (s += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  int64_t poisson_inversion(double mean) {
    const double limit = std::exp(-mean);
    double prod = uniform01();
    int64_t k = 0;
    while (prod > limit) {
      prod *= uniform01();
      ++k;
    }
    return k;
  }

  uint64_t state_[4];
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace biprism
