#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include "pardet/geometry.hpp"

namespace pardet {

// mt19937_64 with hand-rolled distributions. The std:: distributions are
// implementation-defined, which would make "same seed, same output" hold only
// per standard library; these samplers are portable.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Stream derivation for per-scene / per-stage RNGs (splitmix64 mix).
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  uint64_t next_u64() { return engine_(); }

  // [0, 1)
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // (0, 1]
  double uniform_open_low() { return 1.0 - uniform(); }

  // [0, n)
  uint64_t uniform_int(uint64_t n) { return engine_() % n; }

  bool bernoulli(double p) { return uniform() < p; }

  double normal(double mean = 0.0, double sigma = 1.0) {
    if (have_spare_) {
      have_spare_ = false;
      return mean + sigma * spare_;
    }
    double u1 = uniform_open_low();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return mean + sigma * r * std::cos(2.0 * kPi * u2);
  }

  int poisson(double lambda) {
    // Knuth; fine for the small rates used here.
    double l = std::exp(-lambda);
    int k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > l);
    return k - 1;
  }

  Vec3 unit_vector() {
    double z = uniform(-1.0, 1.0);
    double phi = uniform(0.0, 2.0 * kPi);
    double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    return {r * std::cos(phi), r * std::sin(phi), z};
  }

  // Shoemake's uniform random rotation.
  Quat unit_quaternion() {
    double u1 = uniform(), u2 = uniform(), u3 = uniform();
    double a = std::sqrt(1.0 - u1), b = std::sqrt(u1);
    return Quat{b * std::cos(2.0 * kPi * u3), a * std::sin(2.0 * kPi * u2),
                a * std::cos(2.0 * kPi * u2), b * std::sin(2.0 * kPi * u3)}
        .normalized();
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace pardet
