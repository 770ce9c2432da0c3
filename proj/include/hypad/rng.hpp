#pragma once

#include <cstdint>
#include <random>

namespace hypad {

// Deterministic random source. Every stochastic component takes one of these
// explicitly so that a run is a pure function of its seed.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  // Derives an independent stream; `salt` distinguishes consumers that must
  // not share draw order (data shuffling vs. noise sampling etc.).
  Rng fork(uint64_t salt) const {
    uint64_t s = mix(seed_base_ ^ salt);
    return Rng(s, 0);
  }

  static Rng with_base(uint64_t seed) {
    Rng r(mix(seed ^ 0x9e3779b97f4a7c15ull));
    r.seed_base_ = seed;
    return r;
  }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> d(lo, hi);
    return d(engine_);
  }

  double normal(double mean = 0.0, double stddev = 1.0) {
    std::normal_distribution<double> d(mean, stddev);
    return d(engine_);
  }

  uint64_t integer() { return engine_(); }

  std::mt19937_64& engine() { return engine_; }

 private:
  Rng(uint64_t seed, int) : engine_(seed) {}

  static uint64_t mix(uint64_t x) {
    // splitmix64 finalizer
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
  }

  std::mt19937_64 engine_;
  uint64_t seed_base_ = 0;
};

}  // namespace hypad
