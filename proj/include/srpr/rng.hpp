#pragma once

#include <cmath>
#include <cstdint>

namespace srpr {

// Counter-based 64-bit generator (splitmix64). Streams are derived from a
// master seed by hashing (seed, tag) so that ensemble generation, corruption
// and initialization draw from independent streams.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ULL;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBULL;
  z ^= z >> 31;
  return z;
}

inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t tag) {
  return mix64(seed + 0x9E3779B97F4A7C15ULL * (tag + 1));
}

enum class Stream : std::uint64_t {
  Ensemble = 1,
  Corruption = 2,
  Init = 3,
};

class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : state_(seed) {}
  Rng(std::uint64_t seed, Stream stream)
      : state_(derive_stream(seed, static_cast<std::uint64_t>(stream))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~0ULL; }

  result_type operator()() {
    state_ += 0x9E3779B97F4A7C15ULL;
    return mix64(state_);
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  // uniform on the open interval (0, 1); endpoint draws are rejected
  double uniform_open() {
    for (;;) {
      double u = uniform();
      if (u > 0.0) return u;
    }
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; platform-independent given the bit stream
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform_open();
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  // uniform integer in [0, n)
  std::uint64_t uniform_int(std::uint64_t n) {
    // rejection to remove modulo bias
    std::uint64_t limit = max() - max() % n;
    for (;;) {
      std::uint64_t v = (*this)();
      if (v < limit) return v % n;
    }
  }

  std::int64_t sign() { return ((*this)() >> 63) ? 1 : -1; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace srpr
