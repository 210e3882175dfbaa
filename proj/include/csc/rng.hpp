#pragma once

#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "csc/errors.hpp"

namespace csc {

// Counter-based splittable PRNG.
//
// A stream is a (key, counter) pair; draw k of a stream is
// mix(key + (k+1) * PHI) where mix is the splitmix64 finalizer and PHI the
// 64-bit golden-ratio constant. Child streams are pure functions of the
// parent key and a stream id, so experiments can hand every trial its own
// stream up front and run them in any order (or in parallel) while producing
// bit-identical draws.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : key_(mix(seed + kPhi)) {}

  static Rng stream(std::uint64_t seed, std::uint64_t id) {
    return Rng(seed).derive(id);
  }

  // Independent child stream; deterministic in (parent key, id).
  Rng derive(std::uint64_t id) const {
    Rng child(0);
    child.key_ = mix(key_ ^ mix(id + kPhi));
    child.counter_ = 0;
    child.have_spare_ = false;
    return child;
  }

  std::uint64_t next_u64() {
    counter_ += kPhi;
    return mix(key_ + counter_);
  }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Unbiased uniform integer in [0, bound) by rejection.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw ValidationError("next_below: bound must be positive");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return v % bound;
  }

  // Standard normal via Marsaglia's polar method (second value cached).
  double next_gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * next_double() - 1.0;
      v = 2.0 * next_double() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  // First k entries of a uniform random permutation of {0, ..., pool-1}.
  std::vector<int> sample_without_replacement(int pool, int k) {
    if (pool < 0 || k < 0 || k > pool)
      throw ValidationError("sample_without_replacement: need 0 <= k <= pool");
    std::vector<int> idx(static_cast<std::size_t>(pool));
    std::iota(idx.begin(), idx.end(), 0);
    for (int j = 0; j < k; ++j) {
      const int swap_with =
          j + static_cast<int>(next_below(static_cast<std::uint64_t>(pool - j)));
      std::swap(idx[j], idx[swap_with]);
    }
    idx.resize(static_cast<std::size_t>(k));
    return idx;
  }

 private:
  static constexpr std::uint64_t kPhi = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xBF58476D1CE4E5B9ull;
    z ^= z >> 27;
    z *= 0x94D049BB133111EBull;
    z ^= z >> 31;
    return z;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace csc
