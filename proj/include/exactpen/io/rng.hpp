#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include "exactpen/design_matrix.hpp"

namespace exactpen {

/// Seedable generator whose output is identical on every platform.
///
/// The engine is std::mt19937_64 (its output sequence is fixed by the standard);
/// the distribution transforms are written out here because the standard library
/// distributions are implementation-defined.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(splitmix(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Rejection keeps the result unbiased.
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  /// Standard normal via Box-Muller; one draw per call, nothing cached.
  double normal() {
    double u1;
    do {
      u1 = uniform();
    } while (u1 == 0.0);
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double sign() { return (engine_() >> 63) ? 1.0 : -1.0; }

  /// `count` distinct indices from [0, n) in selection order (partial Fisher-Yates).
  std::vector<Index> sample_without_replacement(Index n, Index count) {
    std::vector<Index> pool(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
      pool[static_cast<std::size_t>(i)] = i;
    for (Index i = 0; i < count; ++i) {
      const auto j = i + static_cast<Index>(below(static_cast<std::uint64_t>(n - i)));
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
    }
    pool.resize(static_cast<std::size_t>(count));
    return pool;
  }

  Vector uniform_vector(Index n, double lo, double hi) {
    Vector v(n);
    for (Index i = 0; i < n; ++i)
      v[i] = uniform(lo, hi);
    return v;
  }

  /// Seed mixing so that nearby user seeds give unrelated streams.
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  /// Independent child seed for stream `k` of `seed`.
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t k) {
    return splitmix(seed ^ splitmix(k + 0x632be59bd9b4e019ULL));
  }

private:
  std::mt19937_64 engine_;
};

} // namespace exactpen
