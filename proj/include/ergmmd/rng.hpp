#pragma once
// Deterministic random draws. The engine is std::mt19937_64 (fully specified
// by the standard); the mappings to doubles/ints are written out here because
// std::uniform_real_distribution and friends are implementation-defined and
// would break bit-reproducibility across standard libraries.

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <vector>

namespace ergmmd {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform in [0, 1) with 53-bit resolution.
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Standard normal via Box-Muller; consumes exactly two draws per call.
  double normal() {
    double u1 = 1.0 - uniform01();  // (0, 1]
    double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  /// Uniform integer in [0, n).
  std::size_t index(std::size_t n) {
    return static_cast<std::size_t>(uniform01() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

/// Cumulative table for sampling indices proportionally to nonnegative
/// weights. At least one weight must be positive.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& weights) {
    cumulative_.reserve(weights.size());
    double total = 0.0;
    for (double w : weights) {
      if (!(w >= 0.0)) throw std::invalid_argument("discrete sampler: negative or NaN weight");
      total += w;
      cumulative_.push_back(total);
    }
    if (cumulative_.empty() || total <= 0.0)
      throw std::invalid_argument("discrete sampler: no positive weight");
    total_ = total;
  }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform01() * total_;
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (cumulative_[mid] <= u)
        lo = mid + 1;
      else
        hi = mid;
    }
    return lo;
  }

 private:
  std::vector<double> cumulative_;
  double total_ = 0.0;
};

/// Van der Corput radical inverse; halton(i, 2), halton(i, 3), ... give a
/// low-discrepancy sequence on [0, 1).
inline double halton(std::uint64_t idx, unsigned base) {
  double f = 1.0, r = 0.0;
  for (std::uint64_t i = idx + 1; i > 0; i /= base) {
    f /= static_cast<double>(base);
    r += f * static_cast<double>(i % base);
  }
  return r;
}

}  // namespace ergmmd
