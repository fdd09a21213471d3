#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ttlsim {

// mt19937_64 plus hand-rolled samplers so that streams are reproducible
// across standard libraries (std::*_distribution is implementation-defined).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [0, 1).
  double uniform() {
    return (engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  double exponential(double rate) {
    return -std::log1p(-uniform()) / rate;
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)) % n;
  }

 private:
  std::mt19937_64 engine_;
};

// Sampling from a fixed discrete distribution by inverse CDF with binary
// search. Probabilities need not be normalized.
class DiscreteSampler {
 public:
  explicit DiscreteSampler(const std::vector<double>& weights) {
    cumulative_.reserve(weights.size());
    double acc = 0;
    for (double w : weights) {
      acc += w;
      cumulative_.push_back(acc);
    }
    total_ = acc;
  }

  std::size_t sample(Rng& rng) const {
    double u = rng.uniform() * total_;
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

  double total() const { return total_; }

 private:
  std::vector<double> cumulative_;
  double total_ = 0;
};

}  // namespace ttlsim
