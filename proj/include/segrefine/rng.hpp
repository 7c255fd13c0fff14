#ifndef SEGREFINE_RNG_HPP
#define SEGREFINE_RNG_HPP

#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

namespace segrefine {

// std::mt19937_64 output is fully specified by the standard; the
// distributions are not. These helpers keep every stochastic step
// reproducible across standard library implementations.
using Rng = std::mt19937_64;

/// Uniform in [0, 1) with 53 random bits.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

/// Uniform integer in [0, n). Rejection sampling, no modulo bias.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = rng();
  } while (v >= limit);
  return v % n;
}

inline bool bernoulli(Rng& rng, double p) { return uniform01(rng) < p; }

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[uniform_index(rng, i)]);
  }
}

/// Index drawn from unnormalized non-negative weights via a cumulative table.
class Categorical {
 public:
  Categorical() = default;
  explicit Categorical(std::span<const double> weights) {
    double acc = 0.0;
    cumulative_.reserve(weights.size());
    for (double w : weights) {
      acc += w;
      cumulative_.push_back(acc);
    }
  }

  std::size_t operator()(Rng& rng) const {
    const double u = uniform01(rng) * cumulative_.back();
    std::size_t lo = 0, hi = cumulative_.size() - 1;
    while (lo < hi) {
      std::size_t mid = (lo + hi) / 2;
      if (u < cumulative_[mid]) hi = mid; else lo = mid + 1;
    }
    return lo;
  }

  std::size_t size() const { return cumulative_.size(); }

 private:
  std::vector<double> cumulative_;
};

}  // namespace segrefine

#endif  // SEGREFINE_RNG_HPP
