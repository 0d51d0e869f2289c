#pragma once

// Deterministic low-discrepancy points (Sobol). The seed skips a prefix of
// the sequence, so different seeds give disjoint, reproducible point sets.

#include <cstdint>
#include <span>
#include <vector>

#include <boost/random/sobol.hpp>

namespace gabm {

class SobolSampler {
 public:
  SobolSampler(int dim, std::uint64_t seed) : dim_(dim), engine_(static_cast<std::size_t>(dim)) {
    if (seed > 0) engine_.seed(seed * static_cast<std::uint64_t>(dim));
  }

  int dim() const noexcept { return dim_; }

  /// Next point, mapped affinely into the box [lo, hi].
  std::vector<double> next(std::span<const double> lo, std::span<const double> hi) {
    std::vector<double> p(dim_);
    for (int i = 0; i < dim_; ++i) {
      const double u = static_cast<double>(engine_() - engine_.min()) /
                       (static_cast<double>(engine_.max() - engine_.min()) + 1.0);
      p[i] = lo[i] + (hi[i] - lo[i]) * u;
    }
    return p;
  }

  /// Next point in the unit cube.
  std::vector<double> next() {
    const std::vector<double> lo(dim_, 0.0), hi(dim_, 1.0);
    return next(lo, hi);
  }

 private:
  int dim_;
  boost::random::sobol engine_;
};

}  // namespace gabm
