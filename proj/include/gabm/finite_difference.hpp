#pragma once

// Central differences in chart coordinates with one Richardson step.
// Used wherever an x-derivative is taken on top of jets in y.

#include <cmath>

namespace gabm {

struct FdOptions {
  double rel_step = 1e-3;  // h_k = rel_step * (|x_k| + 1), second pass at h_k / 2
};

inline double fd_step(double xk, const FdOptions& o) { return o.rel_step * (std::abs(xk) + 1.0); }

/// Value from two step sizes: (4 D(h/2) - D(h)) / 3, error = |result - D(h/2)|.
struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

inline Estimate richardson(double coarse, double fine) {
  const double v = (4.0 * fine - coarse) / 3.0;
  return {v, std::abs(v - fine)};
}

}  // namespace gabm
