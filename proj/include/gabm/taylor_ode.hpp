#pragma once

// Taylor-series integrator for the linear ODE
//   (1 + (k1 + k3) x^2 + k2 x^4) y'' = (k1 + k2 x^2) (y - x y')
// that the one-variable profile of projectively flat (alpha, beta)-metrics
// satisfies. The coefficients follow from a three-term-style recurrence, so
// each step is exact up to truncation of a convergent series.

#include <string>
#include <vector>

#include "gabm/jet.hpp"
#include "gabm/phi.hpp"

namespace gabm {

struct FtSegment {
  double s0 = 0;                // expansion point
  double lo = 0, hi = 0;        // covered interval
  std::vector<double> c;        // y = sum c_m (x - s0)^m
};

class FtSolution {
 public:
  FtSolution(double k1, double k2, double k3, std::vector<FtSegment> segments);

  double lo() const noexcept { return lo_; }
  double hi() const noexcept { return hi_; }
  const std::vector<FtSegment>& segments() const noexcept { return segs_; }

  double value(double x) const;
  /// y^(k)(x) / k! for k = 0..n
  std::vector<double> taylor(double x, int n) const;
  Jet operator()(const Jet& x) const;
  /// P y'' - M (y - x y') from the local polynomial.
  double residual(double x) const;

  PhiBar as_phibar(std::string label = "ode") const;

 private:
  const FtSegment& find(double x) const;
  double k1_, k2_, k3_;
  std::vector<FtSegment> segs_;
  double lo_, hi_;
};

/// Solve with y(0) = phi0, y'(0) = dphi0 on [s_lo, s_hi] (s_lo <= 0 <= s_hi).
/// DomainError if the leading coefficient vanishes in the range.
FtSolution ode_ft_solve(double k1, double k2, double k3, double phi0, double dphi0, double s_lo = -1.0,
                        double s_hi = 1.0, int order = 30);

}  // namespace gabm
