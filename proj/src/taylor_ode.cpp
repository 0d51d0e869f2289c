#include "gabm/taylor_ode.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <limits>

#include "gabm/errors.hpp"

namespace gabm {

namespace {

// Taylor coefficients of P(x) = 1 + a x^2 + k2 x^4 and M(x) = k1 + k2 x^2 at x0.
std::array<double, 5> p_coeffs(double a, double k2, double x0) {
  const double x2 = x0 * x0;
  return {1.0 + a * x2 + k2 * x2 * x2, 2.0 * a * x0 + 4.0 * k2 * x2 * x0, a + 6.0 * k2 * x2, 4.0 * k2 * x0, k2};
}

std::array<double, 3> m_coeffs(double k1, double k2, double x0) { return {k1 + k2 * x0 * x0, 2.0 * k2 * x0, k2}; }

// Roots of P in the complex plane.
std::vector<std::complex<double>> p_roots(double a, double k2) {
  std::vector<std::complex<double>> r2;  // roots in x^2
  if (k2 == 0.0) {
    if (a != 0.0) r2.emplace_back(-1.0 / a);
  } else {
    const std::complex<double> disc = std::sqrt(std::complex<double>(a * a - 4.0 * k2));
    r2.push_back((-a + disc) / (2.0 * k2));
    r2.push_back((-a - disc) / (2.0 * k2));
  }
  std::vector<std::complex<double>> out;
  for (auto z : r2) {
    const auto w = std::sqrt(z);
    out.push_back(w);
    out.push_back(-w);
  }
  return out;
}

std::vector<double> series(double k1, double k2, double k3, double x0, double y0, double dy0, int order) {
  const auto P = p_coeffs(k1 + k3, k2, x0);
  const auto M = m_coeffs(k1, k2, x0);
  std::vector<double> c(order + 1, 0.0);
  c[0] = y0;
  if (order >= 1) c[1] = dy0;
  auto w = [&](int m) { return m < 0 ? 0.0 : (1.0 - m) * c[m] - x0 * (m + 1) * c[m + 1]; };
  for (int m = 0; m + 2 <= order; ++m) {
    double rhs = 0.0;
    for (int j = 0; j <= 2 && j <= m; ++j) rhs += M[j] * w(m - j);
    for (int j = 1; j <= 4 && j <= m; ++j) {
      const int k = m - j + 2;
      rhs -= P[j] * k * (k - 1) * c[k];
    }
    c[m + 2] = rhs / (P[0] * (m + 2) * (m + 1));
  }
  return c;
}

}  // namespace

FtSolution::FtSolution(double k1, double k2, double k3, std::vector<FtSegment> segments)
    : k1_(k1), k2_(k2), k3_(k3), segs_(std::move(segments)) {
  if (segs_.empty()) throw InvalidInput("ode: no segments");
  std::sort(segs_.begin(), segs_.end(), [](const FtSegment& a, const FtSegment& b) { return a.lo < b.lo; });
  lo_ = segs_.front().lo;
  hi_ = segs_.back().hi;
}

const FtSegment& FtSolution::find(double x) const {
  const double tol = 1e-12 * std::max(1.0, hi_ - lo_);
  if (!(x >= lo_ - tol && x <= hi_ + tol)) throw DomainError("ode solution evaluated outside its range", {x});
  auto it = std::upper_bound(segs_.begin(), segs_.end(), x, [](double v, const FtSegment& s) { return v < s.lo; });
  if (it == segs_.begin()) return segs_.front();
  return *std::prev(it);
}

std::vector<double> FtSolution::taylor(double x, int n) const {
  const FtSegment& s = find(x);
  const double t = x - s.s0;
  const int N = static_cast<int>(s.c.size()) - 1;
  std::vector<double> out(n + 1, 0.0);
  for (int k = 0; k <= n && k <= N; ++k) {
    // sum_m binom(m, k) c_m t^(m-k), Horner in t
    double acc = 0.0;
    for (int m = N; m >= k; --m) {
      double binom = 1.0;
      for (int i = 0; i < k; ++i) binom = binom * (m - i) / (i + 1);
      acc = acc * t + binom * s.c[m];
    }
    out[k] = acc;
  }
  return out;
}

double FtSolution::value(double x) const { return taylor(x, 0)[0]; }

Jet FtSolution::operator()(const Jet& x) const {
  const auto tc = taylor(x.value(), kMaxJetOrder + 1);
  if (x.is_constant()) return Jet(tc[0]);
  return compose(x, tc);
}

double FtSolution::residual(double x) const {
  const auto tc = taylor(x, 2);
  const double x2 = x * x;
  const double P = 1.0 + (k1_ + k3_) * x2 + k2_ * x2 * x2;
  const double M = k1_ + k2_ * x2;
  return P * 2.0 * tc[2] - M * (tc[0] - x * tc[1]);
}

PhiBar FtSolution::as_phibar(std::string label) const {
  auto self = std::make_shared<FtSolution>(*this);
  return PhiBar{std::move(label), [self](const Jet& x) { return (*self)(x); }, lo_, hi_};
}

FtSolution ode_ft_solve(double k1, double k2, double k3, double phi0, double dphi0, double s_lo, double s_hi,
                        int order) {
  if (!(s_lo <= 0.0 && 0.0 <= s_hi)) throw InvalidInput("ode: range must contain 0");
  if (order < 4 || order > 200) throw InvalidInput("ode: order must be in [4, 200]");
  const double a = k1 + k3;
  const auto roots = p_roots(a, k2);
  for (auto z : roots)
    if (std::abs(z.imag()) <= 1e-14 * std::max(1.0, std::abs(z.real())) && z.real() >= s_lo && z.real() <= s_hi)
      throw DomainError("ode: leading coefficient vanishes inside the range", {z.real()});

  auto dist = [&](double x) {
    double d = std::numeric_limits<double>::infinity();
    for (auto z : roots) d = std::min(d, std::abs(z - x));
    return d;
  };

  constexpr int kMaxSteps = 100000;
  std::vector<FtSegment> segs;
  for (int dir : {1, -1}) {
    const double end = dir > 0 ? s_hi : s_lo;
    double x = 0.0, y = phi0, dy = dphi0;
    int steps = 0;
    while (dir * (end - x) > 0.0) {
      if (++steps > kMaxSteps) throw DomainError("ode: step size collapsed", {x});
      const double h = std::min({0.5, 0.25 * dist(x), dir * (end - x)});
      auto c = series(k1, k2, k3, x, y, dy, order);
      const double t = dir * h;
      double v = 0.0, dv = 0.0;
      for (int m = order; m >= 0; --m) v = v * t + c[m];
      for (int m = order; m >= 1; --m) dv = dv * t + m * c[m];
      const double xn = (dir * (end - x) <= h) ? end : x + t;
      segs.push_back({x, std::min(x, xn), std::max(x, xn), std::move(c)});
      x = xn;
      y = v;
      dy = dv;
    }
  }
  if (segs.empty()) segs.push_back({0.0, 0.0, 0.0, series(k1, k2, k3, 0.0, phi0, dphi0, order)});
  return FtSolution(k1, k2, k3, std::move(segs));
}

}  // namespace gabm
