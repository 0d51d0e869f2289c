#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "gabm/errors.hpp"
#include "gabm/phi.hpp"

namespace gabm {

namespace {

// Smallest positive root of 1 + a u + k2 u^2, or +inf.
double l_root(double a, double k2) {
  double r = std::numeric_limits<double>::infinity();
  if (k2 == 0.0) {
    if (a < 0.0) r = -1.0 / a;
    return r;
  }
  const double disc = a * a - 4.0 * k2;
  if (disc < 0.0) return r;
  const double sq = std::sqrt(disc);
  // stable pair of roots
  const double q = -0.5 * (a + std::copysign(sq, a == 0.0 ? 1.0 : a));
  for (double u : {q / k2, q != 0.0 ? 1.0 / q : std::numeric_limits<double>::quiet_NaN()})
    if (u > 0.0) r = std::min(r, u);
  return r;
}

}  // namespace

Jet projflat_eta(double k1, double k2, double k3, const Jet& u) {
  const double a = k1 + k3;
  if (k2 == 0.0) {
    if (a == 0.0) return exp(-0.5 * k3 * u);
    return pow(1.0 + a * u, -k3 / (2.0 * a));
  }
  auto L = [=](double t) { return 1.0 + a * t + k2 * t * t; };
  auto g = [=](double t) { return (k3 + k2 * t) / (2.0 * L(t)); };
  const double u0 = u.value();
  const double integral = u0 == 0.0 ? 0.0 : boost::math::quadrature::gauss_kronrod<double, 15>::integrate(g, 0.0, u0);
  if (u.is_constant()) return Jet(std::exp(-integral));
  // ln eta = -int g, so its Taylor coefficients are -g_k / (k + 1).
  const auto space = JetSpace::get(1, kMaxJetOrder);
  const Jet t = Jet::variable(space, 0, u0);
  const Jet gj = (k3 + k2 * t) / (2.0 * (1.0 + a * t + k2 * t * t));
  const auto gc = gj.coefficients();
  std::vector<double> lc(kMaxJetOrder + 2, 0.0);
  lc[0] = -integral;
  for (int k = 0; k <= kMaxJetOrder; ++k) lc[k + 1] = -gc[k] / (k + 1);
  return exp(compose(u, lc));
}

PhiSpec projflat_phi(double k1, double k2, double k3, const PhiBar& phibar, double eta0, double b2_cap) {
  if (!(eta0 > 0)) throw InvalidInput("projflat phi: eta0 must be positive");
  const double a = k1 + k3;
  double b2_hi = std::min(l_root(a, k2) - kDomainMargin, b2_cap);
  const double range = std::min(-phibar.lo, phibar.hi);
  b2_hi = std::min(b2_hi, range * range);
  if (!(b2_hi > 0.0)) throw InvalidInput("projflat phi: empty b^2 range");

  // phibar must solve L(sbar^2) phibar'' = (k1 + k2 sbar^2)(phibar - sbar phibar')
  const double smax = std::sqrt(b2_hi);
  const auto sp = JetSpace::get(1, 2);
  for (int i = 0; i < 21; ++i) {
    const double x = smax * (-1.0 + 2.0 * i / 20.0);
    const Jet f = phibar(Jet::variable(sp, 0, x));
    const auto c = f.coefficients();
    const double x2 = x * x;
    const double lhs = (1.0 + a * x2 + k2 * x2 * x2) * 2.0 * c[2];
    const double rhs = (k1 + k2 * x2) * (c[0] - x * c[1]);
    const double scale = std::max({1.0, std::abs(lhs), std::abs(rhs)});
    if (std::abs(lhs - rhs) > 1e-8 * scale) {
      std::ostringstream os;
      os.precision(17);
      os << "projflat phi: phibar '" << phibar.label << "' does not solve the profile ODE at sbar = " << x
         << " (residual " << lhs - rhs << ")";
      throw InvalidInput(os.str());
    }
  }

  auto eval = [=](const Jet& b2, const Jet& s) {
    const Jet L = 1.0 + a * b2 + k2 * b2 * b2;
    const Jet rho = sqrt(1.0 - (a + k2 * b2) * s * s / L);
    const Jet nu = s / sqrt(L);
    return eta0 * projflat_eta(k1, k2, k3, b2) * rho * phibar(nu / rho);
  };
  const PhiDomain d = discover_domain(eval, {0.0, b2_hi});
  std::ostringstream f;
  f << "phi = eta(b2) rho phibar(nu/rho), L = 1 + (k1+k3) b2 + k2 b2^2, phibar = " << phibar.label;
  return PhiSpec("projflat", {{"k1", k1}, {"k2", k2}, {"k3", k3}, {"eta0", eta0}}, eval, d, f.str(), false);
}

}  // namespace gabm
