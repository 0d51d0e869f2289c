#include "gabm/pde.hpp"

#include <array>
#include <cmath>

#include "gabm/errors.hpp"

namespace gabm {

double pde1_residual(const PhiSpec& phi, double b2, double s) {
  const PhiJet j = phi.jet(b2, s);
  return j.phi22 - 2.0 * (j.phi1 - s * j.phi12);
}

PsiValue psi_jet(const PhiSpec& phi, double b2, double s) {
  const std::array<double, 2> at{b2, s};
  const std::array<int, 2> act{0, 1};
  const auto v = seed(at, act, 1);
  const PhiPartials p = phi.partials(v[0], v[1]);
  if (!(p.phi.value() > 0.0)) throw DomainError("psi: phi is not positive", {b2, s, p.phi.value()});
  const Jet psi = (p.phi2 + 2.0 * v[1] * p.phi1) / (2.0 * p.phi);
  const auto c = psi.coefficients();
  return {c[0], c[1], c[2]};
}

double pde2_residual(const PhiSpec& phi, double mu, double kappa, double K, double b2, double s) {
  const double d = kappa - mu * b2;
  if (!(d > 0.0)) throw DomainError("pde2: kappa - mu b^2 must be positive", {b2, s, d});
  const PsiValue p = psi_jet(phi, b2, s);
  const double f = phi(b2, s);
  return d * (p.psi * p.psi - (p.psi2 + 2.0 * s * p.psi1)) + mu * s * p.psi + mu - K * f * f;
}

double pde2_normalized_residual(const PhiSpec& phi, double kappa_bar, double K, double b2, double s) {
  return pde2_residual(phi, 0.0, kappa_bar, K, b2, s);
}

UvResiduals uv_residuals(const UvEval& phi, double kappa, double K, double u, double v) {
  const std::array<double, 2> at{u, v};
  const std::array<int, 2> act{0, 1};
  const auto x = seed(at, act, 2);
  const Jet f = phi(x[0], x[1]);
  if (!(f.value() > 0.0)) throw DomainError("uv residuals: phi is not positive", {u, v, f.value()});
  const Jet w = pow(f, -0.5);
  const std::array<int, 2> du{1, 0}, duv{1, 1}, dvv{0, 2};
  UvResiduals r;
  r.eqn02 = extract(f, dvv) - 2.0 * v * extract(f, duv) - 4.0 * extract(f, du);
  r.pde5 = kappa * extract(w, dvv) - K / std::pow(w.value(), 3);
  return r;
}

UvResiduals uv_residuals(const PhiSpec& phi, double kappa, double K, double u, double v) {
  return uv_residuals([&phi](const Jet& uu, const Jet& vv) { return phi(uu + vv * vv, vv); }, kappa, K, u, v);
}

}  // namespace gabm
