#pragma once

// Residuals of the PDE systems for phi, in (b^2, s) and in (u, v) = (b^2 - s^2, s).
// Residuals are raw (not normalized).

#include <functional>

#include "gabm/jet.hpp"
#include "gabm/phi.hpp"

namespace gabm {

/// psi = (phi_2 + 2 s phi_1) / (2 phi) and its first partials.
struct PsiValue {
  double psi = 0, psi1 = 0, psi2 = 0;
};

/// phi_22 - 2 (phi_1 - s phi_12)
double pde1_residual(const PhiSpec& phi, double b2, double s);

PsiValue psi_jet(const PhiSpec& phi, double b2, double s);

/// (kappa - mu b^2) [psi^2 - (psi_2 + 2 s psi_1)] + mu s psi + mu - K phi^2
double pde2_residual(const PhiSpec& phi, double mu, double kappa, double K, double b2, double s);

/// pde2 with mu = 0.
double pde2_normalized_residual(const PhiSpec& phi, double kappa_bar, double K, double b2, double s);

struct UvResiduals {
  double pde5 = 0;   // kappa w_vv - K w^-3,  w = phi^(-1/2)
  double eqn02 = 0;  // phi_vv - 2 v phi_uv - 4 phi_u
};

using UvEval = std::function<Jet(const Jet& u, const Jet& v)>;

// With Phi(u, v) = phi(u + v^2, v):
//   eqn02(Phi)(u, v) = pde1(phi)(b^2, s)           (same sign, factor 1)
//   pde2_normalized(phi) = sqrt(phi) * pde5(Phi)   (exact, no use of pde1)
UvResiduals uv_residuals(const UvEval& phi, double kappa, double K, double u, double v);
/// phi reparameterized through b^2 = u + v^2, s = v (domain-checked).
UvResiduals uv_residuals(const PhiSpec& phi, double kappa, double K, double u, double v);

}  // namespace gabm
