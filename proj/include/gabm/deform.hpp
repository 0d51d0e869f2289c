#pragma once

// Deformations of the pair (alpha, beta) and of phi that leave
// F = alpha phi(b^2, beta/alpha) unchanged.
//
// deform_mu:    abar^2 = |mu|/D (alpha^2 + mu/D beta^2), betabar = |mu|^{3/2} / D^{3/2} beta,
//               D = kappa - mu b^2; then Ric(abar) = 0 and bbar_{i|j} = cbar abar_ij, cbar^2 = |mu|,
//               and D (1/kappa + bbar^2/mu) = 1.
// deform_kzero: abar = alpha / b, betabar = beta / b^2 (kappa = 0); then bbar = 1 and betabar is parallel.
// deform_phi:   the matching substitution for phi (forward: phi -> phibar, inverse: phibar -> phi).

#include <string>
#include <vector>

#include "gabm/oneform.hpp"
#include "gabm/phi.hpp"
#include "gabm/riemann.hpp"

namespace gabm {

enum class DeformKind { mu, kzero };

struct DeformedPair {
  OneFormField beta_bar;  // carries abar as its metric
  OneFormField source;    // the original (alpha, beta)
  double c_bar = 0.0;     // measured conformal factor of betabar (mean over the check samples)
  double mu = 0.0, kappa = 0.0;
  DeformKind kind = DeformKind::mu;

  const MetricField& alpha_bar() const noexcept { return beta_bar.metric(); }
  /// bbar^2 at x
  double b2_bar(std::span<const double> x) const { return beta_bar.norm2(x); }
};

struct DeformOptions {
  int check_points = 16;
  std::uint64_t seed = 1;
  double tol = 1e-8;
};

/// Needs mu != 0, kappa > 0, beta conformal with c^2 + mu b^2 = kappa on the
/// check samples. InvalidInput otherwise (kappa < 0 gives an indefinite abar
/// and is refused).
DeformedPair deform_mu(const OneFormField& beta, double mu, double kappa, const DeformOptions& opt = {});

/// (alpha, beta) rebuilt from the barred pair using barred quantities only.
OneFormField deform_mu_inverse(const DeformedPair& pair);

/// Needs mu < 0 and c^2 = -mu b^2 on the check samples.
DeformedPair deform_kzero(const OneFormField& beta, double mu, const DeformOptions& opt = {});

enum class DeformDirection { forward, inverse };

/// forward: phi solving pde1 + pde2 with (mu, kappa, K) -> phibar solving the
/// normalized system with kappa_bar = |mu|. inverse: the converse. Inputs are
/// spot-checked by residual.
PhiSpec deform_phi(const PhiSpec& phi, double mu, double kappa, double K, DeformDirection dir);

/// Map of the b^2 range under the pair deformation (forward: b^2 -> bbar^2).
double deform_b2(double b2, double mu, double kappa, DeformDirection dir);

}  // namespace gabm
