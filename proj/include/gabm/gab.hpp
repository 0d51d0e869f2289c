#pragma once

// General (alpha, beta)-metrics F = alpha phi(b^2, beta/alpha): the metric,
// its spray by the closed formula and by differentiating F^2, Ricci
// curvature along three routes, and the Einstein / projective / Douglas /
// Berwald checks.

#include <array>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gabm/finite_difference.hpp"
#include "gabm/jet.hpp"
#include "gabm/kernels.hpp"
#include "gabm/oneform.hpp"
#include "gabm/phi.hpp"
#include "gabm/riemann.hpp"

namespace gabm {

/// Constants and claims the caller makes about (alpha, beta, phi):
///   aE:   Ric_alpha = (n-1) mu alpha^2, b_{i|j} = c a_ij, c^2 = kappa - mu b^2
///   pde1: phi_22 = 2 (phi_1 - s phi_12)
///   pde2: the Einstein equation for phi with (mu, kappa, K)
struct EinsteinContext {
  double mu = 0.0, kappa = 0.0, K = 0.0;
  bool claims_aE = false, claims_pde1 = false, claims_pde2 = false;
};

class GabMetric {
 public:
  GabMetric(OneFormField beta, PhiSpec phi, EinsteinContext ctx = {});

  const MetricField& alpha() const noexcept { return beta_.metric(); }
  const OneFormField& beta() const noexcept { return beta_; }
  const PhiSpec& phi() const noexcept { return phi_; }
  const EinsteinContext& context() const noexcept { return ctx_; }
  int dim() const noexcept { return beta_.dim(); }

  GabMetric with_phi(PhiSpec phi) const { return GabMetric(beta_, std::move(phi), ctx_); }
  GabMetric with_context(EinsteinContext ctx) const { return GabMetric(beta_, phi_, ctx); }

 private:
  OneFormField beta_;
  PhiSpec phi_;
  EinsteinContext ctx_;
};

double F(const GabMetric& m, std::span<const double> x, std::span<const double> y);
/// F with jets flowing through x and y (same jet space, or constants).
Jet F(const GabMetric& m, std::span<const Jet> x, std::span<const Jet> y);

/// g_ij = 1/2 [F^2]_{y^i y^j}; DomainError (witness: eigenvalues) if not
/// positive definite.
Eigen::MatrixXd fundamental_tensor(const GabMetric& m, std::span<const double> x, std::span<const double> y);

struct QFunctions {
  double Q = 0, R = 0, Theta = 0, Psi = 0, Pi = 0, Omega = 0;
};

QFunctions qfunctions(const PhiSpec& phi, double b2, double s);

struct SprayData {
  Eigen::VectorXd G, baseG, Qvec;  // G = baseG + Qvec
};

/// G^i from the closed formula in beta-derived quantities and QFunctions.
SprayData spray_formula(const GabMetric& m, std::span<const double> x, std::span<const double> y);
/// Same, with y-jets (any order <= 2, shared space).
std::vector<Jet> spray_formula(const GabMetric& m, std::span<const double> x, std::span<const Jet> y);

/// G^i = 1/4 g^il ([F^2]_{x^k y^l} y^k - [F^2]_{x^l}) from jets of F^2.
SprayData spray_direct(const GabMetric& m, std::span<const double> x, std::span<const double> y);
/// Order-2 jets in y (n variables) of the direct spray.
std::vector<Jet> spray_direct_jets(const GabMetric& m, std::span<const double> x, std::span<const double> y);

enum class RicciRoute { direct, change_formula, closed_form };
const char* to_string(RicciRoute r);
RicciRoute ricci_route_from_string(const std::string& s);

/// Ricci curvature with an error estimate.
///  direct:         Ricci formula on spray_direct (x-derivatives by Richardson FD)
///  change_formula: Ric_alpha + 2 Q^i_|i - y^j Q^i_|j.i + 2 Q^j Q^i_.j.i - Q^i_.j Q^j_.i
///                  with Q^i = G^i - alphaG^i from spray_formula
///  closed_form:    (n-1) alpha^2 {mu + (kappa - mu b^2)[psi^2 - (psi_2 + 2 s psi_1)] + mu s psi};
///                  needs the aE and pde1 claims, which are verified at (x, y)
Estimate ricci(const GabMetric& m, std::span<const double> x, std::span<const double> y, RicciRoute route,
               const FdOptions& fd = {});

/// Point-wise verification of the claims used by the closed-form route.
struct ClaimCheck {
  bool aE = false, pde1 = false;
  double conformal_residual = 0, kappa_defect = 0, ricci_alpha_defect = 0, pde1_residual = 0;
  double c = 0;  // conformal factor
};
ClaimCheck verify_claims(const GabMetric& m, std::span<const double> x, std::span<const double> y,
                         const FdOptions& fd = {});

using Samples = std::vector<std::pair<std::vector<double>, std::vector<double>>>;  // (x, y)

/// Sobol samples (x in the alpha box, y in [-1, 1]^n) kept only where
/// beta stays inside the phi domain. Deterministic in seed.
Samples admissible_samples(const GabMetric& m, int count, std::uint64_t seed);

struct EinsteinReport {
  std::vector<double> residual;  // |Ric - (n-1) K F^2| / ((n-1) F^2)
  std::vector<double> error;     // FD error estimate, same normalization
  double max_residual = 0.0;
  std::size_t worst = 0;
};
EinsteinReport einstein_residual(const GabMetric& m, double K, const Samples& samples,
                                 RicciRoute route = RicciRoute::direct, Exec exec = Exec::parallel,
                                 const FdOptions& fd = {});

struct ProjectiveReport {
  bool pass = false;
  double max_defect = 0.0;         // |Q^i y^j - Q^j y^i| / alpha^3
  double max_factor_defect = 0.0;  // |P - c alpha psi| / alpha
  std::size_t witness = 0;
};
/// Needs beta conformal on the samples (InvalidInput otherwise).
ProjectiveReport projective_check(const GabMetric& m, const Samples& samples, double tol = 1e-9,
                                  Exec exec = Exec::parallel);

struct DouglasSlice {
  double b2 = 0;
  std::array<double, 5> coeff{};  // ratio ~ sum coeff_k t^k, t = s / b
  double h1 = 0, h2 = 0;          // h1 + h2 s^2
  double fit_residual = 0;        // max |ratio - fit|
};
struct DouglasReport {
  std::vector<DouglasSlice> slices;
  double max_defect = 0.0;  // max of fit residual and |coeff_1|, |coeff_3|, |coeff_4|
  bool pass = false;
};
/// Fit of (phi_22 - 2(phi_1 - s phi_12)) / (2(phi - s phi_2 + (b^2 - s^2) phi_22))
/// to {1, t, t^2, t^3, t^4} on each b^2 slice.
DouglasReport douglas_check(const PhiSpec& phi, const std::vector<double>& b2_slices, int s_points = 41,
                            double tol = 1e-8);

struct BerwaldReport {
  double max_third = 0.0;  // max |d^3 G^i / dy^j dy^k dy^l| * alpha
  std::size_t witness = 0;
  bool pass = false;
};
BerwaldReport berwald_check(const GabMetric& m, const Samples& samples, double tol = 1e-6,
                            Exec exec = Exec::parallel);

}  // namespace gabm
