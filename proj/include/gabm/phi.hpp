#pragma once

// Defining functions phi(b^2, s) of general (alpha, beta)-metrics
// F = alpha * phi(b^2, beta / alpha).
//
// A PhiSpec wraps a jet-evaluable closure, so every family gets exact
// partial derivatives for free: phi_1 = d/d(b^2), phi_2 = d/ds.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gabm/jet.hpp"

namespace gabm {

/// b^2 in [b2_lo, b2_hi] and |s| <= b.
struct PhiDomain {
  double b2_lo = 0.0;
  double b2_hi = 1.0;
};

inline constexpr double kDomainMargin = 1e-6;

struct PhiJet {
  double phi = 0, phi1 = 0, phi2 = 0, phi11 = 0, phi12 = 0, phi22 = 0;
};

/// The six partials as jets over the variables of the arguments.
struct PhiPartials {
  Jet phi, phi1, phi2, phi11, phi12, phi22;
};

class PhiSpec {
 public:
  using Eval = std::function<Jet(const Jet& b2, const Jet& s)>;
  using Params = std::map<std::string, double>;

  PhiSpec(std::string family, Params params, Eval eval, PhiDomain domain, std::string formula = {},
          bool claims_regular = false);

  const std::string& family() const noexcept { return family_; }
  const Params& params() const noexcept { return params_; }
  const PhiDomain& domain() const noexcept { return domain_; }
  const std::string& formula() const noexcept { return formula_; }
  bool claims_regular() const noexcept { return claims_regular_; }

  bool in_domain(double b2, double s) const;

  /// Domain-checked evaluation (DomainError carries (b^2, s)).
  Jet operator()(const Jet& b2, const Jet& s) const;
  double operator()(double b2, double s) const;

  PhiJet jet(double b2, double s) const;

  /// Partials up to second order as jets of order p = min order of the
  /// arguments (p <= 2). Works by adding two perturbation variables.
  PhiPartials partials(const Jet& b2, const Jet& s) const;

  PhiSpec with_domain(PhiDomain d) const;
  /// Same function under another family tag.
  PhiSpec renamed(std::string family, std::string formula) const;
  const Eval& closure() const noexcept { return eval_; }

 private:
  std::string family_;
  Params params_;
  Eval eval_;
  PhiDomain domain_;
  std::string formula_;
  bool claims_regular_;
};

/// Largest b2_hi' <= domain.b2_hi such that phi is finite and positive on
/// a probe grid of [b2_lo, b2_hi'] x {|s| <= b}. InvalidInput if none.
PhiDomain discover_domain(const PhiSpec::Eval& eval, PhiDomain rect);

// ---------------------------------------------------------------- families

PhiSpec riemannian_phi(double value = 1.0);
PhiSpec randers_phi();
PhiSpec square_phi();
/// An arbitrary closure, e.g. for counterexamples.
PhiSpec custom_phi(std::string name, PhiSpec::Eval eval, PhiDomain domain, std::string formula = {});
/// phi + eps * s^3
PhiSpec perturbed_phi(const PhiSpec& phi, double eps);

/// One-variable function phibar(sbar), jet-evaluable on [lo, hi].
struct PhiBar {
  std::string label;
  std::function<Jet(const Jet&)> eval;
  double lo = -1e300, hi = 1e300;

  Jet operator()(const Jet& s) const;
  double operator()(double s) const;
};

/// sum_k c_k sbar^k
PhiBar phibar_polynomial(std::vector<double> coeffs);

/// phi = eta(b^2) rho phibar(nu / rho) with
///   L(u) = 1 + (k1 + k3) u + k2 u^2,  rho = sqrt(1 - (k1 + k3 + k2 b^2) s^2 / L(b^2)),
///   nu = s / sqrt(L(b^2)),  eta' + (k3 + k2 u) / (2 L) eta = 0, eta(0) = eta0.
/// phibar must solve L(sbar^2) phibar'' = (k1 + k2 sbar^2)(phibar - sbar phibar');
/// this is spot-checked. b2_cap bounds the domain when L has no positive root.
PhiSpec projflat_phi(double k1, double k2, double k3, const PhiBar& phibar, double eta0 = 1.0, double b2_cap = 1.0);

/// eta of the projflat family with its Taylor expansion (jet argument).
Jet projflat_eta(double k1, double k2, double k3, const Jet& u);

/// phi = phibar(s / b) / b
PhiSpec berwald_phi(const PhiBar& phibar, double b2_lo = 1e-2, double b2_hi = 4.0);

enum class SolutionBranch { sol03, qform, i, ii, iii, iv };

const char* to_string(SolutionBranch b);
SolutionBranch solution_branch_from_string(const std::string& s);

/// Which root of D^2 r^2 + (u - C) r - sigma = 0 (r = q^2) to use.
enum class QRoot { automatic, small, large };

struct SolutionOptions {
  /// Explicit sign choices (+1/-1); empty = first combination with
  /// phi > 0 at (domain midpoint, 0).
  std::vector<int> signs;
  QRoot root = QRoot::automatic;
  double b2_cap = 1.0;  // used when the radicands do not bound b^2
};

/// Non-constant solutions of the normalized system with sigma = K / kappa.
PhiSpec solution_family(double sigma, double C, double D, SolutionBranch branch, const SolutionOptions& opt = {});

/// q(u) of the q-form family: D^2 q^4 + (u - C) q^2 - sigma = 0.
Jet qform_q(double sigma, double C, double D, const Jet& u, QRoot root, int sign);

// ----------------------------------------------------------- regularity

struct PhiGrid {
  std::vector<std::pair<double, double>> nodes;  // (b^2, s)
};

/// nb x ns tensor grid: b^2 evenly in [b2_lo, b2_hi], s evenly in
/// [-s_frac b, s_frac b].
PhiGrid tensor_grid(const PhiDomain& d, int nb, int ns, double s_frac = 1.0 - kDomainMargin);
/// count Sobol points in the same region.
PhiGrid interior_points(const PhiDomain& d, int count, std::uint64_t seed, double s_frac = 1.0 - kDomainMargin);
PhiGrid merge(PhiGrid a, const PhiGrid& b);

/// The part of a domain used for verification grids: the upper end of the
/// b^2 range is pulled in by (1 - frac) of its width, away from boundaries
/// where phi or its derivatives blow up.
PhiDomain safe_domain(const PhiDomain& d, double frac = 0.95);

struct RegularityReport {
  bool pass = true;
  double b2 = 0, s = 0;  // witness (first violation, or the minimum)
  double v1 = 0, v2 = 0; // phi - s phi2, phi - s phi2 + (b^2 - s^2) phi22 at the witness
  double min_v1 = 0, min_v2 = 0;
};

RegularityReport regularity_check(const PhiSpec& phi, const PhiGrid& grid);

}  // namespace gabm
