#pragma once

// The 1-form beta = b_i y^i on a Riemannian chart, its covariant
// derivative and the usual contractions r_ij, s_ij, r_0, s_0, ...

#include <functional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gabm/finite_difference.hpp"
#include "gabm/jet.hpp"
#include "gabm/riemann.hpp"

namespace gabm {

class OneFormField {
 public:
  using Eval = std::function<std::vector<Jet>(std::span<const Jet>)>;

  OneFormField(MetricField metric, Eval eval, std::string label = "explicit");

  const MetricField& metric() const noexcept { return metric_; }
  int dim() const noexcept { return metric_.dim(); }
  const std::string& label() const noexcept { return label_; }

  std::vector<Jet> eval(std::span<const Jet> x) const;
  Eigen::VectorXd eval(std::span<const double> x) const;

  /// b^2 = a^ij b_i b_j
  double norm2(std::span<const double> x) const;
  Jet norm2(std::span<const Jet> x) const;

 private:
  MetricField metric_;
  Eval eval_;
  std::string label_;
};

/// b_i = c x^i (a gradient field; conformal on the Euclidean chart).
OneFormField radial_form(const MetricField& g, double c);
OneFormField constant_form(const MetricField& g, std::vector<double> b);
/// h(t) dt on a warped backend.
OneFormField warped_form(const MetricField& g);

/// b_{i|j} = d_j b_i - Gamma^k_ij b_k
Eigen::MatrixXd covariant_derivative(const OneFormField& beta, std::span<const double> x);

/// Everything that depends on x only.
struct BetaTensors {
  Eigen::MatrixXd a, a_inv;
  Eigen::VectorXd b, b_up;  // b_i, b^i
  double b2 = 0.0;
  Eigen::MatrixXd bij;    // b_{i|j}
  Eigen::MatrixXd r, s;   // r_ij, s_ij
  Eigen::MatrixXd s_up;   // s^i_j = a^ih s_hj
  Eigen::VectorXd r_i, s_i;   // r_j = b^i r_ij, s_j = b^i s_ij
  Eigen::VectorXd r_up, s_up_i;  // r^i, s^i
  double r_bb = 0.0;      // r = r_ij b^i b^j
};

BetaTensors beta_tensors(const OneFormField& beta, std::span<const double> x);

/// Contractions with a direction y.
struct BetaDerived : BetaTensors {
  double alpha = 0.0, beta = 0.0;
  double r00 = 0.0, r0 = 0.0, s0 = 0.0;
  Eigen::VectorXd s_up0;  // s^i_0
};

BetaDerived beta_quantities(const OneFormField& beta, std::span<const double> x, std::span<const double> y);

/// |E|_a = sqrt(a^ik a^jl E_ij E_kl)
double metric_norm(const Eigen::MatrixXd& e, const Eigen::MatrixXd& a_inv);

struct ConformalReport {
  std::vector<double> c;         // trace(a^ij b_{i|j}) / n
  std::vector<double> residual;  // |b_{i|j} - c a_ij|_a
  double max_residual = 0.0;
  bool pass = false;
};

ConformalReport conformal_check(const OneFormField& beta, const std::vector<std::vector<double>>& xs,
                                double tol = 1e-8);

struct KappaReport {
  std::vector<double> kappa;  // c^2 + mu b^2
  double mean = 0.0;
  double spread = 0.0;
  bool pass = false;
};

/// Requires conformal_check to pass on the same samples (InvalidInput otherwise).
KappaReport kappa_check(const OneFormField& beta, double mu, const std::vector<std::vector<double>>& xs,
                        double tol = 1e-10, double conformal_tol = 1e-8);

struct DirectionalCheck {
  double derivative = 0.0;  // c_{|0}, central differences along y
  double expected = 0.0;    // -mu beta(y)
  double defect = 0.0;
};

/// Conformal factor differentiated along y versus -mu beta(y).
DirectionalCheck c_direction_check(const OneFormField& beta, double mu, std::span<const double> x,
                                   std::span<const double> y, const FdOptions& fd = {});

}  // namespace gabm
