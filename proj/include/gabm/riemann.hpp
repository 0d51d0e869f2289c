#pragma once

// Riemannian backends in a single chart, their Levi-Civita data and the
// Ricci curvature of a spray.

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gabm/finite_difference.hpp"
#include "gabm/jet.hpp"
#include "gabm/jet_linalg.hpp"

namespace gabm {

enum class Backend { explicit_metric, euclidean, space_form, warped };

const char* to_string(Backend b);

/// h'' + mu h = 0 with h(0) = h0, h'(0) = dh0, restricted to the component
/// of {h > 0} described by (t_lo, t_hi).
struct WarpParams {
  double mu = 0.0;
  double h0 = 1.0;
  double dh0 = 0.0;
  double kappa = 0.0;  // h'^2 + mu h^2
  double t_lo = 0.0;
  double t_hi = 0.0;

  double h(double t) const;
  double dh(double t) const;
  Jet h(const Jet& t) const;
};

/// Solve for the open t-interval where h > 0 and fill kappa.
WarpParams make_warp_params(double mu, double h0, double dh0);

class MetricField;

/// Backend tag and the parameters that go with it.
struct BackendInfo {
  Backend kind = Backend::explicit_metric;
  std::string label = "explicit";
  double curvature = 0.0;  // space forms
  std::optional<WarpParams> warp;
  std::shared_ptr<const MetricField> hat;
};

class MetricField {
 public:
  using Eval = std::function<JetMatrix(std::span<const Jet>)>;
  using Inside = std::function<bool(std::span<const double>)>;

  /// `inside` restricts the chart (empty = whole R^n); lo/hi is the box
  /// random points are drawn from.
  MetricField(int dim, Eval eval, Inside inside, std::vector<double> lo, std::vector<double> hi,
              BackendInfo info = {});

  int dim() const noexcept { return dim_; }
  Backend backend() const noexcept { return info_.kind; }
  const std::string& label() const noexcept { return info_.label; }
  const std::vector<double>& box_lo() const noexcept { return lo_; }
  const std::vector<double>& box_hi() const noexcept { return hi_; }

  bool contains(std::span<const double> x) const;

  /// a_ij at jet-valued x. Throws DomainError outside the chart or when
  /// the base value is not positive definite.
  JetMatrix eval(std::span<const Jet> x) const;
  Eigen::MatrixXd eval(std::span<const double> x) const;

  /// Same metric with a different sampling box.
  MetricField with_box(std::vector<double> lo, std::vector<double> hi) const;

  const BackendInfo& info() const noexcept { return info_; }
  const std::optional<WarpParams>& warp() const noexcept { return info_.warp; }

 private:
  int dim_;
  Eval eval_;
  Inside inside_;
  std::vector<double> lo_, hi_;
  BackendInfo info_;
};

MetricField euclidean(int n);
/// a_ij = delta_ij / (1 + k|x|^2/4)^2, sectional curvature k.
MetricField space_form(int n, double k);

struct WarpedMetric {
  MetricField metric;
  double kappa;
};

/// dt^2 + h(t)^2 hat, coordinates (t, xhat). The hat is spot-checked for
/// Ric = (n-2) hatEinsteinConst alpha^2 and hatEinsteinConst must equal
/// h'^2 + mu h^2.
WarpedMetric make_warped(double mu, double h0, double dh0, const MetricField& hat, double hat_einstein_const);

double alpha2(const MetricField& g, std::span<const double> x, std::span<const double> y);

/// Gamma^i_jk stored as (i, j, k).
struct Christoffel {
  int n = 0;
  std::vector<double> g;
  double operator()(int i, int j, int k) const { return g[(static_cast<std::size_t>(i) * n + j) * n + k]; }
  double& operator()(int i, int j, int k) { return g[(static_cast<std::size_t>(i) * n + j) * n + k]; }
};

Christoffel christoffel(const MetricField& g, std::span<const double> x);

/// 1/2 Gamma^i_jk y^j y^k; y may carry jets.
std::vector<Jet> spray_alpha(const Christoffel& gamma, std::span<const Jet> y);
Eigen::VectorXd spray_alpha(const MetricField& g, std::span<const double> x, std::span<const double> y);

/// Spray coefficients at x as jets in y (the callee receives y already
/// seeded as order-2 jets in n variables).
using SprayField = std::function<std::vector<Jet>(std::span<const double> x, std::span<const Jet> y)>;

/// Ric = 2 d_{x^i} G^i - y^j d_{x^j} d_{y^i} G^i + 2 G^j d_{y^j} d_{y^i} G^i
///       - d_{y^j} G^i d_{y^i} G^j
/// x-derivatives by central differences + Richardson, y-derivatives exact.
/// The reported error compares against the (h/2, h/4) extrapolation.
Estimate ricci_of_spray(const SprayField& spray, int n, std::span<const double> x, std::span<const double> y,
                        const FdOptions& fd = {});

Estimate ricci_alpha(const MetricField& g, std::span<const double> x, std::span<const double> y,
                     const FdOptions& fd = {});

struct CurvatureData {
  Christoffel christoffel;
  Eigen::VectorXd spray_alpha;
  Estimate ricci_alpha;
};

CurvatureData curvature(const MetricField& g, std::span<const double> x, std::span<const double> y,
                        const FdOptions& fd = {});

}  // namespace gabm
