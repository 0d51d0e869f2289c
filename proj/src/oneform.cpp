#include "gabm/oneform.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "gabm/errors.hpp"
#include "gabm/jet_linalg.hpp"

namespace gabm {

namespace {

std::vector<int> iota(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

double conformal_factor(const OneFormField& beta, std::span<const double> x) {
  const Eigen::MatrixXd bij = covariant_derivative(beta, x);
  const Eigen::MatrixXd a_inv = beta.metric().eval(x).inverse();
  return (a_inv * bij.transpose()).trace() / beta.dim();
}

}  // namespace

OneFormField::OneFormField(MetricField metric, Eval eval, std::string label)
    : metric_(std::move(metric)), eval_(std::move(eval)), label_(std::move(label)) {}

std::vector<Jet> OneFormField::eval(std::span<const Jet> x) const {
  if (static_cast<int>(x.size()) != dim()) throw InvalidInput("point has wrong dimension");
  auto b = eval_(x);
  if (static_cast<int>(b.size()) != dim()) throw InvalidInput("one-form evaluator returned wrong size");
  return b;
}

Eigen::VectorXd OneFormField::eval(std::span<const double> x) const {
  std::vector<Jet> xj(x.begin(), x.end());
  const auto b = eval(std::span<const Jet>(xj));
  Eigen::VectorXd out(dim());
  for (int i = 0; i < dim(); ++i) out[i] = b[i].value();
  return out;
}

double OneFormField::norm2(std::span<const double> x) const {
  const Eigen::VectorXd b = eval(x);
  const Eigen::MatrixXd a = metric_.eval(x);
  return b.dot(a.llt().solve(b));
}

Jet OneFormField::norm2(std::span<const Jet> x) const {
  const JetMatrix inv = inverse(metric_.eval(x));
  const auto b = eval(x);
  Jet s(0.0);
  for (int i = 0; i < dim(); ++i)
    for (int j = 0; j < dim(); ++j) s += inv(i, j) * b[i] * b[j];
  return s;
}

OneFormField radial_form(const MetricField& g, double c) {
  auto eval = [c](std::span<const Jet> x) {
    std::vector<Jet> b;
    b.reserve(x.size());
    for (const Jet& xi : x) b.push_back(c * xi);
    return b;
  };
  return OneFormField(g, eval, "radial(c=" + std::to_string(c) + ")");
}

OneFormField constant_form(const MetricField& g, std::vector<double> b) {
  if (static_cast<int>(b.size()) != g.dim()) throw InvalidInput("constant form has wrong dimension");
  auto eval = [b](std::span<const Jet>) { return std::vector<Jet>(b.begin(), b.end()); };
  return OneFormField(g, eval, "constant");
}

OneFormField warped_form(const MetricField& g) {
  if (!g.warp()) throw InvalidInput("warped_form needs a warped backend");
  const WarpParams wp = *g.warp();
  const int n = g.dim();
  auto eval = [wp, n](std::span<const Jet> x) {
    std::vector<Jet> b(n, Jet(0.0));
    b[0] = wp.h(x[0]);
    return b;
  };
  return OneFormField(g, eval, "h(t)dt");
}

Eigen::MatrixXd covariant_derivative(const OneFormField& beta, std::span<const double> x) {
  const int n = beta.dim();
  const auto xj = seed(x, iota(n), 1);
  const auto b = beta.eval(std::span<const Jet>(xj));
  const Christoffel G = christoffel(beta.metric(), x);
  Eigen::MatrixXd out(n, n);
  std::vector<int> md(n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double d = 0.0;
      if (!b[i].is_constant()) {
        md[j] = 1;
        d = b[i].derivative(md);
        md[j] = 0;
      }
      for (int k = 0; k < n; ++k) d -= G(k, i, j) * b[k].value();
      out(i, j) = d;
    }
  return out;
}

BetaTensors beta_tensors(const OneFormField& beta, std::span<const double> x) {
  BetaTensors t;
  t.a = beta.metric().eval(x);
  t.a_inv = t.a.inverse();
  t.b = beta.eval(x);
  t.b_up = t.a_inv * t.b;
  t.b2 = t.b.dot(t.b_up);
  t.bij = covariant_derivative(beta, x);
  t.r = 0.5 * (t.bij + t.bij.transpose());
  t.s = 0.5 * (t.bij - t.bij.transpose());
  t.s_up = t.a_inv * t.s;
  t.r_i = t.r.transpose() * t.b_up;
  t.s_i = t.s.transpose() * t.b_up;
  t.r_up = t.a_inv * t.r_i;
  t.s_up_i = t.a_inv * t.s_i;
  t.r_bb = t.b_up.dot(t.r * t.b_up);
  return t;
}

BetaDerived beta_quantities(const OneFormField& beta, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(y.size()) != beta.dim()) throw InvalidInput("direction has wrong dimension");
  BetaDerived d;
  static_cast<BetaTensors&>(d) = beta_tensors(beta, x);
  const Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
  d.alpha = std::sqrt(v.dot(d.a * v));
  d.beta = d.b.dot(v);
  d.r00 = v.dot(d.r * v);
  d.r0 = d.r_i.dot(v);
  d.s0 = d.s_i.dot(v);
  d.s_up0 = d.s_up * v;
  return d;
}

double metric_norm(const Eigen::MatrixXd& e, const Eigen::MatrixXd& a_inv) {
  // tr(A^-1 E A^-1 E^T)
  const Eigen::MatrixXd m = a_inv * e * a_inv * e.transpose();
  return std::sqrt(std::max(0.0, m.trace()));
}

ConformalReport conformal_check(const OneFormField& beta, const std::vector<std::vector<double>>& xs, double tol) {
  if (xs.empty()) throw InvalidInput("conformal_check: no samples");
  ConformalReport rep;
  for (const auto& x : xs) {
    const Eigen::MatrixXd a = beta.metric().eval(std::span<const double>(x));
    const Eigen::MatrixXd a_inv = a.inverse();
    const Eigen::MatrixXd bij = covariant_derivative(beta, x);
    const double c = (a_inv * bij.transpose()).trace() / beta.dim();
    const double res = metric_norm(bij - c * a, a_inv);
    rep.c.push_back(c);
    rep.residual.push_back(res);
    rep.max_residual = std::max(rep.max_residual, res);
  }
  rep.pass = rep.max_residual < tol;
  return rep;
}

KappaReport kappa_check(const OneFormField& beta, double mu, const std::vector<std::vector<double>>& xs,
                        double tol, double conformal_tol) {
  const ConformalReport conf = conformal_check(beta, xs, conformal_tol);
  if (!conf.pass) throw InvalidInput("kappa_check: beta is not conformal on the samples");
  KappaReport rep;
  double lo = 0, hi = 0, sum = 0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    const double kap = conf.c[k] * conf.c[k] + mu * beta.norm2(std::span<const double>(xs[k]));
    rep.kappa.push_back(kap);
    lo = k == 0 ? kap : std::min(lo, kap);
    hi = k == 0 ? kap : std::max(hi, kap);
    sum += kap;
  }
  rep.mean = sum / static_cast<double>(xs.size());
  rep.spread = hi - lo;
  rep.pass = rep.spread < tol;
  return rep;
}

DirectionalCheck c_direction_check(const OneFormField& beta, double mu, std::span<const double> x,
                                   std::span<const double> y, const FdOptions& fd) {
  const int n = beta.dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw InvalidInput("point/direction has wrong dimension");
  double xmax = 0, ymax = 0;
  for (int i = 0; i < n; ++i) {
    xmax = std::max(xmax, std::abs(x[i]));
    ymax = std::max(ymax, std::abs(y[i]));
  }
  if (ymax == 0) throw InvalidInput("c_direction_check: y must be nonzero");
  const double h = fd_step(xmax, fd) / ymax;
  std::vector<double> xp(n), xm(n);
  auto diff = [&](double step) {
    for (int i = 0; i < n; ++i) {
      xp[i] = x[i] + step * y[i];
      xm[i] = x[i] - step * y[i];
    }
    return (conformal_factor(beta, xp) - conformal_factor(beta, xm)) / (2 * step);
  };
  DirectionalCheck out;
  out.derivative = richardson(diff(h), diff(0.5 * h)).value;
  out.expected = -mu * beta.eval(x).dot(Eigen::Map<const Eigen::VectorXd>(y.data(), n));
  out.defect = std::abs(out.derivative - out.expected);
  return out;
}

}  // namespace gabm
