#include "gabm/riemann.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <utility>

#include "gabm/errors.hpp"

namespace gabm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<int> iota(int n) {
  std::vector<int> v(n);
  for (int i = 0; i < n; ++i) v[i] = i;
  return v;
}

double d1(const Jet& j, int n, int i) {
  int md[kMaxJetVars] = {};
  md[i] += 1;
  return j.derivative(std::span<const int>(md, n));
}

double d2(const Jet& j, int n, int i, int k) {
  int md[kMaxJetVars] = {};
  md[i] += 1;
  md[k] += 1;
  return j.derivative(std::span<const int>(md, n));
}

// Sampling interval inside (lo, hi): trim 10% of finite intervals, cap
// infinite ends two units away.
std::pair<double, double> sample_interval(double lo, double hi) {
  if (std::isfinite(lo) && std::isfinite(hi)) {
    const double w = hi - lo;
    return {lo + 0.1 * w, hi - 0.1 * w};
  }
  if (std::isfinite(lo)) return {lo + 0.1, lo + 2.0};
  if (std::isfinite(hi)) return {hi - 2.0, hi - 0.1};
  return {-1.0, 1.0};
}

}  // namespace

const char* to_string(Backend b) {
  switch (b) {
    case Backend::explicit_metric: return "explicit";
    case Backend::euclidean: return "euclidean";
    case Backend::space_form: return "space_form";
    case Backend::warped: return "warped";
  }
  return "?";
}

double WarpParams::h(double t) const {
  if (mu > 0) {
    const double w = std::sqrt(mu);
    return h0 * std::cos(w * t) + dh0 * std::sin(w * t) / w;
  }
  if (mu < 0) {
    const double w = std::sqrt(-mu);
    return h0 * std::cosh(w * t) + dh0 * std::sinh(w * t) / w;
  }
  return h0 + dh0 * t;
}

double WarpParams::dh(double t) const {
  if (mu > 0) {
    const double w = std::sqrt(mu);
    return -h0 * w * std::sin(w * t) + dh0 * std::cos(w * t);
  }
  if (mu < 0) {
    const double w = std::sqrt(-mu);
    return h0 * w * std::sinh(w * t) + dh0 * std::cosh(w * t);
  }
  return dh0;
}

Jet WarpParams::h(const Jet& t) const {
  if (mu > 0) {
    const double w = std::sqrt(mu);
    return h0 * cos(w * t) + (dh0 / w) * sin(w * t);
  }
  if (mu < 0) {
    const double w = std::sqrt(-mu);
    return h0 * cosh(w * t) + (dh0 / w) * sinh(w * t);
  }
  return h0 + dh0 * t;
}

WarpParams make_warp_params(double mu, double h0, double dh0) {
  WarpParams p;
  p.mu = mu;
  p.h0 = h0;
  p.dh0 = dh0;
  p.kappa = dh0 * dh0 + mu * h0 * h0;
  if (h0 == 0.0 && dh0 == 0.0) throw InvalidInput("warped product: h vanishes identically");

  if (mu > 0) {
    // h = A cos(w t - phase); take the component centred on phase / w
    const double w = std::sqrt(mu);
    const double phase = std::atan2(dh0 / w, h0);
    p.t_lo = (phase - std::numbers::pi / 2) / w;
    p.t_hi = (phase + std::numbers::pi / 2) / w;
  } else if (mu < 0) {
    // h = P e^{wt} + M e^{-wt}
    const double w = std::sqrt(-mu);
    const double P = 0.5 * (h0 + dh0 / w), M = 0.5 * (h0 - dh0 / w);
    p.t_lo = -kInf;
    p.t_hi = kInf;
    if (P > 0 && M < 0) {
      p.t_lo = std::log(-M / P) / (2 * w);
    } else if (P < 0 && M > 0) {
      p.t_hi = std::log(-M / P) / (2 * w);
    } else if (P <= 0 && M <= 0) {
      throw InvalidInput("warped product: h is nowhere positive");
    }
  } else {
    if (dh0 == 0.0) {
      if (h0 <= 0) throw InvalidInput("warped product: h is nowhere positive");
      p.t_lo = -kInf;
      p.t_hi = kInf;
    } else if (dh0 > 0) {
      p.t_lo = -h0 / dh0;
      p.t_hi = kInf;
    } else {
      p.t_lo = -kInf;
      p.t_hi = -h0 / dh0;
    }
  }
  return p;
}

MetricField::MetricField(int dim, Eval eval, Inside inside, std::vector<double> lo, std::vector<double> hi,
                         BackendInfo info)
    : dim_(dim), eval_(std::move(eval)), inside_(std::move(inside)), lo_(std::move(lo)), hi_(std::move(hi)),
      info_(std::move(info)) {
  if (dim_ < 1 || dim_ > kMaxJetVars) throw InvalidInput("metric dimension out of range");
  if (static_cast<int>(lo_.size()) != dim_ || static_cast<int>(hi_.size()) != dim_)
    throw InvalidInput("sampling box has wrong dimension");
  for (int i = 0; i < dim_; ++i)
    if (!(lo_[i] <= hi_[i])) throw InvalidInput("sampling box is empty");
}

bool MetricField::contains(std::span<const double> x) const {
  if (static_cast<int>(x.size()) != dim_) return false;
  for (double v : x)
    if (!std::isfinite(v)) return false;
  return !inside_ || inside_(x);
}

JetMatrix MetricField::eval(std::span<const Jet> x) const {
  if (static_cast<int>(x.size()) != dim_) throw InvalidInput("point has wrong dimension");
  std::vector<double> base(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) base[i] = x[i].value();
  if (!contains(base)) throw DomainError("point outside the chart of " + info_.label, base);

  JetMatrix a = eval_(x);
  if (a.dim() != dim_) throw InvalidInput("metric evaluator returned wrong size");
  const Eigen::MatrixXd v = a.values();
  const double scale = v.cwiseAbs().maxCoeff();
  if (!((v - v.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale))
    throw DomainError("metric is not symmetric", base);
  Eigen::LLT<Eigen::MatrixXd> llt(v);
  if (llt.info() != Eigen::Success || !(llt.matrixL().toDenseMatrix().diagonal().minCoeff() > 0.0))
    throw DomainError("metric is not positive definite", base);
  return a;
}

Eigen::MatrixXd MetricField::eval(std::span<const double> x) const {
  std::vector<Jet> xj(x.begin(), x.end());
  return eval(std::span<const Jet>(xj)).values();
}

MetricField MetricField::with_box(std::vector<double> lo, std::vector<double> hi) const {
  return MetricField(dim_, eval_, inside_, std::move(lo), std::move(hi), info_);
}

MetricField euclidean(int n) {
  auto eval = [n](std::span<const Jet>) {
    JetMatrix a(n);
    for (int i = 0; i < n; ++i) a(i, i) = Jet(1.0);
    return a;
  };
  BackendInfo info;
  info.kind = Backend::euclidean;
  info.label = "euclidean";
  return MetricField(n, eval, {}, std::vector<double>(n, -1.0), std::vector<double>(n, 1.0), info);
}

MetricField space_form(int n, double k) {
  auto eval = [n, k](std::span<const Jet> x) {
    Jet r2(0.0);
    for (const Jet& xi : x) r2 += xi * xi;
    const Jet s = 1.0 + 0.25 * k * r2;
    const Jet w = reciprocal(s * s);
    JetMatrix a(n);
    for (int i = 0; i < n; ++i) a(i, i) = w;
    return a;
  };
  MetricField::Inside inside;
  double half = 1.0;
  if (k < 0) {
    inside = [k](std::span<const double> x) {
      double r2 = 0;
      for (double v : x) r2 += v * v;
      return 1.0 + 0.25 * k * r2 > 0.0;
    };
    half = 0.5 * (2.0 / std::sqrt(-k)) / std::sqrt(static_cast<double>(n));
  }
  BackendInfo info;
  info.kind = Backend::space_form;
  std::ostringstream os;
  os << "space_form(k=" << k << ")";
  info.label = os.str();
  info.curvature = k;
  return MetricField(n, eval, inside, std::vector<double>(n, -half), std::vector<double>(n, half), info);
}

double alpha2(const MetricField& g, std::span<const double> x, std::span<const double> y) {
  const Eigen::MatrixXd a = g.eval(x);
  const Eigen::Map<const Eigen::VectorXd> v(y.data(), static_cast<Eigen::Index>(y.size()));
  return v.dot(a * v);
}

Christoffel christoffel(const MetricField& g, std::span<const double> x) {
  const int n = g.dim();
  const auto xj = seed(x, iota(n), 1);
  const JetMatrix a = g.eval(std::span<const Jet>(xj));
  const Eigen::MatrixXd v = a.values();
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(v);
  if (!lu.isInvertible()) throw DomainError("singular metric", std::vector<double>(x.begin(), x.end()));
  const Eigen::MatrixXd inv = lu.inverse();

  // da[l][j][k] = d a_lj / d x^k
  std::vector<double> da(static_cast<std::size_t>(n) * n * n);
  auto D = [&](int l, int j, int k) -> double& { return da[(static_cast<std::size_t>(l) * n + j) * n + k]; };
  for (int l = 0; l < n; ++l)
    for (int j = 0; j < n; ++j) {
      const Jet& e = a(l, j);
      for (int k = 0; k < n; ++k) D(l, j, k) = e.is_constant() ? 0.0 : d1(e, n, k);
    }

  Christoffel G{n, std::vector<double>(static_cast<std::size_t>(n) * n * n, 0.0)};
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      for (int i = 0; i < n; ++i) {
        double s = 0;
        for (int l = 0; l < n; ++l) s += inv(i, l) * (D(l, j, k) + D(l, k, j) - D(j, k, l));
        G(i, j, k) = G(i, k, j) = 0.5 * s;
      }
    }
  return G;
}

std::vector<Jet> spray_alpha(const Christoffel& gamma, std::span<const Jet> y) {
  const int n = gamma.n;
  if (static_cast<int>(y.size()) != n) throw InvalidInput("direction has wrong dimension");
  std::vector<Jet> yy;
  yy.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) yy.push_back(y[j] * y[k]);
  std::vector<Jet> G(n, Jet(0.0));
  for (int i = 0; i < n; ++i) {
    std::size_t idx = 0;
    for (int j = 0; j < n; ++j)
      for (int k = j; k < n; ++k, ++idx) {
        const double c = (j == k ? 0.5 : 1.0) * gamma(i, j, k);
        if (c != 0.0) G[i] += c * yy[idx];
      }
  }
  return G;
}

Eigen::VectorXd spray_alpha(const MetricField& g, std::span<const double> x, std::span<const double> y) {
  const auto gamma = christoffel(g, x);
  std::vector<Jet> yj(y.begin(), y.end());
  const auto G = spray_alpha(gamma, yj);
  Eigen::VectorXd out(g.dim());
  for (int i = 0; i < g.dim(); ++i) out[i] = G[i].value();
  return out;
}

Estimate ricci_of_spray(const SprayField& spray, int n, std::span<const double> x, std::span<const double> y,
                        const FdOptions& fd) {
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw InvalidInput("point/direction has wrong dimension");
  bool nonzero = false;
  for (double v : y) nonzero = nonzero || v != 0.0;
  if (!nonzero) throw InvalidInput("ricci: y must be nonzero");

  const auto yj = seed(y, iota(n), 2);
  const std::span<const Jet> ys(yj);

  auto safe = [](const Jet& j, auto&& f) { return j.is_constant() || j.order() < 1 ? 0.0 : f(j); };

  // y-only terms at the base point
  const auto G = spray(x, ys);
  if (static_cast<int>(G.size()) != n) throw InvalidInput("spray has wrong dimension");
  double ty = 0.0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double dji = G[i].is_constant() ? 0.0 : d2(G[i], n, j, i);
      const double dGi_j = safe(G[i], [&](const Jet& e) { return d1(e, n, j); });
      const double dGj_i = safe(G[j], [&](const Jet& e) { return d1(e, n, i); });
      ty += 2.0 * G[j].value() * dji - dGi_j * dGj_i;
    }

  // x-derivative terms at step h
  std::vector<double> xs(x.begin(), x.end());
  auto tx = [&](double scale) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double h = scale * fd_step(x[k], fd);
      xs[k] = x[k] + h;
      const auto Gp = spray(xs, ys);
      xs[k] = x[k] - h;
      const auto Gm = spray(xs, ys);
      xs[k] = x[k];
      // 2 d_k G^k - y^k sum_i d_k d_{y^i} G^i
      double dyi = 0.0;
      for (int i = 0; i < n; ++i) {
        const double p = safe(Gp[i], [&](const Jet& e) { return d1(e, n, i); });
        const double m = safe(Gm[i], [&](const Jet& e) { return d1(e, n, i); });
        dyi += (p - m) / (2 * h);
      }
      s += 2.0 * (Gp[k].value() - Gm[k].value()) / (2 * h) - y[k] * dyi;
    }
    return s;
  };
  // Extrapolate from h and h/2; a second extrapolation from h/2 and h/4
  // only serves as the error estimate of the first.
  const double t1 = tx(1.0), t2 = tx(0.5), t4 = tx(0.25);
  const Estimate r = richardson(t1 + ty, t2 + ty);
  const Estimate r2 = richardson(t2 + ty, t4 + ty);
  return {r.value, std::abs(r.value - r2.value)};
}

Estimate ricci_alpha(const MetricField& g, std::span<const double> x, std::span<const double> y,
                     const FdOptions& fd) {
  SprayField s = [&g](std::span<const double> xx, std::span<const Jet> yy) {
    return spray_alpha(christoffel(g, xx), yy);
  };
  return ricci_of_spray(s, g.dim(), x, y, fd);
}

CurvatureData curvature(const MetricField& g, std::span<const double> x, std::span<const double> y,
                        const FdOptions& fd) {
  CurvatureData c;
  c.christoffel = christoffel(g, x);
  std::vector<Jet> yj(y.begin(), y.end());
  const auto G = spray_alpha(c.christoffel, yj);
  c.spray_alpha.resize(g.dim());
  for (int i = 0; i < g.dim(); ++i) c.spray_alpha[i] = G[i].value();
  c.ricci_alpha = ricci_alpha(g, x, y, fd);
  return c;
}

WarpedMetric make_warped(double mu, double h0, double dh0, const MetricField& hat, double hat_einstein_const) {
  const int m = hat.dim();
  const int n = m + 1;
  if (n > kMaxJetVars) throw InvalidInput("warped product: hat dimension too large");
  const WarpParams wp = make_warp_params(mu, h0, dh0);

  if (m >= 2) {
    if (std::abs(hat_einstein_const - wp.kappa) > 1e-12 * std::max(1.0, std::abs(wp.kappa)))
      throw InvalidInput("warped product: hat Einstein constant must equal h'^2 + mu h^2");
    // spot-check Ric_hat = (m-1) kappa alphahat^2
    std::mt19937_64 rng(0x5eed);
    std::vector<double> xh(m), yh(m);
    for (int s = 0; s < 6; ++s) {
      for (int i = 0; i < m; ++i) {
        xh[i] = std::uniform_real_distribution<double>(hat.box_lo()[i], hat.box_hi()[i])(rng);
        yh[i] = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
      }
      const double a2 = alpha2(hat, xh, yh);
      const Estimate ric = ricci_alpha(hat, xh, yh);
      if (std::abs(ric.value - (m - 1) * hat_einstein_const * a2) > 1e-6 * a2)
        throw InvalidInput("warped product: hat fails its Einstein spot-check");
    }
  }

  auto hatp = std::make_shared<const MetricField>(hat);
  auto eval = [wp, hatp, n](std::span<const Jet> x) {
    const Jet h = wp.h(x[0]);
    const Jet h2 = h * h;
    const JetMatrix ah = hatp->eval(x.subspan(1));
    JetMatrix a(n);
    a(0, 0) = Jet(1.0);
    for (int i = 1; i < n; ++i)
      for (int j = 1; j < n; ++j) a(i, j) = h2 * ah(i - 1, j - 1);
    return a;
  };
  auto inside = [wp, hatp](std::span<const double> x) {
    return x[0] > wp.t_lo && x[0] < wp.t_hi && wp.h(x[0]) > 0.0 && hatp->contains(x.subspan(1));
  };
  std::vector<double> lo(n), hi(n);
  std::tie(lo[0], hi[0]) = sample_interval(wp.t_lo, wp.t_hi);
  for (int i = 0; i < m; ++i) {
    lo[i + 1] = hat.box_lo()[i];
    hi[i + 1] = hat.box_hi()[i];
  }
  BackendInfo info;
  info.kind = Backend::warped;
  std::ostringstream os;
  os << "warped(mu=" << mu << ", h0=" << h0 << ", dh0=" << dh0 << ", hat=" << hat.label() << ")";
  info.label = os.str();
  info.warp = wp;
  info.hat = hatp;
  return {MetricField(n, eval, inside, lo, hi, info), wp.kappa};
}

}  // namespace gabm
