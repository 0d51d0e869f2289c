#include "gabm/gab.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gabm/errors.hpp"
#include "gabm/jet_linalg.hpp"
#include "gabm/pde.hpp"
#include "gabm/sampling.hpp"

namespace gabm {

namespace {

std::vector<int> iota(int n, int from = 0) {
  std::vector<int> v(n);
  std::iota(v.begin(), v.end(), from);
  return v;
}

double d1(const Jet& j, int n, int i) {
  if (j.is_constant() || j.order() < 1) return 0.0;
  std::vector<int> md(n, 0);
  md[i] = 1;
  return j.derivative(md);
}

double d2(const Jet& j, int n, int i, int k) {
  if (j.is_constant() || j.order() < 2) return 0.0;
  std::vector<int> md(n, 0);
  ++md[i];
  ++md[k];
  return j.derivative(md);
}

void check_dims(const GabMetric& m, std::span<const double> x, std::span<const double> y) {
  if (static_cast<int>(x.size()) != m.dim() || static_cast<int>(y.size()) != m.dim())
    throw InvalidInput("point/direction has wrong dimension");
}

double val(double v) { return v; }
double val(const Jet& v) { return v.value(); }

template <class T>
struct QF {
  T Q, R, Theta, Psi, Pi, Omega;
};

template <class T>
QF<T> qf(const T& p, const T& p1, const T& p2, const T& p12, const T& p22, double b2, const T& s) {
  const T d1 = p - s * p2;
  const T d2 = d1 + (b2 - s * s) * p22;
  if (!(val(d1) > 0.0) || !(val(d2) > 0.0))
    throw DomainError("regularity denominators not positive", {b2, val(s), val(d1), val(d2)});
  QF<T> q;
  q.Q = p2 / d1;
  q.R = p1 / d1;
  q.Theta = (d1 * p2 - s * p * p22) / (2.0 * p * d2);
  q.Psi = p22 / (2.0 * d2);
  q.Pi = (d1 * p12 - s * p1 * p22) / (d1 * d2);
  q.Omega = 2.0 * p1 / p - (s * p + (b2 - s * s) * p2) / p * q.Pi;
  return q;
}

struct Richardson3 {
  double t1, t2, t4;
};

Estimate extrapolate(const Richardson3& t, double base) {
  const Estimate r = richardson(t.t1 + base, t.t2 + base);
  const Estimate r2 = richardson(t.t2 + base, t.t4 + base);
  return {r.value, std::abs(r.value - r2.value)};
}

}  // namespace

GabMetric::GabMetric(OneFormField beta, PhiSpec phi, EinsteinContext ctx)
    : beta_(std::move(beta)), phi_(std::move(phi)), ctx_(ctx) {}

// ---------------------------------------------------------------- F and g

double F(const GabMetric& m, std::span<const double> x, std::span<const double> y) {
  check_dims(m, x, y);
  const Eigen::MatrixXd a = m.alpha().eval(x);
  const Eigen::VectorXd b = m.beta().eval(x);
  const Eigen::Map<const Eigen::VectorXd> yv(y.data(), static_cast<Eigen::Index>(y.size()));
  const double a2 = yv.dot(a * yv);
  if (!(a2 > 0.0)) throw InvalidInput("F: y must be nonzero");
  const double al = std::sqrt(a2);
  const double b2 = b.dot(a.llt().solve(b));
  return al * m.phi()(b2, b.dot(yv) / al);
}

Jet F(const GabMetric& m, std::span<const Jet> x, std::span<const Jet> y) {
  const int n = m.dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw InvalidInput("point/direction has wrong dimension");
  const JetMatrix a = m.alpha().eval(x);
  const auto b = m.beta().eval(x);
  Jet a2(0.0), be(0.0);
  for (int i = 0; i < n; ++i) {
    be += b[i] * y[i];
    for (int j = 0; j < n; ++j) a2 += a(i, j) * y[i] * y[j];
  }
  if (!(a2.value() > 0.0)) throw InvalidInput("F: y must be nonzero");
  const Jet al = sqrt(a2);
  return al * m.phi()(m.beta().norm2(x), be / al);
}

Eigen::MatrixXd fundamental_tensor(const GabMetric& m, std::span<const double> x, std::span<const double> y) {
  check_dims(m, x, y);
  const int n = m.dim();
  const std::vector<Jet> xc(x.begin(), x.end());
  const auto yj = seed(y, iota(n), 2);
  const Jet f = F(m, xc, yj);
  const Jet f2 = f * f;
  Eigen::MatrixXd g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = 0.5 * d2(f2, n, i, j);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g);
  if (!(es.eigenvalues().minCoeff() > 0.0)) {
    std::vector<double> w(es.eigenvalues().data(), es.eigenvalues().data() + n);
    throw DomainError("fundamental tensor is not positive definite", w);
  }
  return g;
}

QFunctions qfunctions(const PhiSpec& phi, double b2, double s) {
  const PhiJet j = phi.jet(b2, s);
  const auto q = qf<double>(j.phi, j.phi1, j.phi2, j.phi12, j.phi22, b2, s);
  return {q.Q, q.R, q.Theta, q.Psi, q.Pi, q.Omega};
}

// ---------------------------------------------------------------- sprays

std::vector<Jet> spray_formula(const GabMetric& m, std::span<const double> x, std::span<const Jet> y) {
  const int n = m.dim();
  if (static_cast<int>(x.size()) != n || static_cast<int>(y.size()) != n)
    throw InvalidInput("point/direction has wrong dimension");
  const BetaTensors t = beta_tensors(m.beta(), x);
  Jet a2(0.0), be(0.0), r00(0.0), r0(0.0), s0(0.0);
  for (int i = 0; i < n; ++i) {
    be += t.b[i] * y[i];
    r0 += t.r_i[i] * y[i];
    s0 += t.s_i[i] * y[i];
    for (int j = 0; j < n; ++j) {
      a2 += t.a(i, j) * y[i] * y[j];
      r00 += t.r(i, j) * y[i] * y[j];
    }
  }
  if (!(a2.value() > 0.0)) throw InvalidInput("spray: y must be nonzero");
  const Jet al = sqrt(a2);
  const Jet s = be / al;
  const PhiPartials p = m.phi().partials(Jet(t.b2), s);
  const auto q = qf<Jet>(p.phi, p.phi1, p.phi2, p.phi12, p.phi22, t.b2, s);

  const Jet common = -2.0 * al * q.Q * s0 + r00 + 2.0 * a2 * q.R * t.r_bb;
  const Jet ycoef = (q.Theta * common + al * q.Omega * (r0 + s0)) / al;
  const Jet bcoef = q.Psi * common + al * q.Pi * (r0 + s0);
  std::vector<Jet> G = spray_alpha(christoffel(m.alpha(), x), y);
  for (int i = 0; i < n; ++i) {
    Jet si0(0.0);
    for (int k = 0; k < n; ++k) si0 += t.s_up(i, k) * y[k];
    G[i] += al * q.Q * si0 + ycoef * y[i] + bcoef * t.b_up[i] - a2 * q.R * (t.r_up[i] + t.s_up_i[i]);
  }
  return G;
}

SprayData spray_formula(const GabMetric& m, std::span<const double> x, std::span<const double> y) {
  check_dims(m, x, y);
  const std::vector<Jet> yc(y.begin(), y.end());
  const auto G = spray_formula(m, x, yc);
  SprayData d;
  d.baseG = spray_alpha(m.alpha(), x, y);
  d.G.resize(m.dim());
  for (int i = 0; i < m.dim(); ++i) d.G[i] = G[i].value();
  d.Qvec = d.G - d.baseG;
  return d;
}

std::vector<Jet> spray_direct_jets(const GabMetric& m, std::span<const double> x, std::span<const double> y) {
  check_dims(m, x, y);
  const int n = m.dim();
  if (2 * n > kMaxJetVars) throw InvalidInput("direct spray: dimension too large");
  std::vector<double> at(x.begin(), x.end());
  at.insert(at.end(), y.begin(), y.end());
  const auto v = seed(at, iota(2 * n), 4);
  const std::span<const Jet> xs(v.data(), n), ys(v.data() + n, n);
  const Jet f = F(m, xs, ys);
  const Jet f2 = f * f;

  std::vector<Jet> dx(n), dy(n);
  for (int k = 0; k < n; ++k) {
    dx[k] = f2.partial(k);
    dy[k] = f2.partial(n + k);
  }
  JetMatrix g(n);
  for (int i = 0; i < n; ++i)
    for (int l = i; l < n; ++l) g(i, l) = g(l, i) = 0.5 * dy[i].partial(n + l);
  const JetMatrix ginv = inverse(g);
  std::vector<Jet> rhs(n);
  for (int l = 0; l < n; ++l) {
    Jet acc = -dx[l];
    for (int k = 0; k < n; ++k) acc += dx[k].partial(n + l) * ys[k];
    rhs[l] = acc.truncated(2);
  }
  const auto keep = iota(n, n);
  std::vector<Jet> G(n);
  for (int i = 0; i < n; ++i) {
    Jet acc(0.0);
    for (int l = 0; l < n; ++l) acc += ginv(i, l) * rhs[l];
    G[i] = restrict_vars(0.25 * acc, keep).truncated(2);
  }
  return G;
}

SprayData spray_direct(const GabMetric& m, std::span<const double> x, std::span<const double> y) {
  const auto G = spray_direct_jets(m, x, y);
  SprayData d;
  d.baseG = spray_alpha(m.alpha(), x, y);
  d.G.resize(m.dim());
  for (int i = 0; i < m.dim(); ++i) d.G[i] = G[i].value();
  d.Qvec = d.G - d.baseG;
  return d;
}

// ---------------------------------------------------------------- Ricci

const char* to_string(RicciRoute r) {
  switch (r) {
    case RicciRoute::direct: return "direct";
    case RicciRoute::change_formula: return "change-formula";
    case RicciRoute::closed_form: return "closed-form";
  }
  return "?";
}

RicciRoute ricci_route_from_string(const std::string& s) {
  for (auto r : {RicciRoute::direct, RicciRoute::change_formula, RicciRoute::closed_form})
    if (s == to_string(r)) return r;
  throw InvalidInput("unknown ricci route '" + s + "' (expected direct, change-formula or closed-form)");
}

ClaimCheck verify_claims(const GabMetric& m, std::span<const double> x, std::span<const double> y,
                         const FdOptions& fd) {
  check_dims(m, x, y);
  const int n = m.dim();
  const auto& ctx = m.context();
  ClaimCheck c;
  const BetaDerived q = beta_quantities(m.beta(), x, y);
  c.c = (q.a_inv * q.bij).trace() / n;
  c.conformal_residual = metric_norm(q.bij - c.c * q.a, q.a_inv);
  const double d = ctx.kappa - ctx.mu * q.b2;
  c.kappa_defect = std::abs(c.c * c.c - d);
  const Estimate ra = ricci_alpha(m.alpha(), x, y, fd);
  const double a2 = q.alpha * q.alpha;
  c.ricci_alpha_defect = std::abs(ra.value - (n - 1) * ctx.mu * a2) / a2;
  c.aE = c.conformal_residual <= 1e-8 * std::max(1.0, std::abs(c.c)) &&
         c.kappa_defect <= 1e-8 * std::max(1.0, std::abs(ctx.kappa)) && d > 0.0 && c.ricci_alpha_defect <= 1e-6;
  const double s = q.beta / q.alpha;
  const PhiJet j = m.phi().jet(q.b2, s);
  c.pde1_residual = j.phi22 - 2.0 * (j.phi1 - s * j.phi12);
  const double scale = std::max({1.0, std::abs(j.phi22), 2.0 * std::abs(j.phi1), 2.0 * std::abs(s * j.phi12)});
  c.pde1 = std::abs(c.pde1_residual) <= 1e-8 * scale;
  return c;
}

Estimate ricci(const GabMetric& m, std::span<const double> x, std::span<const double> y, RicciRoute route,
               const FdOptions& fd) {
  check_dims(m, x, y);
  const int n = m.dim();
  const auto& ctx = m.context();

  if (route == RicciRoute::direct) {
    SprayField sf = [&m](std::span<const double> xx, std::span<const Jet> yy) {
      std::vector<double> yv(yy.size());
      for (std::size_t i = 0; i < yy.size(); ++i) yv[i] = yy[i].value();
      return spray_direct_jets(m, xx, yv);
    };
    return ricci_of_spray(sf, n, x, y, fd);
  }

  if (route == RicciRoute::closed_form) {
    if (!ctx.claims_aE || !ctx.claims_pde1)
      throw InvalidInput("closed-form ricci needs the aE and pde1 claims");
    const ClaimCheck c = verify_claims(m, x, y, fd);
    if (!c.aE || !c.pde1) {
      std::ostringstream os;
      os << "closed-form ricci: claims not verified (conformal residual " << c.conformal_residual
         << ", kappa defect " << c.kappa_defect << ", Ric_alpha defect " << c.ricci_alpha_defect << ", pde1 residual "
         << c.pde1_residual << ")";
      throw InvalidInput(os.str());
    }
    const double a2 = alpha2(m.alpha(), x, y);
    const Eigen::VectorXd b = m.beta().eval(x);
    const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
    const double b2 = m.beta().norm2(x);
    const double s = b.dot(yv) / std::sqrt(a2);
    const PsiValue p = psi_jet(m.phi(), b2, s);
    const double v = ctx.mu + (ctx.kappa - ctx.mu * b2) * (p.psi * p.psi - (p.psi2 + 2.0 * s * p.psi1)) +
                     ctx.mu * s * p.psi;
    return {(n - 1) * a2 * v, 0.0};
  }

  // change formula
  const auto yj = seed(y, iota(n), 2);
  auto Qat = [&](std::span<const double> xx) {
    auto G = spray_formula(m, xx, yj);
    const auto B = spray_alpha(christoffel(m.alpha(), xx), yj);
    for (int i = 0; i < n; ++i) G[i] -= B[i];
    return G;
  };
  const auto Q = Qat(x);
  const Christoffel gam = christoffel(m.alpha(), x);
  auto N = [&](int l, int j) {  // N^l_j = Gamma^l_jk y^k
    double v = 0.0;
    for (int k = 0; k < n; ++k) v += gam(l, j, k) * y[k];
    return v;
  };
  double alg = 0.0;
  for (int i = 0; i < n; ++i) {
    // 2 (-N^j_i Q^i_.j + Q^j Gamma^i_ji)
    for (int j = 0; j < n; ++j) alg += 2.0 * (-N(j, i) * d1(Q[i], n, j) + Q[j].value() * gam(i, j, i));
    // - y^j (-Gamma^l_ji Q^i_.l - N^l_j Q^i_.i.l + Q^l_.i Gamma^i_lj)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        alg -= y[j] * (-gam(l, j, i) * d1(Q[i], n, l) - N(l, j) * d2(Q[i], n, i, l) + d1(Q[l], n, i) * gam(i, l, j));
    for (int j = 0; j < n; ++j) alg += 2.0 * Q[j].value() * d2(Q[i], n, j, i) - d1(Q[i], n, j) * d1(Q[j], n, i);
  }
  std::vector<double> xs(x.begin(), x.end());
  auto tx = [&](double scale) {
    double s = 0.0;
    for (int k = 0; k < n; ++k) {
      const double h = scale * fd_step(x[k], fd);
      xs[k] = x[k] + h;
      const auto Qp = Qat(xs);
      xs[k] = x[k] - h;
      const auto Qm = Qat(xs);
      xs[k] = x[k];
      double dyi = 0.0;
      for (int i = 0; i < n; ++i) dyi += (d1(Qp[i], n, i) - d1(Qm[i], n, i)) / (2 * h);
      s += 2.0 * (Qp[k].value() - Qm[k].value()) / (2 * h) - y[k] * dyi;
    }
    return s;
  };
  const Estimate ra = ricci_alpha(m.alpha(), x, y, fd);
  const Estimate r = extrapolate({tx(1.0), tx(0.5), tx(0.25)}, ra.value + alg);
  return {r.value, r.error + ra.error};
}

// ---------------------------------------------------------------- checks

Samples admissible_samples(const GabMetric& m, int count, std::uint64_t seed) {
  const int n = m.dim();
  SobolSampler q(2 * n, seed);
  std::vector<double> lo(m.alpha().box_lo()), hi(m.alpha().box_hi());
  lo.insert(lo.end(), n, -1.0);
  hi.insert(hi.end(), n, 1.0);
  Samples out;
  const long max_draws = 200L * std::max(count, 1);
  for (long k = 0; k < max_draws && static_cast<int>(out.size()) < count; ++k) {
    const auto p = q.next(lo, hi);
    std::vector<double> x(p.begin(), p.begin() + n), y(p.begin() + n, p.end());
    if (!m.alpha().contains(x)) continue;
    try {
      const double a2 = alpha2(m.alpha(), x, y);
      if (!(a2 > 1e-6)) continue;
      const double b2 = m.beta().norm2(x);
      const Eigen::VectorXd b = m.beta().eval(x);
      const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
      const auto& d = m.phi().domain();
      if (b2 < d.b2_lo || b2 > d.b2_hi) continue;
      if (!m.phi().in_domain(b2, b.dot(yv) / std::sqrt(a2))) continue;
    } catch (const DomainError&) {
      continue;
    }
    out.emplace_back(std::move(x), std::move(y));
  }
  if (static_cast<int>(out.size()) < count)
    throw InvalidInput("could not draw enough admissible samples (" + std::to_string(out.size()) + " of " +
                       std::to_string(count) + ")");
  return out;
}

EinsteinReport einstein_residual(const GabMetric& m, double K, const Samples& samples, RicciRoute route, Exec exec,
                                 const FdOptions& fd) {
  const int n = m.dim();
  const auto vals = evaluate_all(
      samples.size(),
      [&](std::size_t k) {
        const auto& [x, y] = samples[k];
        const Estimate r = ricci(m, x, y, route, fd);
        const double f = F(m, x, y);
        const double scale = (n - 1) * f * f;
        return std::array<double, 2>{std::abs(r.value - (n - 1) * K * f * f) / scale, r.error / scale};
      },
      exec);
  EinsteinReport rep;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    rep.residual.push_back(vals[k][0]);
    rep.error.push_back(vals[k][1]);
    if (k == 0 || vals[k][0] > rep.max_residual) {
      rep.max_residual = vals[k][0];
      rep.worst = k;
    }
  }
  return rep;
}

ProjectiveReport projective_check(const GabMetric& m, const Samples& samples, double tol, Exec exec) {
  const int n = m.dim();
  std::vector<std::vector<double>> xs;
  for (const auto& s : samples) xs.push_back(s.first);
  if (xs.empty()) throw InvalidInput("projective check: no samples");
  const ConformalReport conf = conformal_check(m.beta(), xs);
  if (!conf.pass) throw InvalidInput("projective check: beta is not conformal on the samples");

  const auto vals = evaluate_all(
      samples.size(),
      [&](std::size_t k) {
        const auto& [x, y] = samples[k];
        const SprayData d = spray_direct(m, x, y);
        const double al = std::sqrt(alpha2(m.alpha(), x, y));
        double anti = 0.0;
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) anti = std::max(anti, std::abs(d.Qvec[i] * y[j] - d.Qvec[j] * y[i]));
        const Eigen::Map<const Eigen::VectorXd> yv(y.data(), n);
        const double P = d.Qvec.dot(yv) / yv.squaredNorm();
        const double b2 = m.beta().norm2(x);
        const double s = m.beta().eval(x).dot(yv) / al;
        const double expected = conf.c[k] * al * psi_jet(m.phi(), b2, s).psi;
        return std::array<double, 2>{anti / (al * al * al), std::abs(P - expected) / al};
      },
      exec);
  ProjectiveReport rep;
  double worst = -1.0;
  for (std::size_t k = 0; k < vals.size(); ++k) {
    rep.max_defect = std::max(rep.max_defect, vals[k][0]);
    rep.max_factor_defect = std::max(rep.max_factor_defect, vals[k][1]);
    const double w = std::max(vals[k][0], vals[k][1]);
    if (w > worst) {
      worst = w;
      rep.witness = k;
    }
  }
  rep.pass = rep.max_defect <= tol && rep.max_factor_defect <= tol;
  return rep;
}

DouglasReport douglas_check(const PhiSpec& phi, const std::vector<double>& b2_slices, int s_points, double tol) {
  if (s_points < 6) throw InvalidInput("douglas check: need at least 6 s points");
  DouglasReport rep;
  for (double b2 : b2_slices) {
    if (!(b2 > 0.0)) throw InvalidInput("douglas check: b^2 slices must be positive");
    const double b = std::sqrt(b2);
    Eigen::MatrixXd V(s_points, 5);
    Eigen::VectorXd r(s_points);
    for (int k = 0; k < s_points; ++k) {
      const double t = (1.0 - kDomainMargin) * (-1.0 + 2.0 * k / (s_points - 1));
      const double s = b * t;
      const PhiJet j = phi.jet(b2, s);
      const double num = j.phi22 - 2.0 * (j.phi1 - s * j.phi12);
      const double den = 2.0 * (j.phi - s * j.phi2 + (b2 - s * s) * j.phi22);
      if (!(den > 0.0)) throw DomainError("douglas check: regularity fails", {b2, s});
      r[k] = num / den;
      for (int p = 0; p < 5; ++p) V(k, p) = std::pow(t, p);
    }
    const Eigen::VectorXd c = V.colPivHouseholderQr().solve(r);
    DouglasSlice sl;
    sl.b2 = b2;
    for (int p = 0; p < 5; ++p) sl.coeff[p] = c[p];
    sl.h1 = c[0];
    sl.h2 = c[2] / b2;
    sl.fit_residual = (V * c - r).cwiseAbs().maxCoeff();
    rep.max_defect = std::max({rep.max_defect, sl.fit_residual, std::abs(c[1]), std::abs(c[3]), std::abs(c[4])});
    rep.slices.push_back(sl);
  }
  rep.pass = rep.max_defect < tol;
  return rep;
}

BerwaldReport berwald_check(const GabMetric& m, const Samples& samples, double tol, Exec exec) {
  const int n = m.dim();
  const auto vals = evaluate_all(
      samples.size(),
      [&](std::size_t k) {
        const auto& [x, y] = samples[k];
        auto hess = [&](const std::vector<double>& yy) {
          const auto G = spray_direct_jets(m, x, yy);
          std::vector<double> H(static_cast<std::size_t>(n) * n * n);
          for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
              for (int l = 0; l < n; ++l) H[(static_cast<std::size_t>(i) * n + j) * n + l] = d2(G[i], n, j, l);
          return H;
        };
        double worst = 0.0;
        std::vector<double> yy(y);
        for (int c = 0; c < n; ++c) {
          auto diff = [&](double h) {
            yy[c] = y[c] + h;
            const auto Hp = hess(yy);
            yy[c] = y[c] - h;
            const auto Hm = hess(yy);
            yy[c] = y[c];
            std::vector<double> d(Hp.size());
            for (std::size_t q = 0; q < d.size(); ++q) d[q] = (Hp[q] - Hm[q]) / (2 * h);
            return d;
          };
          const double h = fd_step(y[c], FdOptions{});
          const auto D1 = diff(h), D2 = diff(0.5 * h);
          for (std::size_t q = 0; q < D1.size(); ++q)
            worst = std::max(worst, std::abs(richardson(D1[q], D2[q]).value));
        }
        return worst * std::sqrt(alpha2(m.alpha(), x, y));
      },
      exec);
  BerwaldReport rep;
  for (std::size_t k = 0; k < vals.size(); ++k)
    if (k == 0 || vals[k] > rep.max_third) {
      rep.max_third = vals[k];
      rep.witness = k;
    }
  rep.pass = rep.max_third <= tol;
  return rep;
}

}  // namespace gabm
