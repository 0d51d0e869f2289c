#include "gabm/deform.hpp"

#include <cmath>
#include <sstream>

#include "gabm/errors.hpp"
#include "gabm/jet_linalg.hpp"
#include "gabm/pde.hpp"
#include "gabm/sampling.hpp"

namespace gabm {

namespace {

std::vector<std::vector<double>> chart_samples(const MetricField& g, int count, std::uint64_t seed) {
  SobolSampler q(g.dim(), seed);
  std::vector<std::vector<double>> xs;
  for (int k = 0; k < 100 * count && static_cast<int>(xs.size()) < count; ++k) {
    auto x = q.next(g.box_lo(), g.box_hi());
    if (g.contains(x)) xs.push_back(std::move(x));
  }
  if (static_cast<int>(xs.size()) < count) throw InvalidInput("deformation: chart has too few sample points");
  return xs;
}

std::string num(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

double mean_c(const OneFormField& beta, const std::vector<std::vector<double>>& xs, double tol) {
  const ConformalReport r = conformal_check(beta, xs, tol);
  double c = 0.0;
  for (double v : r.c) c += v;
  return c / static_cast<double>(r.c.size());
}

// D(x) = kappa - mu b^2 as a jet
Jet d_jet(const OneFormField& beta, std::span<const Jet> x, double mu, double kappa) {
  return kappa - mu * beta.norm2(x);
}

}  // namespace

double deform_b2(double b2, double mu, double kappa, DeformDirection dir) {
  if (dir == DeformDirection::forward) {
    const double D = kappa - mu * b2;
    return mu * mu * b2 / (D * kappa);
  }
  const double E = 1.0 / kappa + b2 / mu;
  return b2 * kappa / (mu * mu * E);
}

DeformedPair deform_mu(const OneFormField& beta, double mu, double kappa, const DeformOptions& opt) {
  if (mu == 0.0) throw InvalidInput("deform_mu: mu must be nonzero (mu = 0 is a separate case)");
  if (kappa == 0.0) throw InvalidInput("deform_mu: kappa must be nonzero");
  if (kappa < 0.0) throw InvalidInput("deform_mu: kappa < 0 makes abar pseudo-Riemannian; not supported");
  const MetricField& g = beta.metric();
  const auto xs = chart_samples(g, opt.check_points, opt.seed);
  const KappaReport lr = kappa_check(beta, mu, xs, 1e-6 * std::max(1.0, std::abs(kappa)), opt.tol);
  if (!lr.pass || std::abs(lr.mean - kappa) > 1e-6 * std::max(1.0, std::abs(kappa)))
    throw InvalidInput("deform_mu: c^2 + mu b^2 = " + num(lr.mean) + " does not match kappa = " + num(kappa));
  for (const auto& x : xs)
    if (!(kappa - mu * beta.norm2(x) > 0.0)) throw InvalidInput("deform_mu: kappa - mu b^2 must be positive");

  auto src = std::make_shared<const OneFormField>(beta);
  const double am = std::abs(mu);
  auto metric_eval = [src, mu, kappa, am](std::span<const Jet> x) {
    const Jet D = d_jet(*src, x, mu, kappa);
    const JetMatrix a = src->metric().eval(x);
    const auto b = src->eval(x);
    const int n = a.dim();
    JetMatrix out(n);
    const Jet f = am / D, h = mu / D;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = f * (a(i, j) + h * b[i] * b[j]);
    return out;
  };
  auto inside = [src, mu, kappa](std::span<const double> x) {
    return src->metric().contains(x) && kappa - mu * src->norm2(x) > 0.0;
  };
  BackendInfo info;
  info.label = "deformed(" + g.label() + ", mu=" + num(mu) + ", kappa=" + num(kappa) + ")";
  MetricField abar(g.dim(), metric_eval, inside, g.box_lo(), g.box_hi(), info);
  auto form_eval = [src, mu, kappa, am](std::span<const Jet> x) {
    const Jet D = d_jet(*src, x, mu, kappa);
    const Jet f = std::pow(am, 1.5) / (D * sqrt(D));
    auto b = src->eval(x);
    for (auto& v : b) v = f * v;
    return b;
  };
  OneFormField bbar(abar, form_eval, "deformed(" + beta.label() + ")");
  DeformedPair p{bbar, beta, 0.0, mu, kappa, DeformKind::mu};
  p.c_bar = mean_c(bbar, xs, opt.tol);
  return p;
}

OneFormField deform_mu_inverse(const DeformedPair& pair) {
  if (pair.kind != DeformKind::mu) throw InvalidInput("deform_mu_inverse: pair was not produced by deform_mu");
  auto bar = std::make_shared<const OneFormField>(pair.beta_bar);
  const double mu = pair.mu, kappa = pair.kappa, am = std::abs(mu);
  const MetricField& g = pair.alpha_bar();
  auto metric_eval = [bar, mu, kappa, am](std::span<const Jet> x) {
    const Jet E = 1.0 / kappa + bar->norm2(x) / mu;
    const JetMatrix a = bar->metric().eval(x);
    const auto b = bar->eval(x);
    const int n = a.dim();
    JetMatrix out(n);
    const Jet f = (1.0 / am) / E, h = (1.0 / mu) / E;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out(i, j) = f * (a(i, j) - h * b[i] * b[j]);
    return out;
  };
  auto inside = [bar](std::span<const double> x) { return bar->metric().contains(x); };
  BackendInfo info;
  info.label = "undeformed(" + g.label() + ")";
  MetricField a(g.dim(), metric_eval, inside, g.box_lo(), g.box_hi(), info);
  auto form_eval = [bar, mu, kappa, am](std::span<const Jet> x) {
    const Jet E = 1.0 / kappa + bar->norm2(x) / mu;
    const Jet f = std::pow(am, -1.5) / (E * sqrt(E));
    auto b = bar->eval(x);
    for (auto& v : b) v = f * v;
    return b;
  };
  return OneFormField(a, form_eval, "undeformed(" + pair.beta_bar.label() + ")");
}

DeformedPair deform_kzero(const OneFormField& beta, double mu, const DeformOptions& opt) {
  if (!(mu < 0.0)) throw InvalidInput("deform_kzero: needs mu < 0 (c^2 = -mu b^2)");
  const MetricField& g = beta.metric();
  const auto xs = chart_samples(g, opt.check_points, opt.seed);
  const KappaReport lr = kappa_check(beta, mu, xs, 1e-6, opt.tol);
  if (!lr.pass || std::abs(lr.mean) > 1e-6)
    throw InvalidInput("deform_kzero: c^2 + mu b^2 = " + num(lr.mean) + " is not zero");
  for (const auto& x : xs)
    if (!(beta.norm2(x) > 0.0)) throw InvalidInput("deform_kzero: b vanishes on the chart");

  auto src = std::make_shared<const OneFormField>(beta);
  auto metric_eval = [src](std::span<const Jet> x) {
    const Jet inv = 1.0 / src->norm2(x);
    const JetMatrix a = src->metric().eval(x);
    JetMatrix out(a.dim());
    for (int i = 0; i < a.dim(); ++i)
      for (int j = 0; j < a.dim(); ++j) out(i, j) = inv * a(i, j);
    return out;
  };
  auto inside = [src](std::span<const double> x) { return src->metric().contains(x) && src->norm2(x) > 0.0; };
  BackendInfo info;
  info.label = "kzero(" + g.label() + ")";
  MetricField abar(g.dim(), metric_eval, inside, g.box_lo(), g.box_hi(), info);
  auto form_eval = [src](std::span<const Jet> x) {
    const Jet inv = 1.0 / src->norm2(x);
    auto b = src->eval(x);
    for (auto& v : b) v = inv * v;
    return b;
  };
  OneFormField bbar(abar, form_eval, "kzero(" + beta.label() + ")");
  DeformedPair p{bbar, beta, 0.0, mu, 0.0, DeformKind::kzero};
  p.c_bar = mean_c(bbar, xs, opt.tol);
  return p;
}

PhiSpec deform_phi(const PhiSpec& phi, double mu, double kappa, double K, DeformDirection dir) {
  if (mu == 0.0 || kappa == 0.0) throw InvalidInput("deform_phi: mu and kappa must be nonzero");
  const double am = std::abs(mu);
  const bool fwd = dir == DeformDirection::forward;

  // spot-check that the input solves its system
  const PhiDomain safe = safe_domain(phi.domain(), 0.9);
  for (const auto& [b2, s] : interior_points(safe, 5, 3).nodes) {
    const double v = phi(b2, s);
    const double scale = std::max(1.0, std::abs(K * v * v));
    const double r1 = pde1_residual(phi, b2, s);
    const double r2 = fwd ? pde2_residual(phi, mu, kappa, K, b2, s) : pde2_normalized_residual(phi, am, K, b2, s);
    if (std::abs(r1) > 1e-7 * scale || std::abs(r2) > 1e-7 * scale)
      throw InvalidInput("deform_phi: input does not solve its PDE system at (b2, s) = (" + num(b2) + ", " + num(s) +
                         "); residuals " + num(r1) + ", " + num(r2));
  }

  const PhiSpec src = phi;
  PhiSpec::Eval eval;
  if (fwd) {
    eval = [src, mu, kappa, am](const Jet& b2, const Jet& s) {
      const Jet E = 1.0 / kappa + b2 / mu;
      const Jet W = E - s * s / mu;
      const Jet arg_b2 = b2 * kappa / (mu * mu * E);
      const Jet arg_s = (s / am) / (sqrt(E) * sqrt(W));
      if (!src.in_domain(arg_b2.value(), arg_s.value()))
        throw DomainError("deformed phi: substitution leaves the source domain at (bbar2, sbar) = (" +
                              num(b2.value()) + ", " + num(s.value()) + ")",
                          {b2.value(), s.value()});
      return sqrt(W) / (std::sqrt(am) * E) * src.closure()(arg_b2, arg_s);
    };
  } else {
    eval = [src, mu, kappa, am](const Jet& b2, const Jet& s) {
      const Jet D = kappa - mu * b2;
      const Jet W = D + mu * s * s;
      const Jet arg_b2 = mu * mu * b2 / (D * kappa);
      const Jet arg_s = am * s / (sqrt(D) * sqrt(W));
      if (!src.in_domain(arg_b2.value(), arg_s.value()))
        throw DomainError("deformed phi: substitution leaves the source domain at (b2, s) = (" + num(b2.value()) +
                              ", " + num(s.value()) + ")",
                          {b2.value(), s.value()});
      return std::sqrt(am) * sqrt(W) / D * src.closure()(arg_b2, arg_s);
    };
  }

  // image of the b^2 range; the map is increasing in b^2
  PhiDomain d;
  auto image = [&](double b2) { return deform_b2(b2, mu, kappa, dir); };
  d.b2_lo = image(phi.domain().b2_lo);
  double hi = phi.domain().b2_hi;
  if (fwd && mu > 0) hi = std::min(hi, kappa / mu * (1.0 - kDomainMargin));
  d.b2_hi = image(hi);
  if (!fwd && mu < 0) {
    // E = 1/kappa + bbar^2/mu must stay positive
    d.b2_hi = image(std::min(hi, -mu / kappa * (1.0 - kDomainMargin)));
  }
  if (!(d.b2_hi > d.b2_lo)) throw InvalidInput("deform_phi: empty image domain");
  d = discover_domain(eval, d);
  auto params = phi.params();
  params["mu"] = mu;
  params["kappa"] = kappa;
  params["K"] = K;
  const std::string tag = fwd ? "normalized(" : "denormalized(";
  const std::string formula =
      fwd ? "phibar = sqrt(E - sbar^2/mu)/(sqrt|mu| E) phi(bbar2 kappa/(mu^2 E), sbar/(|mu| sqrt(E) sqrt(E - sbar^2/mu))), "
            "E = 1/kappa + bbar2/mu"
          : "phi = sqrt|mu| sqrt(D + mu s^2)/D phibar(mu^2 b2/(D kappa), |mu| s/(sqrt(D) sqrt(D + mu s^2))), "
            "D = kappa - mu b2";
  return PhiSpec(tag + phi.family() + ")", params, eval, d, formula + "; source: " + phi.formula(), false);
}

}  // namespace gabm
