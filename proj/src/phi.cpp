#include "gabm/phi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "gabm/errors.hpp"
#include "gabm/sampling.hpp"

namespace gabm {

namespace {

// Relative slack on |s| <= b, so that s = beta / alpha computed in floating
// point at the boundary is still accepted.
constexpr double kSlack = 1e-9;

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

PhiSpec::PhiSpec(std::string family, Params params, Eval eval, PhiDomain domain, std::string formula,
                 bool claims_regular)
    : family_(std::move(family)), params_(std::move(params)), eval_(std::move(eval)), domain_(domain),
      formula_(std::move(formula)), claims_regular_(claims_regular) {
  if (!(domain_.b2_lo >= 0.0) || !(domain_.b2_lo <= domain_.b2_hi))
    throw InvalidInput("phi: invalid domain [" + fmt(domain_.b2_lo) + ", " + fmt(domain_.b2_hi) + "]");
}

bool PhiSpec::in_domain(double b2, double s) const {
  if (!std::isfinite(b2) || !std::isfinite(s)) return false;
  const double tol = kSlack * std::max(1.0, domain_.b2_hi);
  if (b2 < domain_.b2_lo - tol || b2 > domain_.b2_hi + tol) return false;
  return s * s <= std::max(b2, 0.0) * (1.0 + kSlack) + kSlack * kSlack;
}

Jet PhiSpec::operator()(const Jet& b2, const Jet& s) const {
  if (!in_domain(b2.value(), s.value()))
    throw DomainError("phi '" + family_ + "' evaluated outside its domain at (b2, s) = (" + fmt(b2.value()) + ", " +
                          fmt(s.value()) + ")",
                      {b2.value(), s.value()});
  return eval_(b2, s);
}

double PhiSpec::operator()(double b2, double s) const { return (*this)(Jet(b2), Jet(s)).value(); }

PhiJet PhiSpec::jet(double b2, double s) const {
  const auto p = partials(Jet(b2), Jet(s));
  return {p.phi.value(), p.phi1.value(), p.phi2.value(), p.phi11.value(), p.phi12.value(), p.phi22.value()};
}

PhiPartials PhiSpec::partials(const Jet& b2, const Jet& s) const {
  int m = 0, p = kMaxJetOrder;
  bool any = false;
  for (const Jet* j : {&b2, &s}) {
    if (j->is_constant()) continue;
    if (any && j->nvars() != m) throw InvalidInput("phi partials: arguments live in different jet spaces");
    m = j->nvars();
    p = std::min(p, j->order());
    any = true;
  }
  if (!any) p = 0;
  if (p + 2 > kMaxJetOrder) throw InvalidInput("phi partials: argument order must be <= 2");
  if (m + 2 > kMaxJetVars) throw InvalidInput("phi partials: too many variables");

  const auto space = JetSpace::get(m + 2, p + 2);
  std::vector<int> map(m);
  std::iota(map.begin(), map.end(), 0);
  auto lift = [&](const Jet& j, int var) {
    const Jet base = j.is_constant() ? Jet::constant(space, j.value()) : embed(j.truncated(p), space, map);
    return base + Jet::variable(space, var, 0.0);
  };
  const Jet f = (*this)(lift(b2, m), lift(s, m + 1));
  if (f.is_constant()) {
    return {f, Jet(0.0), Jet(0.0), Jet(0.0), Jet(0.0), Jet(0.0)};
  }
  const Jet f1 = f.partial(m), f2 = f.partial(m + 1);
  const Jet f11 = f1.partial(m), f12 = f1.partial(m + 1), f22 = f2.partial(m + 1);
  auto back = [&](const Jet& j) { return restrict_vars(j, map).truncated(p); };
  return {back(f), back(f1), back(f2), back(f11), back(f12), back(f22)};
}

PhiSpec PhiSpec::with_domain(PhiDomain d) const {
  return PhiSpec(family_, params_, eval_, d, formula_, claims_regular_);
}

PhiSpec PhiSpec::renamed(std::string family, std::string formula) const {
  return PhiSpec(std::move(family), params_, eval_, domain_, std::move(formula), claims_regular_);
}

PhiDomain discover_domain(const PhiSpec::Eval& eval, PhiDomain rect) {
  constexpr int kProbe = 21;
  auto ok = [&](const PhiDomain& d) {
    for (int i = 0; i < kProbe; ++i) {
      const double b2 = d.b2_lo + (d.b2_hi - d.b2_lo) * i / (kProbe - 1);
      const double b = std::sqrt(b2) * (1.0 - kDomainMargin);
      for (int j = 0; j < kProbe; ++j) {
        const double s = b * (-1.0 + 2.0 * j / (kProbe - 1));
        try {
          const double v = eval(Jet(b2), Jet(s)).value();
          if (!(v > 0.0) || !std::isfinite(v)) return false;
        } catch (const DomainError&) {
          return false;
        }
      }
    }
    return true;
  };
  PhiDomain d = rect;
  for (int it = 0; it < 60; ++it) {
    if (!(d.b2_hi >= d.b2_lo)) break;
    if (ok(d)) return d;
    d.b2_hi = d.b2_lo + 0.9 * (d.b2_hi - d.b2_lo);
  }
  throw InvalidInput("phi: empty domain (phi not positive near b2 = " + fmt(rect.b2_lo) + ")");
}

// ---------------------------------------------------------------- families

PhiSpec riemannian_phi(double value) {
  if (!(value > 0)) throw InvalidInput("riemannian phi: value must be positive");
  auto eval = [value](const Jet&, const Jet&) { return Jet(value); };
  return PhiSpec("riemannian", {{"value", value}}, eval, {0.0, 1e6}, "phi = " + fmt(value), true);
}

PhiSpec randers_phi() {
  auto eval = [](const Jet& b2, const Jet& s) {
    const Jet d = 1.0 - b2;
    return (sqrt(d + s * s) + s) / d;
  };
  return PhiSpec("randers", {}, eval, {0.0, 1.0 - kDomainMargin},
                 "phi = sqrt(1-b2+s^2)/(1-b2) + s/(1-b2)", true);
}

PhiSpec square_phi() {
  auto eval = [](const Jet& b2, const Jet& s) {
    const Jet d = 1.0 - b2;
    const Jet r = sqrt(d + s * s);
    const Jet t = r + s;
    return t * t / (d * d * r);
  };
  return PhiSpec("square", {}, eval, {0.0, 1.0 - kDomainMargin},
                 "phi = (sqrt(1-b2+s^2)+s)^2 / ((1-b2)^2 sqrt(1-b2+s^2))", true);
}

PhiSpec custom_phi(std::string name, PhiSpec::Eval eval, PhiDomain domain, std::string formula) {
  return PhiSpec(std::move(name), {}, std::move(eval), domain, std::move(formula), false);
}

PhiSpec perturbed_phi(const PhiSpec& phi, double eps) {
  const PhiSpec::Eval base = phi.closure();
  auto eval = [base, eps](const Jet& b2, const Jet& s) { return base(b2, s) + eps * s * s * s; };
  auto params = phi.params();
  params["eps"] = eps;
  return PhiSpec(phi.family() + "+eps*s^3", params, eval, phi.domain(), phi.formula() + " + eps s^3", false);
}

Jet PhiBar::operator()(const Jet& s) const {
  if (!(s.value() >= lo - kSlack && s.value() <= hi + kSlack))
    throw DomainError("phibar '" + label + "' evaluated outside [" + fmt(lo) + ", " + fmt(hi) + "] at " +
                          fmt(s.value()),
                      {s.value()});
  return eval(s);
}

double PhiBar::operator()(double s) const { return (*this)(Jet(s)).value(); }

PhiBar phibar_polynomial(std::vector<double> coeffs) {
  if (coeffs.empty()) throw InvalidInput("phibar polynomial: no coefficients");
  std::ostringstream os;
  for (std::size_t k = 0; k < coeffs.size(); ++k) {
    if (k) os << " + ";
    os << coeffs[k];
    if (k) os << " s^" << k;
  }
  auto eval = [coeffs](const Jet& s) {
    Jet r(coeffs.back());
    for (std::size_t k = coeffs.size() - 1; k-- > 0;) r = r * s + coeffs[k];
    return r;
  };
  return PhiBar{os.str(), eval};
}

PhiSpec berwald_phi(const PhiBar& phibar, double b2_lo, double b2_hi) {
  if (!(b2_lo > 0)) throw InvalidInput("berwald phi: b^2 must stay away from 0");
  auto eval = [phibar](const Jet& b2, const Jet& s) {
    const Jet b = sqrt(b2);
    return phibar(s / b) / b;
  };
  PhiDomain d = discover_domain(eval, {b2_lo, b2_hi});
  return PhiSpec("berwald", {}, eval, d, "phi = phibar(s/b)/b, phibar = " + phibar.label, false);
}

// ----------------------------------------------------------- grids

PhiGrid tensor_grid(const PhiDomain& d, int nb, int ns, double s_frac) {
  if (nb < 1 || ns < 1) throw InvalidInput("grid: sizes must be positive");
  PhiGrid g;
  g.nodes.reserve(static_cast<std::size_t>(nb) * ns);
  for (int i = 0; i < nb; ++i) {
    const double b2 = nb == 1 ? d.b2_lo : d.b2_lo + (d.b2_hi - d.b2_lo) * i / (nb - 1);
    const double b = std::sqrt(b2) * s_frac;
    for (int j = 0; j < ns; ++j) {
      const double s = ns == 1 ? 0.0 : b * (-1.0 + 2.0 * j / (ns - 1));
      g.nodes.emplace_back(b2, s);
    }
  }
  return g;
}

PhiGrid interior_points(const PhiDomain& d, int count, std::uint64_t seed, double s_frac) {
  PhiGrid g;
  SobolSampler q(2, seed);
  for (int k = 0; k < count; ++k) {
    const auto u = q.next();
    const double b2 = d.b2_lo + (d.b2_hi - d.b2_lo) * u[0];
    g.nodes.emplace_back(b2, std::sqrt(b2) * s_frac * (2.0 * u[1] - 1.0));
  }
  return g;
}

PhiDomain safe_domain(const PhiDomain& d, double frac) {
  if (!(frac > 0.0 && frac <= 1.0)) throw InvalidInput("safe domain: fraction must be in (0, 1]");
  return {d.b2_lo, d.b2_lo + frac * (d.b2_hi - d.b2_lo)};
}

PhiGrid merge(PhiGrid a, const PhiGrid& b) {
  a.nodes.insert(a.nodes.end(), b.nodes.begin(), b.nodes.end());
  return a;
}

RegularityReport regularity_check(const PhiSpec& phi, const PhiGrid& grid) {
  RegularityReport r;
  bool first = true;
  for (const auto& [b2, s] : grid.nodes) {
    const PhiJet j = phi.jet(b2, s);
    const double v1 = j.phi - s * j.phi2;
    const double v2 = v1 + (b2 - s * s) * j.phi22;
    if (first || v1 < r.min_v1) r.min_v1 = v1;
    if (first || v2 < r.min_v2) r.min_v2 = v2;
    const bool bad = !(v1 > 0.0) || !(v2 > 0.0);
    if (bad && r.pass) {
      r.pass = false;
      r.b2 = b2;
      r.s = s;
      r.v1 = v1;
      r.v2 = v2;
    } else if (r.pass && (first || std::min(v1, v2) < std::min(r.v1, r.v2))) {
      r.b2 = b2;
      r.s = s;
      r.v1 = v1;
      r.v2 = v2;
    }
    first = false;
  }
  return r;
}

}  // namespace gabm
