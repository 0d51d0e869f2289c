#include "gabm/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <sstream>

#include "gabm/deform.hpp"
#include "gabm/errors.hpp"
#include "gabm/gab.hpp"
#include "gabm/pde.hpp"
#include "gabm/sampling.hpp"
#include "gabm/taylor_ode.hpp"

namespace gabm {

namespace {

// ------------------------------------------------------------ json access

class Node {
 public:
  Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {
    if (!j.is_object()) throw ConfigError(path_, "expected an object");
  }

  void allow(std::initializer_list<std::string_view> keys) const {
    for (auto it = j_->begin(); it != j_->end(); ++it)
      if (std::find(keys.begin(), keys.end(), it.key()) == keys.end())
        throw ConfigError(sub(it.key()), "unknown key");
  }
  bool has(std::string_view k) const { return j_->contains(k); }
  std::string sub(std::string_view k) const { return path_ + "." + std::string(k); }
  const std::string& path() const { return path_; }
  const json& at(std::string_view k) const {
    if (!has(k)) throw ConfigError(sub(k), "missing required key");
    return j_->at(k);
  }

  double num(std::string_view k) const {
    const json& v = at(k);
    if (!v.is_number()) throw ConfigError(sub(k), "expected a number");
    return v.get<double>();
  }
  double num(std::string_view k, double def) const { return has(k) ? num(k) : def; }
  int integer(std::string_view k, int def, int min = 0) const {
    if (!has(k)) return def;
    const json& v = at(k);
    if (!v.is_number_integer() || v.get<long long>() < min)
      throw ConfigError(sub(k), "expected an integer >= " + std::to_string(min));
    return v.get<int>();
  }
  std::string str(std::string_view k) const {
    const json& v = at(k);
    if (!v.is_string()) throw ConfigError(sub(k), "expected a string");
    return v.get<std::string>();
  }
  std::string str(std::string_view k, const std::string& def) const { return has(k) ? str(k) : def; }
  std::vector<double> nums(std::string_view k) const {
    const json& v = at(k);
    if (!v.is_array()) throw ConfigError(sub(k), "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) throw ConfigError(sub(k) + "[" + std::to_string(i) + "]", "expected a number");
      out.push_back(v[i].get<double>());
    }
    return out;
  }
  Node child(std::string_view k) const { return Node(at(k), sub(k)); }

 private:
  const json* j_;
  std::string path_;
};

// ------------------------------------------------------------ construction

MetricField build_metric(const Node& n) {
  n.allow({"backend", "n", "curvature", "mu", "h0", "dh0", "hat", "hat_einstein", "box"});
  const std::string backend = n.str("backend");
  std::optional<MetricField> g;
  if (backend == "euclidean") {
    g = euclidean(n.integer("n", 3, 1));
  } else if (backend == "space_form") {
    g = space_form(n.integer("n", 3, 1), n.num("curvature"));
  } else if (backend == "warped") {
    g = make_warped(n.num("mu"), n.num("h0"), n.num("dh0"), build_metric(n.child("hat")), n.num("hat_einstein"))
            .metric;
  } else {
    throw ConfigError(n.sub("backend"), "unknown backend '" + backend + "' (euclidean, space_form, warped)");
  }
  if (n.has("box")) {
    const Node b = n.child("box");
    b.allow({"lo", "hi"});
    auto lo = b.nums("lo"), hi = b.nums("hi");
    if (static_cast<int>(lo.size()) != g->dim() || static_cast<int>(hi.size()) != g->dim())
      throw ConfigError(n.sub("box"), "lo/hi must have " + std::to_string(g->dim()) + " entries");
    g = g->with_box(std::move(lo), std::move(hi));
  }
  return *g;
}

OneFormField build_oneform(const Node& n, const MetricField& g) {
  n.allow({"kind", "c", "b"});
  const std::string kind = n.str("kind");
  if (kind == "radial") return radial_form(g, n.num("c"));
  if (kind == "constant") {
    auto b = n.nums("b");
    if (static_cast<int>(b.size()) != g.dim()) throw ConfigError(n.sub("b"), "dimension mismatch");
    return constant_form(g, std::move(b));
  }
  if (kind == "warped") return warped_form(g);
  throw ConfigError(n.sub("kind"), "unknown one-form '" + kind + "' (radial, constant, warped)");
}

PhiBar build_phibar(const Node& n, std::optional<std::array<double, 3>> ks) {
  n.allow({"polynomial", "ode"});
  if (n.has("polynomial")) return phibar_polynomial(n.nums("polynomial"));
  if (n.has("ode")) {
    if (!ks) throw ConfigError(n.sub("ode"), "the ODE profile is only available for the projflat family");
    const Node o = n.child("ode");
    o.allow({"phi0", "dphi0", "lo", "hi", "order"});
    return ode_ft_solve((*ks)[0], (*ks)[1], (*ks)[2], o.num("phi0"), o.num("dphi0"), o.num("lo", -1.0),
                        o.num("hi", 1.0), o.integer("order", 30, 2))
        .as_phibar();
  }
  throw ConfigError(n.path(), "expected 'polynomial' or 'ode'");
}

QRoot qroot_from(const Node& n) {
  const std::string r = n.str("root", "auto");
  if (r == "auto") return QRoot::automatic;
  if (r == "small") return QRoot::small;
  if (r == "large") return QRoot::large;
  throw ConfigError(n.sub("root"), "expected auto, small or large");
}

DeformDirection direction_from(const Node& n) {
  const std::string d = n.str("direction");
  if (d == "forward") return DeformDirection::forward;
  if (d == "inverse") return DeformDirection::inverse;
  throw ConfigError(n.sub("direction"), "expected forward or inverse");
}

PhiSpec build_phi(const Node& n) {
  n.allow({"family", "value", "sigma", "C", "D", "branch", "signs", "root", "b2_cap", "k1", "k2", "k3", "eta0",
           "phibar", "b2_lo", "b2_hi", "deform", "perturb"});
  const std::string family = n.str("family");
  std::optional<PhiSpec> phi;
  if (family == "riemannian") {
    phi = riemannian_phi(n.num("value", 1.0));
  } else if (family == "randers") {
    phi = randers_phi();
  } else if (family == "square") {
    phi = square_phi();
  } else if (family == "solution") {
    SolutionOptions opt;
    if (n.has("signs"))
      for (double v : n.nums("signs")) opt.signs.push_back(v < 0 ? -1 : 1);
    opt.root = qroot_from(n);
    opt.b2_cap = n.num("b2_cap", 1.0);
    SolutionBranch branch;
    try {
      branch = solution_branch_from_string(n.str("branch"));
    } catch (const InvalidInput& e) {
      throw ConfigError(n.sub("branch"), e.what());
    }
    phi = solution_family(n.num("sigma"), n.num("C"), n.num("D", 0.0), branch, opt);
  } else if (family == "projflat") {
    const std::array<double, 3> ks{n.num("k1"), n.num("k2"), n.num("k3")};
    phi = projflat_phi(ks[0], ks[1], ks[2], build_phibar(n.child("phibar"), ks), n.num("eta0", 1.0),
                       n.num("b2_cap", 1.0));
  } else if (family == "berwald") {
    phi = berwald_phi(build_phibar(n.child("phibar"), std::nullopt), n.num("b2_lo", 1e-2), n.num("b2_hi", 4.0));
  } else {
    throw ConfigError(n.sub("family"), "unknown family '" + family + "' (see list-families)");
  }
  if (n.has("deform")) {
    const Node d = n.child("deform");
    d.allow({"mu", "kappa", "K", "direction"});
    phi = deform_phi(*phi, d.num("mu"), d.num("kappa"), d.num("K"), direction_from(d));
  }
  if (n.has("perturb")) phi = perturbed_phi(*phi, n.num("perturb"));
  return *phi;
}

// ------------------------------------------------------------ run state

const std::map<std::string, double, std::less<>>& default_tolerances() {
  static const std::map<std::string, double, std::less<>> t{
      {"pde1", 1e-9},
      {"pde2", 1e-9},
      {"regularity", 0.0},
      {"einstein", 1e-5},
      {"spray_identity", 1e-8},
      {"projective", 1e-9},
      {"projective.factor", 1e-9},
      {"douglas", 1e-8},
      {"douglas.h", 1e-8},
      {"berwald", 1e-6},
      {"riemannian", 1e-8},
      {"warped.ricci_alpha", 1e-5},
      {"warped.conformal", 1e-8},
      {"warped.c_factor", 1e-8},
      {"warped.kappa", 1e-10},
      {"deform.ricci_bar", 1e-5},
      {"deform.conformal", 1e-8},
      {"deform.c_bar", 1e-8},
      {"deform.kappa_mu", 1e-12},
      {"deform.round_trip", 1e-12},
      {"deform.unit_norm", 1e-12},
      {"deform.parallel", 1e-8},
      {"phi_deform.F_invariance", 1e-10},
      {"phi_deform.round_trip", 1e-10},
      {"phi_deform.output_residual", 1e-9},
      {"perturbation.pde1", 0.1},
      {"perturbation.pde2", 0.1},
      {"perturbation.einstein", 0.1},
  };
  return t;
}

const std::map<std::string, std::string, std::less<>>& references() {
  static const std::map<std::string, std::string, std::less<>> r{
      {"pde1", "phi_22 = 2 (phi_1 - s phi_12)"},
      {"pde2", "(kappa - mu b^2)[psi^2 - (psi_2 + 2 s psi_1)] + mu s psi + mu = K phi^2"},
      {"regularity", "phi - s phi_2 > 0 and phi - s phi_2 + (b^2 - s^2) phi_22 > 0"},
      {"einstein", "Ric = (n-1) K F^2"},
      {"spray_identity", "closed spray formula = spray of F^2"},
      {"projective", "Q^i parallel to y^i"},
      {"projective.factor", "P = c alpha psi"},
      {"douglas", "Douglas ratio is even quadratic in s"},
      {"douglas.h", "h1 = h2 = 0"},
      {"berwald", "d^3 G^i / dy^j dy^k dy^l = 0"},
      {"riemannian", "g_ij independent of y"},
      {"warped.ricci_alpha", "Ric_alpha = (n-1) mu alpha^2"},
      {"warped.conformal", "b_{i|j} = c a_ij"},
      {"warped.c_factor", "c = h'(t)"},
      {"warped.kappa", "c^2 + mu b^2 = kappa"},
      {"deform.ricci_bar", "Ric(abar) = 0"},
      {"deform.conformal", "bbar_{i|j} = cbar abar_ij"},
      {"deform.c_bar", "cbar^2 = |mu|"},
      {"deform.kappa_mu", "(kappa - mu b^2)(1/kappa + bbar^2/mu) = 1"},
      {"deform.round_trip", "inverse(deform(alpha, beta)) = (alpha, beta)"},
      {"deform.unit_norm", "bbar = 1"},
      {"deform.parallel", "bbar_{i|j} = 0"},
      {"phi_deform.F_invariance", "alpha phi(b^2, beta/alpha) = abar phibar(bbar^2, betabar/abar)"},
      {"phi_deform.round_trip", "forward(inverse(phibar)) = phibar"},
      {"phi_deform.output_residual", "deformed phi solves its system (kappa_bar = |mu|)"},
      {"perturbation.pde1", "residual of phi + eps s^3 is linear in eps"},
      {"perturbation.pde2", "residual of phi + eps s^3 is linear in eps"},
      {"perturbation.einstein", "residual of phi + eps s^3 is linear in eps"},
  };
  return r;
}

struct PairDeform {
  DeformKind kind = DeformKind::mu;
  double mu = 0.0, kappa = 0.0;
};

struct Setup {
  std::string name;
  Exec exec = Exec::parallel;
  std::optional<MetricField> metric;
  std::optional<OneFormField> beta;
  std::optional<PhiSpec> phi;
  std::optional<json> phi_cfg;
  EinsteinContext ctx;
  std::optional<PairDeform> deform;
  std::uint64_t seed = 1;
  int points = 20;
  int nb = 31, ns = 31, interior = 100;
  std::optional<double> b2_max;
  std::vector<double> b2_slices;
  int s_points = 41;
  std::map<std::string, double, std::less<>> tolerances;

  std::optional<GabMetric> gab_;
  std::optional<Samples> samples_;

  const PhiSpec& need_phi(const std::string& check) const {
    if (!phi) throw ConfigError("$.phi", "check '" + check + "' needs a phi spec");
    return *phi;
  }
  const OneFormField& need_beta(const std::string& check) const {
    if (!beta) throw ConfigError("$.oneform", "check '" + check + "' needs a metric and a one-form");
    return *beta;
  }
  const GabMetric& gab(const std::string& check) {
    if (!gab_) gab_.emplace(need_beta(check), need_phi(check), ctx);
    return *gab_;
  }
  const Samples& samples(const std::string& check) {
    if (!samples_) samples_ = draw(gab(check), points);
    return *samples_;
  }
  Samples draw(const GabMetric& m, int count) const {
    try {
      return admissible_samples(m, count, seed);
    } catch (const InvalidInput& e) {
      throw DomainError(std::string("empty admissible domain: ") + e.what());
    }
  }

  PhiDomain verification_domain(const PhiSpec& p) const {
    PhiDomain d = safe_domain(p.domain());
    if (b2_max) d.b2_hi = std::min(d.b2_hi, *b2_max);
    if (!(d.b2_hi > d.b2_lo)) throw DomainError("empty verification domain for " + p.family(), {d.b2_lo, d.b2_hi});
    return d;
  }
  PhiGrid grid(const PhiSpec& p) const {
    const PhiDomain d = verification_domain(p);
    PhiGrid g = tensor_grid(d, nb, ns);
    if (interior > 0) g = merge(std::move(g), interior_points(d, interior, seed));
    return g;
  }
  double tol(const std::string& name, const json& entry_tol) const {
    if (entry_tol.is_number()) return entry_tol.get<double>();
    if (entry_tol.is_object() && entry_tol.contains(name)) return entry_tol.at(name).get<double>();
    if (auto it = tolerances.find(name); it != tolerances.end()) return it->second;
    return default_tolerances().at(name);
  }
};

struct Entry {
  std::string check;
  json tol;  // number, object or null
  bool expect_violation = false;
  std::string path;
  json raw;
};

CheckRecord make_record(const Setup& s, const Entry& e, const std::string& name, const std::vector<double>& values,
                        std::function<std::vector<double>(std::size_t)> witness = {}) {
  CheckRecord r;
  r.name = name;
  r.reference = references().at(name);
  r.samples = values.size();
  r.tol = s.tol(name, e.tol);
  r.expect_violation = e.expect_violation;
  if (!values.empty()) {
    std::size_t worst = 0;
    double sum = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i) {
      // NaN counts as the worst possible value
      if (!std::isnan(values[worst]) && (std::isnan(values[i]) || values[i] > values[worst])) worst = i;
      sum += values[i];
    }
    r.max = values[worst];
    r.mean = sum / static_cast<double>(values.size());
    if (witness) r.witness = witness(worst);
  }
  const bool within = !std::isnan(r.max) && r.max <= r.tol;
  r.pass = e.expect_violation ? (!within) : within;
  return r;
}

std::vector<double> xy(const std::pair<std::vector<double>, std::vector<double>>& p) {
  std::vector<double> w(p.first);
  w.insert(w.end(), p.second.begin(), p.second.end());
  return w;
}

// chart points with a direction, Sobol in box x [-1, 1]^n
Samples chart_pairs(const MetricField& g, int count, std::uint64_t seed) {
  const int n = g.dim();
  SobolSampler q(2 * n, seed);
  std::vector<double> lo(g.box_lo()), hi(g.box_hi());
  lo.insert(lo.end(), n, -1.0);
  hi.insert(hi.end(), n, 1.0);
  Samples out;
  for (long k = 0; k < 200L * count && static_cast<int>(out.size()) < count; ++k) {
    const auto p = q.next(lo, hi);
    std::vector<double> x(p.begin(), p.begin() + n), y(p.begin() + n, p.end());
    if (!g.contains(x) || !(alpha2(g, x, y) > 1e-6)) continue;
    out.emplace_back(std::move(x), std::move(y));
  }
  if (static_cast<int>(out.size()) < count) throw DomainError("chart has too few sample points for " + g.label());
  return out;
}

std::vector<std::vector<double>> xs_of(const Samples& s) {
  std::vector<std::vector<double>> xs;
  for (const auto& p : s) xs.push_back(p.first);
  return xs;
}

// ------------------------------------------------------------ checks

double pde_scale(const PhiSpec& phi, double K, double b2, double s) {
  const double v = phi(b2, s);
  return std::max(1.0, std::abs(K * v * v));
}

std::vector<double> pde_values(const Setup& s, const PhiSpec& phi, const PhiGrid& g, bool second,
                               const EinsteinContext& ctx) {
  return evaluate_all(
      g.nodes.size(),
      [&](std::size_t i) {
        const auto [b2, sv] = g.nodes[i];
        const double r = second ? pde2_residual(phi, ctx.mu, ctx.kappa, ctx.K, b2, sv) : pde1_residual(phi, b2, sv);
        return std::abs(r) / pde_scale(phi, ctx.K, b2, sv);
      },
      s.exec);
}

std::vector<CheckRecord> check_pde(Setup& s, const Entry& e, bool second) {
  const PhiSpec& phi = s.need_phi(e.check);
  const PhiGrid g = s.grid(phi);
  const auto v = pde_values(s, phi, g, second, s.ctx);
  return {make_record(s, e, e.check, v, [&](std::size_t i) {
    return std::vector<double>{g.nodes[i].first, g.nodes[i].second};
  })};
}

std::vector<CheckRecord> check_regularity(Setup& s, const Entry& e) {
  const PhiSpec& phi = s.need_phi(e.check);
  const RegularityReport rep = regularity_check(phi, s.grid(phi));
  CheckRecord r = make_record(s, e, "regularity", {-std::min(rep.min_v1, rep.min_v2)});
  r.samples = s.grid(phi).nodes.size();
  r.pass = rep.pass != e.expect_violation;
  r.witness = {rep.b2, rep.s, rep.v1, rep.v2};
  return {r};
}

std::vector<CheckRecord> check_einstein(Setup& s, const Entry& e) {
  const Node n(e.raw, e.path);
  const RicciRoute route = ricci_route_from_string(n.str("route", "direct"));
  const double K = n.num("K", s.ctx.K);
  const GabMetric& m = s.gab(e.check);
  const Samples& smp = s.samples(e.check);
  const EinsteinReport rep = einstein_residual(m, K, smp, route, s.exec);
  CheckRecord r = make_record(s, e, "einstein", rep.residual, [&](std::size_t i) { return xy(smp[i]); });
  r.fd_error = rep.error.empty() ? 0.0 : *std::max_element(rep.error.begin(), rep.error.end());
  return {r};
}

std::vector<CheckRecord> check_spray(Setup& s, const Entry& e) {
  const GabMetric& m = s.gab(e.check);
  const Samples& smp = s.samples(e.check);
  const auto v = evaluate_all(
      smp.size(),
      [&](std::size_t i) {
        const auto& [x, y] = smp[i];
        const SprayData a = spray_formula(m, x, y), d = spray_direct(m, x, y);
        const double f = F(m, x, y);
        return (a.G - d.G).norm() / std::max(d.G.norm(), f * f);
      },
      s.exec);
  return {make_record(s, e, "spray_identity", v, [&](std::size_t i) { return xy(smp[i]); })};
}

std::vector<CheckRecord> check_projective(Setup& s, const Entry& e) {
  const GabMetric& m = s.gab(e.check);
  const Samples& smp = s.samples(e.check);
  const ProjectiveReport rep = projective_check(m, smp, s.tol("projective", e.tol), s.exec);
  CheckRecord a = make_record(s, e, "projective", {rep.max_defect});
  CheckRecord b = make_record(s, e, "projective.factor", {rep.max_factor_defect});
  a.samples = b.samples = smp.size();
  a.witness = b.witness = xy(smp[rep.witness]);
  return {a, b};
}

std::vector<CheckRecord> check_douglas(Setup& s, const Entry& e) {
  const PhiSpec& phi = s.need_phi(e.check);
  std::vector<double> slices = s.b2_slices;
  if (slices.empty()) {
    const PhiDomain d = s.verification_domain(phi);
    for (int k = 0; k < 5; ++k) slices.push_back(d.b2_lo + (d.b2_hi - d.b2_lo) * (0.1 + 0.2 * k));
  }
  const DouglasReport rep = douglas_check(phi, slices, s.s_points, s.tol("douglas", e.tol));
  std::vector<double> fit, h;
  for (const auto& sl : rep.slices) {
    fit.push_back(std::max({sl.fit_residual, std::abs(sl.coeff[1]), std::abs(sl.coeff[3]), std::abs(sl.coeff[4])}));
    h.push_back(std::max(std::abs(sl.h1), std::abs(sl.h2)));
  }
  const auto slice = [&](std::size_t i) { return std::vector<double>{rep.slices[i].b2}; };
  return {make_record(s, e, "douglas", fit, slice), make_record(s, e, "douglas.h", h, slice)};
}

std::vector<CheckRecord> check_berwald(Setup& s, const Entry& e) {
  const GabMetric& m = s.gab(e.check);
  const Samples& smp = s.samples(e.check);
  const BerwaldReport rep = berwald_check(m, smp, s.tol("berwald", e.tol), s.exec);
  CheckRecord r = make_record(s, e, "berwald", {rep.max_third});
  r.samples = smp.size();
  r.witness = xy(smp[rep.witness]);
  return {r};
}

std::vector<CheckRecord> check_riemannian(Setup& s, const Entry& e) {
  const GabMetric& m = s.gab(e.check);
  const Samples& smp = s.samples(e.check);
  const auto v = evaluate_all(
      smp.size(),
      [&](std::size_t i) {
        const auto& [x, y] = smp[i];
        const Eigen::MatrixXd g0 = fundamental_tensor(m, x, y);
        std::vector<std::vector<double>> others{y, y, y};
        for (auto& c : others[0]) c = -c;
        std::rotate(others[1].begin(), others[1].begin() + 1, others[1].end());
        others[2][0] += 0.5;
        double worst = 0.0;
        for (const auto& yo : others) {
          if (!(alpha2(m.alpha(), x, yo) > 1e-6)) continue;
          worst = std::max(worst, (fundamental_tensor(m, x, yo) - g0).norm() / g0.norm());
        }
        return worst;
      },
      s.exec);
  return {make_record(s, e, "riemannian", v, [&](std::size_t i) { return xy(smp[i]); })};
}

std::vector<CheckRecord> check_warped(Setup& s, const Entry& e) {
  const OneFormField& beta = s.need_beta(e.check);
  const MetricField& g = beta.metric();
  if (!g.warp()) throw ConfigError("$.metric.backend", "check 'warped' needs the warped backend");
  const WarpParams& wp = *g.warp();
  const Samples pts = chart_pairs(g, s.points, s.seed);
  const int n = g.dim();
  const auto ric = evaluate_all(
      pts.size(), [&](std::size_t i) { return ricci_alpha(g, pts[i].first, pts[i].second); }, s.exec);
  std::vector<double> rv, err;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double a2 = alpha2(g, pts[i].first, pts[i].second);
    rv.push_back(std::abs(ric[i].value - (n - 1) * wp.mu * a2) / a2);
    err.push_back(ric[i].error / a2);
  }
  const auto xs = xs_of(pts);
  const ConformalReport cr = conformal_check(beta, xs, s.tol("warped.conformal", e.tol));
  std::vector<double> cf, kd;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    cf.push_back(std::abs(cr.c[i] - wp.dh(xs[i][0])));
    kd.push_back(std::abs(cr.c[i] * cr.c[i] + wp.mu * beta.norm2(xs[i]) - wp.kappa));
  }
  const auto wx = [&](std::size_t i) { return xs[i]; };
  CheckRecord r = make_record(s, e, "warped.ricci_alpha", rv, [&](std::size_t i) { return xy(pts[i]); });
  r.fd_error = *std::max_element(err.begin(), err.end());
  return {r, make_record(s, e, "warped.conformal", cr.residual, wx), make_record(s, e, "warped.c_factor", cf, wx),
          make_record(s, e, "warped.kappa", kd, wx)};
}

std::vector<double> ricci_flat_values(const Setup& s, const MetricField& g, const Samples& pts) {
  return evaluate_all(
      pts.size(),
      [&](std::size_t i) {
        return std::abs(ricci_alpha(g, pts[i].first, pts[i].second).value) / alpha2(g, pts[i].first, pts[i].second);
      },
      s.exec);
}

const PairDeform& need_deform(const Setup& s, const std::string& check) {
  if (!s.deform) throw ConfigError("$.deform", "check '" + check + "' needs a deform block");
  return *s.deform;
}

std::vector<CheckRecord> check_pair_deformation(Setup& s, const Entry& e) {
  const OneFormField& beta = s.need_beta(e.check);
  const PairDeform& d = need_deform(s, e.check);
  const Node n(e.raw, e.path);
  const int id_points = n.integer("identity_points", 100, 1);
  DeformOptions opt;
  opt.seed = s.seed;
  const DeformedPair p = d.kind == DeformKind::mu ? deform_mu(beta, d.mu, d.kappa, opt) : deform_kzero(beta, d.mu, opt);
  const MetricField& gb = p.alpha_bar();
  const Samples pts = chart_pairs(gb, s.points, s.seed);
  const auto xs = xs_of(pts);
  const auto wx = [&](std::size_t i) { return xs[i]; };
  std::vector<CheckRecord> out;
  out.push_back(make_record(s, e, "deform.ricci_bar", ricci_flat_values(s, gb, pts),
                            [&](std::size_t i) { return xy(pts[i]); }));
  const ConformalReport cr = conformal_check(p.beta_bar, xs, s.tol("deform.conformal", e.tol));
  const auto many = xs_of(chart_pairs(gb, id_points, s.seed + 1));
  const auto wm = [&](std::size_t i) { return many[i]; };
  if (d.kind == DeformKind::mu) {
    std::vector<double> cb, km, rt;
    for (double c : cr.c) cb.push_back(std::abs(c * c - std::abs(d.mu)));
    const OneFormField back = deform_mu_inverse(p);
    for (const auto& x : many) {
      const double D = d.kappa - d.mu * beta.norm2(x);
      km.push_back(std::abs(D * (1.0 / d.kappa + p.b2_bar(x) / d.mu) - 1.0));
      const Eigen::MatrixXd a = beta.metric().eval(x);
      const Eigen::VectorXd b = beta.eval(x);
      rt.push_back(std::max((back.metric().eval(x) - a).cwiseAbs().maxCoeff() / std::max(1.0, a.cwiseAbs().maxCoeff()),
                            (back.eval(x) - b).cwiseAbs().maxCoeff() / std::max(1.0, b.cwiseAbs().maxCoeff())));
    }
    out.push_back(make_record(s, e, "deform.conformal", cr.residual, wx));
    out.push_back(make_record(s, e, "deform.c_bar", cb, wx));
    out.push_back(make_record(s, e, "deform.kappa_mu", km, wm));
    out.push_back(make_record(s, e, "deform.round_trip", rt, wm));
  } else {
    std::vector<double> un, par;
    for (const auto& x : many) un.push_back(std::abs(std::sqrt(p.b2_bar(x)) - 1.0));
    for (const auto& x : xs) par.push_back(covariant_derivative(p.beta_bar, x).cwiseAbs().maxCoeff());
    out.push_back(make_record(s, e, "deform.unit_norm", un, wm));
    out.push_back(make_record(s, e, "deform.parallel", par, wx));
  }
  return out;
}

std::vector<CheckRecord> check_phi_deformation(Setup& s, const Entry& e) {
  const OneFormField& beta = s.need_beta(e.check);
  const PairDeform& d = need_deform(s, e.check);
  if (d.kind != DeformKind::mu) throw ConfigError("$.deform.kind", "phi_deformation needs kind 'mu'");
  if (s.phi_cfg && s.phi_cfg->contains("deform"))
    throw ConfigError("$.phi.deform", "phi_deformation takes the undeformed phibar as $.phi");
  const PhiSpec& bar = s.need_phi(e.check);
  const double K = s.ctx.K, kb = std::abs(d.mu);
  DeformOptions opt;
  opt.seed = s.seed;
  const DeformedPair p = deform_mu(beta, d.mu, d.kappa, opt);
  const PhiSpec phi = deform_phi(bar, d.mu, d.kappa, K, DeformDirection::inverse);
  const PhiSpec back = deform_phi(phi, d.mu, d.kappa, K, DeformDirection::forward);
  const GabMetric m(beta, phi), mb(p.beta_bar, bar);
  const Samples smp = s.draw(m, std::max(s.points, 100));
  const auto fi = evaluate_all(
      smp.size(),
      [&](std::size_t i) {
        const double f = F(m, smp[i].first, smp[i].second);
        return std::abs(F(mb, smp[i].first, smp[i].second) - f) / f;
      },
      s.exec);
  const PhiGrid gb = s.grid(back);
  std::vector<double> rt;
  for (const auto& [b2, sv] : gb.nodes) rt.push_back(std::abs(back(b2, sv) - bar(b2, sv)) / std::abs(bar(b2, sv)));
  // forward output against the normalized system, inverse output against the original one
  const EinsteinContext norm{0.0, kb, K}, orig{d.mu, d.kappa, K};
  auto r1 = pde_values(s, back, gb, false, norm), r2 = pde_values(s, back, gb, true, norm);
  const PhiGrid gp = s.grid(phi);
  auto r3 = pde_values(s, phi, gp, false, orig), r4 = pde_values(s, phi, gp, true, orig);
  std::vector<double> res;
  for (std::size_t i = 0; i < r1.size(); ++i) res.push_back(std::max(r1[i], r2[i]));
  for (std::size_t i = 0; i < r3.size(); ++i) res.push_back(std::max(r3[i], r4[i]));
  return {make_record(s, e, "phi_deform.F_invariance", fi, [&](std::size_t i) { return xy(smp[i]); }),
          make_record(s, e, "phi_deform.round_trip", rt,
                      [&](std::size_t i) { return std::vector<double>{gb.nodes[i].first, gb.nodes[i].second}; }),
          make_record(s, e, "phi_deform.output_residual", res)};
}

std::vector<CheckRecord> check_perturbation(Setup& s, const Entry& e) {
  const Node n(e.raw, e.path);
  std::vector<double> eps{1e-4, 1e-3, 1e-2};
  if (n.has("eps")) eps = n.nums("eps");
  if (eps.size() < 2) throw ConfigError(n.sub("eps"), "need at least two values");
  std::vector<std::string> qs{"pde1", "pde2", "einstein"};
  if (n.has("quantities")) {
    qs.clear();
    for (const auto& q : n.at("quantities")) qs.push_back(q.get<std::string>());
  }
  const PhiSpec& phi = s.need_phi(e.check);
  std::vector<CheckRecord> out;
  for (const auto& q : qs) {
    std::vector<double> r;
    for (double ep : eps) {
      const PhiSpec pp = perturbed_phi(phi, ep);
      if (q == "pde1" || q == "pde2") {
        const auto v = pde_values(s, pp, s.grid(phi), q == "pde2", s.ctx);
        r.push_back(*std::max_element(v.begin(), v.end()));
      } else if (q == "einstein") {
        const GabMetric m = s.gab(e.check).with_phi(pp);
        r.push_back(einstein_residual(m, s.ctx.K, s.samples(e.check), RicciRoute::direct, s.exec).max_residual);
      } else {
        throw ConfigError(n.sub("quantities"), "unknown quantity '" + q + "' (pde1, pde2, einstein)");
      }
    }
    std::vector<double> dev;
    for (std::size_t k = 0; k + 1 < r.size(); ++k) dev.push_back(std::abs((r[k + 1] / r[k]) / (eps[k + 1] / eps[k]) - 1.0));
    CheckRecord rec = make_record(s, e, "perturbation." + q, dev);
    rec.witness = r;
    out.push_back(rec);
  }
  return out;
}

using CheckFn = std::function<std::vector<CheckRecord>(Setup&, const Entry&)>;

const std::vector<std::pair<std::string, CheckFn>>& check_table() {
  static const std::vector<std::pair<std::string, CheckFn>> t{
      {"pde1", [](Setup& s, const Entry& e) { return check_pde(s, e, false); }},
      {"pde2", [](Setup& s, const Entry& e) { return check_pde(s, e, true); }},
      {"regularity", check_regularity},
      {"einstein", check_einstein},
      {"spray_identity", check_spray},
      {"projective", check_projective},
      {"douglas", check_douglas},
      {"berwald", check_berwald},
      {"riemannian", check_riemannian},
      {"warped", check_warped},
      {"pair_deformation", check_pair_deformation},
      {"phi_deformation", check_phi_deformation},
      {"perturbation", check_perturbation},
  };
  return t;
}

Setup build_setup(const json& cfg, Exec exec) {
  const Node root(cfg, "$");
  root.allow({"name", "metric", "oneform", "phi", "context", "sampling", "tolerances", "checks", "deform", "output"});
  Setup s;
  s.exec = exec;
  s.name = root.str("name", "unnamed");
  if (root.has("context")) {
    const Node c = root.child("context");
    c.allow({"mu", "kappa", "K", "n", "claims"});
    s.ctx.mu = c.num("mu", 0.0);
    s.ctx.kappa = c.num("kappa", 0.0);
    s.ctx.K = c.num("K", 0.0);
    if (c.has("claims")) {
      for (const auto& v : c.at("claims")) {
        const std::string k = v.is_string() ? v.get<std::string>() : "";
        if (k == "aE") s.ctx.claims_aE = true;
        else if (k == "pde1") s.ctx.claims_pde1 = true;
        else if (k == "pde2") s.ctx.claims_pde2 = true;
        else throw ConfigError(c.sub("claims"), "claims are aE, pde1, pde2");
      }
    }
  }
  if (root.has("sampling")) {
    const Node c = root.child("sampling");
    c.allow({"seed", "points", "grid", "interior", "b2_max", "b2_slices", "s_points"});
    s.seed = static_cast<std::uint64_t>(c.integer("seed", 1, 0));
    s.points = c.integer("points", 20, 1);
    if (c.has("grid")) {
      const auto g = c.nums("grid");
      if (g.size() != 2 || g[0] < 2 || g[1] < 2) throw ConfigError(c.sub("grid"), "expected [nb, ns], both >= 2");
      s.nb = static_cast<int>(g[0]);
      s.ns = static_cast<int>(g[1]);
    }
    s.interior = c.integer("interior", 100, 0);
    if (c.has("b2_max")) s.b2_max = c.num("b2_max");
    if (c.has("b2_slices")) s.b2_slices = c.nums("b2_slices");
    s.s_points = c.integer("s_points", 41, 5);
  }
  if (root.has("tolerances")) {
    const Node t = root.child("tolerances");
    for (const auto& [k, v] : cfg.at("tolerances").items()) {
      if (!default_tolerances().contains(k)) throw ConfigError(t.sub(k), "unknown check name");
      s.tolerances[k] = t.num(k);
    }
  }
  if (root.has("deform")) {
    const Node d = root.child("deform");
    d.allow({"kind", "mu", "kappa"});
    PairDeform pd;
    const std::string kind = d.str("kind", "mu");
    if (kind == "mu") pd.kind = DeformKind::mu;
    else if (kind == "kzero") pd.kind = DeformKind::kzero;
    else throw ConfigError(d.sub("kind"), "expected mu or kzero");
    pd.mu = d.num("mu");
    pd.kappa = pd.kind == DeformKind::mu ? d.num("kappa") : 0.0;
    s.deform = pd;
  }
  if (root.has("output")) root.child("output").allow({"report", "csv"});
  if (root.has("metric")) s.metric = build_metric(root.child("metric"));
  if (root.has("oneform")) {
    if (!s.metric) throw ConfigError("$.oneform", "needs $.metric");
    s.beta = build_oneform(root.child("oneform"), *s.metric);
  }
  if (root.has("context") && cfg.at("context").contains("n") && s.metric &&
      Node(cfg.at("context"), "$.context").integer("n", 0) != s.metric->dim())
    throw ConfigError("$.context.n", "does not match the metric dimension");
  if (root.has("phi")) {
    s.phi_cfg = cfg.at("phi");
    s.phi = build_phi(root.child("phi"));
  }
  return s;
}

std::vector<Entry> parse_checks(const json& cfg) {
  std::vector<Entry> out;
  if (!cfg.contains("checks")) throw ConfigError("$.checks", "missing required key");
  const json& cs = cfg.at("checks");
  if (!cs.is_array()) throw ConfigError("$.checks", "expected an array");
  for (std::size_t i = 0; i < cs.size(); ++i) {
    const std::string path = "$.checks[" + std::to_string(i) + "]";
    Entry e;
    e.path = path;
    if (cs[i].is_string()) {
      e.check = cs[i].get<std::string>();
      e.raw = json::object();
    } else {
      const Node n(cs[i], path);
      n.allow({"check", "tol", "expect", "route", "K", "eps", "quantities", "identity_points"});
      e.check = n.str("check");
      e.raw = cs[i];
      if (n.has("tol")) e.tol = n.at("tol");
      const std::string ex = n.str("expect", "hold");
      if (ex != "hold" && ex != "violated") throw ConfigError(n.sub("expect"), "expected hold or violated");
      e.expect_violation = ex == "violated";
    }
    const auto& t = check_table();
    if (std::none_of(t.begin(), t.end(), [&](const auto& p) { return p.first == e.check; }))
      throw ConfigError(path, "unknown check '" + e.check + "'");
    out.push_back(std::move(e));
  }
  return out;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

// ------------------------------------------------------------ public

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::string config_hash(const json& cfg) { return hex64(fnv1a64(cfg.dump())); }

json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string(), "cannot open file");
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const std::size_t upto = std::min<std::size_t>(e.byte, text.size());
    const auto line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n');
    throw ConfigError(path.string() + ": line " + std::to_string(line), e.what());
  }
}

bool RunResult::pass() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckRecord& c) { return c.pass; });
}

json RunResult::to_json(bool with_timing) const {
  json j;
  j["name"] = name;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["pass"] = pass();
  j["checks"] = json::array();
  for (const auto& c : checks) {
    json r{{"check", c.name},        {"reference", c.reference}, {"samples", c.samples}, {"max", c.max},
           {"mean", c.mean},         {"tol", c.tol},             {"pass", c.pass},
           {"expect", c.expect_violation ? "violated" : "hold"}};
    if (c.fd_error) r["fd_error"] = *c.fd_error;
    if (!c.witness.empty()) r["witness"] = c.witness;
    j["checks"].push_back(std::move(r));
  }
  if (with_timing) j["meta"] = {{"wall_seconds", wall_seconds}};
  return j;
}

RunResult run_config(const json& cfg, Exec exec) {
  const auto t0 = std::chrono::steady_clock::now();
  Setup s = build_setup(cfg, exec);
  const auto entries = parse_checks(cfg);
  RunResult res;
  res.name = s.name;
  res.config_hash = config_hash(cfg);
  res.seed = s.seed;
  for (const auto& e : entries) {
    const auto& t = check_table();
    const auto it = std::find_if(t.begin(), t.end(), [&](const auto& p) { return p.first == e.check; });
    for (auto& r : it->second(s, e)) res.checks.push_back(std::move(r));
  }
  res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::vector<json> expand_scenario(const json& scenario) {
  if (!scenario.is_object()) throw ConfigError("$", "expected an object");
  if (!scenario.contains("cases")) return {scenario};
  const Node root(scenario, "$");
  root.allow({"name", "defaults", "cases"});
  const json defaults = scenario.value("defaults", json::object());
  const std::string name = root.str("name", "scenario");
  const json& cases = scenario.at("cases");
  if (!cases.is_array() || cases.empty()) throw ConfigError("$.cases", "expected a non-empty array");
  std::vector<json> out;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    json c = defaults;
    c.merge_patch(cases[i]);
    c["name"] = name + "/" + (cases[i].contains("name") ? cases[i]["name"].get<std::string>() : std::to_string(i));
    out.push_back(std::move(c));
  }
  return out;
}

void SweepTable::write_csv(std::ostream& os) const {
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';
  char buf[32];
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%.17g", r[i]);
      os << (i ? "," : "") << buf;
    }
    os << '\n';
  }
}

SweepTable sweep(const json& cfg, const std::string& quantity, std::optional<std::pair<int, int>> grid,
                 std::optional<int> points, Exec exec) {
  Setup s = build_setup(cfg, exec);
  if (grid) std::tie(s.nb, s.ns) = *grid;
  if (points) s.points = *points;
  SweepTable t;
  if (quantity == "pde1" || quantity == "pde2" || quantity == "regularity") {
    const PhiSpec& phi = s.need_phi(quantity);
    const PhiGrid g = s.grid(phi);
    if (quantity == "regularity") {
      t.header = {"b2", "s", "v1", "v2"};
      for (const auto& [b2, sv] : g.nodes) {
        const PhiJet j = phi.jet(b2, sv);
        const double v1 = j.phi - sv * j.phi2;
        t.rows.push_back({b2, sv, v1, v1 + (b2 - sv * sv) * j.phi22});
      }
    } else {
      t.header = {"b2", "s", "residual"};
      const auto v = pde_values(s, phi, g, quantity == "pde2", s.ctx);
      for (std::size_t i = 0; i < g.nodes.size(); ++i) t.rows.push_back({g.nodes[i].first, g.nodes[i].second, v[i]});
    }
    return t;
  }
  if (quantity != "einstein" && quantity != "spray")
    throw ConfigError("--quantity", "unknown quantity '" + quantity + "' (pde1, pde2, regularity, einstein, spray)");
  const GabMetric& m = s.gab(quantity);
  const Samples& smp = s.samples(quantity);
  const int n = m.dim();
  for (int i = 0; i < n; ++i) t.header.push_back("x" + std::to_string(i));
  for (int i = 0; i < n; ++i) t.header.push_back("y" + std::to_string(i));
  if (quantity == "einstein") {
    t.header.insert(t.header.end(), {"ric", "F2", "residual"});
    const auto ric = evaluate_all(
        smp.size(), [&](std::size_t i) { return ricci(m, smp[i].first, smp[i].second, RicciRoute::direct); }, exec);
    for (std::size_t i = 0; i < smp.size(); ++i) {
      const double f = F(m, smp[i].first, smp[i].second);
      auto row = xy(smp[i]);
      row.insert(row.end(), {ric[i].value, f * f, std::abs(ric[i].value - (n - 1) * s.ctx.K * f * f) / ((n - 1) * f * f)});
      t.rows.push_back(std::move(row));
    }
  } else {
    t.header.push_back("deviation");
    const auto v = evaluate_all(
        smp.size(),
        [&](std::size_t i) {
          const auto& [x, y] = smp[i];
          const double f = F(m, x, y);
          const Eigen::VectorXd d = spray_direct(m, x, y).G;
          return (spray_formula(m, x, y).G - d).norm() / std::max(d.norm(), f * f);
        },
        exec);
    for (std::size_t i = 0; i < smp.size(); ++i) {
      auto row = xy(smp[i]);
      row.push_back(v[i]);
      t.rows.push_back(std::move(row));
    }
  }
  return t;
}

std::string list_families() {
  std::ostringstream os;
  os << "phi families (\"phi\": {\"family\": ...}):\n"
     << "  riemannian(value)                       phi = value\n"
     << "  randers                                 phi = 1 + s\n"
     << "  square                                  phi = (1 + s)^2\n"
     << "  solution(sigma,C,D,branch)              non-constant solutions of the normalized system, sigma = K/kappa;\n"
     << "                                          branch in {sol03, qform, i, ii, iii, iv}; optional signs, root, b2_cap\n"
     << "  projflat(k1,k2,k3,phibar,eta0,b2_cap)   phi = eta(b^2) rho phibar(nu/rho), projectively flat family;\n"
     << "                                          phibar: {polynomial: [...]} or {ode: {phi0, dphi0, lo, hi}}\n"
     << "  berwald(phibar,b2_lo,b2_hi)             phi = phibar(s/b)/b; phibar: {polynomial: [...]}\n"
     << "phi modifiers:\n"
     << "  deform{mu,kappa,K,direction}            forward: phi -> phibar (kappa_bar = |mu|); inverse: phibar -> phi\n"
     << "  perturb(eps)                            phi + eps s^3\n"
     << "metric backends (\"metric\": {\"backend\": ...}):\n"
     << "  euclidean(n)                            a_ij = delta_ij\n"
     << "  space_form(n,curvature)                 a_ij = delta_ij / (1 + k|x|^2/4)^2\n"
     << "  warped(mu,h0,dh0,hat,hat_einstein)      dt^2 + h(t)^2 hat, h'' + mu h = 0\n"
     << "one-forms (\"oneform\": {\"kind\": ...}):\n"
     << "  radial(c)                               beta = c x.dx\n"
     << "  constant(b)                             beta = b_i dx^i\n"
     << "  warped                                  beta = h(t) dt\n"
     << "pair deformations (\"deform\": {\"kind\": ...}):\n"
     << "  mu(mu,kappa)                            abar^2 = |mu|/D (alpha^2 + mu/D beta^2), betabar = |mu|^1.5/D^1.5 beta\n"
     << "  kzero(mu)                               abar = alpha/b, betabar = beta/b^2\n"
     << "checks:\n";
  for (const auto& [name, fn] : check_table()) os << "  " << name << '\n';
  return os.str();
}

}  // namespace gabm
