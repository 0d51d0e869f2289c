#include <cmath>
#include <sstream>

#include "gabm/errors.hpp"
#include "gabm/phi.hpp"

namespace gabm {

namespace {

std::vector<std::vector<int>> sign_candidates(int count) {
  if (count == 1) return {{1}, {-1}};
  return {{1, 1}, {1, -1}, {-1, 1}, {-1, -1}};
}

struct Built {
  PhiSpec::Eval eval;
  std::string formula;
};

}  // namespace

const char* to_string(SolutionBranch b) {
  switch (b) {
    case SolutionBranch::sol03: return "sol03";
    case SolutionBranch::qform: return "qform";
    case SolutionBranch::i: return "i";
    case SolutionBranch::ii: return "ii";
    case SolutionBranch::iii: return "iii";
    case SolutionBranch::iv: return "iv";
  }
  return "?";
}

SolutionBranch solution_branch_from_string(const std::string& s) {
  for (auto b : {SolutionBranch::sol03, SolutionBranch::qform, SolutionBranch::i, SolutionBranch::ii,
                 SolutionBranch::iii, SolutionBranch::iv})
    if (s == to_string(b)) return b;
  throw InvalidInput("unknown solution branch '" + s + "' (expected sol03, qform, i, ii, iii or iv)");
}

Jet qform_q(double sigma, double C, double D, const Jet& u, QRoot root, int sign) {
  const Jet cu = C - u;
  Jet r;
  if (D == 0.0) {
    if (root == QRoot::large) throw InvalidInput("q-form: D = 0 has a single root");
    r = -sigma / cu;
  } else {
    const double d2 = D * D;
    const Jet disc = cu * cu + 4.0 * d2 * sigma;
    if (!(disc.value() > 0.0)) throw DomainError("q-form: discriminant not positive", {u.value(), disc.value()});
    const Jet sq = sqrt(disc);
    if (sigma < 0) {
      if (!(cu.value() > 0.0)) throw DomainError("q-form: both roots negative (C - u <= 0)", {u.value()});
      r = root == QRoot::large ? (cu + sq) / (2.0 * d2) : -2.0 * sigma / (cu + sq);
    } else if (sigma > 0) {
      // exactly one positive root; pick the cancellation-free expression
      r = cu.value() >= 0.0 ? (cu + sq) / (2.0 * d2) : -2.0 * sigma / (cu - sq);
    } else {
      if (root == QRoot::small) throw InvalidInput("q-form: sigma = 0 leaves only the root q^2 = (C - u)/D^2");
      r = cu / d2;
    }
  }
  if (!(r.value() > 0.0)) throw DomainError("q-form: q^2 not positive", {u.value(), r.value()});
  return static_cast<double>(sign) * sqrt(r);
}

PhiSpec solution_family(double sigma, double C, double D, SolutionBranch branch, const SolutionOptions& opt) {
  const double m = kDomainMargin;
  PhiDomain rect{0.0, opt.b2_cap};
  int nsigns = 1;
  std::function<Built(const std::vector<int>&)> build;

  auto need = [](bool cond, const char* what) {
    if (!cond) throw InvalidInput(std::string("solution family: ") + what);
  };

  switch (branch) {
    case SolutionBranch::sol03: {
      need(sigma < 0, "sol03 needs sigma < 0");
      need(C > m, "sol03 needs C > 0");
      rect.b2_hi = C - m;
      nsigns = 2;
      const double k = 1.0 / (2.0 * std::sqrt(-sigma));
      build = [=](const std::vector<int>& e) {
        const double e1 = e[0], e2 = e[1];
        auto eval = [=](const Jet& b2, const Jet& s) { return k / (e1 * sqrt(C - b2 + s * s) + e2 * s); };
        std::ostringstream f;
        f << "phi = 1/(2 sqrt(-sigma)) / (" << (e1 > 0 ? "+" : "-") << "sqrt(C-b2+s^2) " << (e2 > 0 ? "+" : "-")
          << " s)";
        return Built{eval, f.str()};
      };
      break;
    }
    case SolutionBranch::i: {
      need(D == 0.0, "branch i needs D = 0");
      need(sigma != 0.0, "branch i needs sigma != 0");
      if (sigma < 0) {
        need(C > m, "branch i with sigma < 0 needs C > 0");
        rect.b2_hi = C - m;
      } else {
        need(C < 0, "branch i with sigma > 0 needs C < 0");
      }
      build = [=](const std::vector<int>& e) {
        const double e1 = e[0];
        auto eval = [=](const Jet& b2, const Jet& s) { return e1 * sqrt(-(C - b2 + s * s) / sigma) / (C - b2); };
        return Built{eval, std::string("phi = ") + (e1 > 0 ? "+" : "-") + "sqrt(-(C-b2+s^2)/sigma)/(C-b2)"};
      };
      break;
    }
    case SolutionBranch::ii: {
      need(sigma == 0.0, "branch ii needs sigma = 0");
      need(D != 0.0, "branch ii needs D != 0");
      need(C > m, "branch ii needs C > 0");
      rect.b2_hi = C - m;
      build = [=](const std::vector<int>& e) {
        const double e1 = e[0];
        auto eval = [=](const Jet& b2, const Jet& s) {
          const Jet r = sqrt(C - b2 + s * s);
          const Jet t = r + e1 * s;
          return D / (r * t * t);
        };
        return Built{eval, std::string("phi = D / (sqrt(X) (sqrt(X) ") + (e1 > 0 ? "+" : "-") + " s)^2), X = C-b2+s^2"};
      };
      break;
    }
    case SolutionBranch::iii: {
      need(sigma < 0, "branch iii needs sigma < 0");
      need(D != 0.0, "branch iii needs D != 0");
      const double r = std::sqrt(-sigma);
      rect.b2_hi = C - 2.0 * r * std::abs(D) - m;
      need(rect.b2_hi > 0, "branch iii needs C > 2 sqrt(-sigma) |D|");
      nsigns = 2;
      build = [=](const std::vector<int>& e) {
        const double e1 = e[0], e2 = e[1];
        auto eval = [=](const Jet& b2, const Jet& s) {
          const Jet base = C - b2 + s * s;
          const Jet xp = base + 2.0 * r * D, xm = base - 2.0 * r * D;
          return (1.0 / (e1 * sqrt(xp) - s) - 1.0 / (e2 * sqrt(xm) - s)) / (2.0 * r);
        };
        std::ostringstream f;
        f << "phi = 1/(2 sqrt(-sigma)) (1/(" << (e1 > 0 ? "+" : "-") << "sqrt(X+) - s) - 1/("
          << (e2 > 0 ? "+" : "-") << "sqrt(X-) - s)), X+- = C +- 2 sqrt(-sigma) D - b2 + s^2";
        return Built{eval, f.str()};
      };
      break;
    }
    case SolutionBranch::iv: {
      need(sigma > 0, "branch iv needs sigma > 0");
      need(D != 0.0, "branch iv needs D != 0");
      const double rs = std::sqrt(sigma);
      const double Y = 2.0 * rs * D;
      build = [=](const std::vector<int>& e) {
        const double eps = e[0];
        // sqrt(z) = P + iQ for z = X + iY, principal branch, cancellation-free
        auto eval = [=](const Jet& b2, const Jet& s) {
          const Jet X = C - b2 + s * s;
          const Jet mod = sqrt(X * X + Y * Y);
          const Jet P = sqrt(0.5 * (mod + X));
          const Jet Q = Y / (2.0 * P);
          const Jet a = eps * P - s;
          return -eps * Q / (rs * (a * a + Q * Q));
        };
        return Built{eval, std::string("phi = Im(1/(") + (eps > 0 ? "+" : "-") +
                               "sqrt(C-b2+s^2 + 2i sqrt(sigma) D) - s)) / sqrt(sigma)"};
      };
      break;
    }
    case SolutionBranch::qform: {
      need(sigma != 0.0 || D != 0.0, "q-form needs sigma != 0 or D != 0");
      if (sigma < 0) {
        rect.b2_hi = C - 2.0 * std::abs(D) * std::sqrt(-sigma) - m;
        need(rect.b2_hi > 0, "q-form with sigma < 0 needs C > 2 |D| sqrt(-sigma)");
      } else if (sigma == 0) {
        need(C > m, "q-form with sigma = 0 needs C > 0");
        rect.b2_hi = C - m;
      } else {
        need(D != 0.0, "q-form with sigma > 0 needs D != 0");
      }
      const QRoot root = opt.root;
      build = [=](const std::vector<int>& e) {
        const int sign = e[0];
        auto eval = [=](const Jet& b2, const Jet& s) {
          const Jet u = b2 - s * s;
          const Jet q = qform_q(sigma, C, D, u, root, sign);
          const Jet w = D * q + s;
          return q / (q * q * w * w + sigma);
        };
        return Built{eval, "phi = q/(q^2 (D q + s)^2 + sigma), D^2 q^4 + (b2-s^2-C) q^2 - sigma = 0"};
      };
      break;
    }
  }
  need(rect.b2_hi > rect.b2_lo, "empty b^2 range");

  std::vector<int> signs = opt.signs;
  if (signs.empty()) {
    const double mid = 0.5 * (rect.b2_lo + rect.b2_hi);
    for (const auto& cand : sign_candidates(nsigns)) {
      try {
        if (build(cand).eval(Jet(mid), Jet(0.0)).value() > 0.0) {
          signs = cand;
          break;
        }
      } catch (const DomainError&) {
      }
    }
    if (signs.empty()) throw InvalidInput("solution family: no sign choice gives phi > 0");
  }
  if (static_cast<int>(signs.size()) != nsigns) throw InvalidInput("solution family: wrong number of signs");
  for (int e : signs)
    if (e != 1 && e != -1) throw InvalidInput("solution family: signs must be +1 or -1");

  Built b = build(signs);
  const PhiDomain d = discover_domain(b.eval, rect);
  PhiSpec::Params params{{"sigma", sigma}, {"C", C}, {"D", D}};
  for (int k = 0; k < nsigns; ++k) params["sign" + std::to_string(k + 1)] = signs[k];
  if (branch == SolutionBranch::qform) params["root"] = static_cast<double>(static_cast<int>(opt.root));
  return PhiSpec(std::string("solution:") + to_string(branch), params, b.eval, d, b.formula, false);
}

}  // namespace gabm
