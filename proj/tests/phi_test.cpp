#include <array>
#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "gabm/errors.hpp"
#include "gabm/pde.hpp"
#include "gabm/phi.hpp"
#include "gabm/taylor_ode.hpp"

using namespace gabm;

namespace {

using Six = std::array<double, 6>;

Six six(const PhiJet& j) { return {j.phi, j.phi1, j.phi2, j.phi11, j.phi12, j.phi22}; }

void expect_close(const Six& got, const Six& want, double rel) {
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(got[k], want[k], rel * std::max(1.0, std::abs(want[k]))) << "entry " << k;
}

// central differences of phi, step h
Six fd_partials(const PhiSpec& f, double b2, double s, double h) {
  auto F = [&](double x, double y) { return f(x, y); };
  const double f0 = F(b2, s);
  return {f0,
          (F(b2 + h, s) - F(b2 - h, s)) / (2 * h),
          (F(b2, s + h) - F(b2, s - h)) / (2 * h),
          (F(b2 + h, s) - 2 * f0 + F(b2 - h, s)) / (h * h),
          (F(b2 + h, s + h) - F(b2 + h, s - h) - F(b2 - h, s + h) + F(b2 - h, s - h)) / (4 * h * h),
          (F(b2, s + h) - 2 * f0 + F(b2, s - h)) / (h * h)};
}

// largest |residual| / max(1, |K phi^2|) over a 31x31 grid plus 100 interior points
double max_pde_residual(const PhiSpec& f, double kappa, double K, bool second) {
  const PhiDomain d = safe_domain(f.domain());
  const PhiGrid g = merge(tensor_grid(d, 31, 31), interior_points(d, 100, 7));
  double worst = 0.0;
  for (const auto& [b2, s] : g.nodes) {
    const double v = f(b2, s);
    const double r = second ? pde2_normalized_residual(f, kappa, K, b2, s) : pde1_residual(f, b2, s);
    worst = std::max(worst, std::abs(r) / std::max(1.0, std::abs(K * v * v)));
  }
  return worst;
}

}  // namespace

// ---------------------------------------------------------------- closed forms

TEST(ClosedForms, ValuesAtOrigin) {
  EXPECT_DOUBLE_EQ(randers_phi()(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(square_phi()(0.0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(riemannian_phi()(0.3, 0.1), 1.0);
}

TEST(ClosedForms, RandersMatchesOracle) {
  expect_close(six(randers_phi().jet(0.25, 0.1)),
               {1.2957063849441796, 0.9628894003570336, 1.4862771559137078, 2.0646003880780506, 2.0823238104597516,
                1.5093140386221169},
               1e-13);
}

TEST(ClosedForms, SquareMatchesOracle) {
  expect_close(six(square_phi().jet(0.25, 0.1)),
               {1.9257788007140672, 4.1292007761561013, 4.1646476209195032, 14.53086358012162, 11.502914894019232,
                5.9578185735083561},
               1e-13);
}

TEST(ClosedForms, PartialsMatchFiniteDifferences) {
  for (const PhiSpec& f : {randers_phi(), square_phi()}) {
    for (auto [b2, s] : {std::pair{0.25, 0.1}, {0.5, -0.4}, {0.8, 0.6}, {0.05, 0.0}}) {
      const Six j = six(f.jet(b2, s)), fd = fd_partials(f, b2, s, 1e-6);
      // first derivatives are accurate; second differences at h = 1e-6 lose ~1e-4
      for (int k : {0, 1, 2}) EXPECT_NEAR(j[k], fd[k], 1e-6 * std::max(1.0, std::abs(j[k]))) << f.family() << k;
      const Six fd2 = fd_partials(f, b2, s, 1e-4);
      for (int k : {3, 4, 5}) EXPECT_NEAR(j[k], fd2[k], 1e-6 * std::max(1.0, std::abs(j[k]))) << f.family() << k;
    }
  }
}

TEST(ClosedForms, SatisfyBothEquations) {
  const PhiGrid g = merge(tensor_grid({0.0, 0.9}, 11, 11), interior_points({0.0, 0.9}, 50, 3));
  for (const auto& [b2, s] : g.nodes) {
    EXPECT_NEAR(pde1_residual(randers_phi(), b2, s), 0.0, 1e-12);
    EXPECT_NEAR(pde1_residual(square_phi(), b2, s), 0.0, 1e-11);
    EXPECT_NEAR(pde2_residual(randers_phi(), 0.0, 1.0, -0.25, b2, s), 0.0, 1e-10);
    EXPECT_NEAR(pde2_residual(square_phi(), 0.0, 2.0, 0.0, b2, s), 0.0, 1e-10);
  }
}

TEST(ClosedForms, DomainViolationCarriesWitness) {
  try {
    randers_phi()(1.2, 0.1);
    FAIL();
  } catch (const DomainError& e) {
    ASSERT_EQ(e.witness().size(), 2u);
    EXPECT_EQ(e.witness()[0], 1.2);
  }
  EXPECT_THROW(randers_phi()(0.25, 0.6), DomainError);  // |s| > b
}

TEST(ClosedForms, PartialsFollowJetArguments) {
  // b2 and s as functions of one parameter t: d/dt phi = 0.1 phi_1 + 0.05 phi_2
  const auto sp = JetSpace::get(1, 2);
  const Jet t = Jet::variable(sp, 0, 0.0);
  const Jet b2 = 0.25 + 0.1 * t, s = 0.1 + 0.05 * t;
  const PhiPartials p = randers_phi().partials(b2, s);
  const PhiJet j = randers_phi().jet(0.25, 0.1);
  EXPECT_NEAR(p.phi.coefficients()[1], 0.1 * j.phi1 + 0.05 * j.phi2, 1e-14);
  EXPECT_NEAR(p.phi1.coefficients()[1], 0.1 * j.phi11 + 0.05 * j.phi12, 1e-13);
  EXPECT_EQ(p.phi22.order(), 2);
}

TEST(ClosedForms, PerturbationScalesLinearly) {
  std::vector<double> r;
  for (double eps : {1e-4, 1e-3, 1e-2}) r.push_back(pde1_residual(perturbed_phi(randers_phi(), eps), 0.3, 0.2));
  // phi + eps s^3: residual = 6 eps s
  EXPECT_NEAR(r[0], 6e-4 * 0.2, 1e-13);
  EXPECT_NEAR(r[1] / r[0], 10.0, 1e-8);
  EXPECT_NEAR(r[2] / r[1], 10.0, 1e-8);
}

// ---------------------------------------------------------------- solutions

TEST(Solutions, ExampleValues) {
  EXPECT_NEAR(solution_family(-1, 2, 0, SolutionBranch::i)(1.0, 0.5), std::sqrt(1.25), 1e-15);
  SolutionOptions plus;
  plus.signs = {1, 1};
  EXPECT_NEAR(solution_family(-1, 2, 0, SolutionBranch::sol03, plus)(1.0, 0.0), 0.5, 1e-15);
}

struct FamilyCase {
  const char* name;
  double sigma, C, D;
  SolutionBranch branch;
  QRoot root;
  double b2, s;
  Six want;
};

class FamilyOracle : public ::testing::TestWithParam<FamilyCase> {};

TEST_P(FamilyOracle, MatchesHighPrecision) {
  const auto& c = GetParam();
  SolutionOptions o;
  o.root = c.root;
  const PhiSpec f = solution_family(c.sigma, c.C, c.D, c.branch, o);
  expect_close(six(f.jet(c.b2, c.s)), c.want, 1e-11);
}

TEST_P(FamilyOracle, SolvesNormalizedSystem) {
  const auto& c = GetParam();
  SolutionOptions o;
  o.root = c.root;
  const PhiSpec f = solution_family(c.sigma, c.C, c.D, c.branch, o);
  EXPECT_LT(max_pde_residual(f, 1.0, c.sigma, false), 1e-9);
  EXPECT_LT(max_pde_residual(f, 1.0, c.sigma, true), 1e-9);
  // the same statement for kappa = 4, K = 4 sigma
  EXPECT_NEAR(pde2_normalized_residual(f, 4.0, 4.0 * c.sigma, c.b2, c.s), 0.0, 1e-11);
}

TEST_P(FamilyOracle, UvImagesAgree) {
  const auto& c = GetParam();
  SolutionOptions o;
  o.root = c.root;
  const PhiSpec f = solution_family(c.sigma, c.C, c.D, c.branch, o);
  const UvResiduals uv = uv_residuals(f, 1.0, c.sigma, c.b2 - c.s * c.s, c.s);
  EXPECT_NEAR(uv.eqn02, pde1_residual(f, c.b2, c.s), 1e-10);
  EXPECT_NEAR(std::sqrt(f(c.b2, c.s)) * uv.pde5, pde2_normalized_residual(f, 1.0, c.sigma, c.b2, c.s), 1e-10);
}

INSTANTIATE_TEST_SUITE_P(
    Branches, FamilyOracle,
    ::testing::Values(
        FamilyCase{"sol03", -1, 2, 0, SolutionBranch::sol03, QRoot::automatic, 0.5, 0.3,
                   {0.32031734043061638, 0.081369629334053569, -0.25402817476151892, 0.066928290594348988,
                    -0.14441338739704582, 0.24938729110633463}},
        FamilyCase{"i_negative_sigma", -1, 2, 0, SolutionBranch::i, QRoot::automatic, 1.0, 0.5,
                   {1.1180339887498948, 0.67082039324993691, 0.44721359549995794, 1.1627553482998906,
                    0.62609903369994111, 0.7155417527999327}},
        FamilyCase{"i_positive_sigma", 0.5, -1, 0, SolutionBranch::i, QRoot::automatic, 0.3, 0.2,
                   {1.2211159897221187, -0.45475015490262053, -0.19382793487652678, 0.50732600499404622,
                    0.22601425861670705, -0.99990601325192388}},
        FamilyCase{"ii", 0, 2, 0.5, SolutionBranch::ii, QRoot::automatic, 0.5, 0.3,
                   {0.16273925866810714, 0.13385658118869798, -0.28882677479409164, 0.18928948592886305,
                    -0.33804816052300244, 0.47054205869119741}},
        FamilyCase{"iii", -1, 3, 0.3, SolutionBranch::iii, QRoot::automatic, 0.5, 0.2,
                   {0.63197019896385854, 0.12783594955957547, -0.045876021682803416, 0.079706878414638536,
                    -0.048076875081766823, 0.27490264915185767}},
        FamilyCase{"iv", 1, 1, 0.5, SolutionBranch::iv, QRoot::automatic, 0.5, 0.2,
                   {0.35399837027524894, 0.30174444995415311, -0.63266111693558315, 0.22540174254609383,
                    -0.5528472045864269, 0.82462778174287698}},
        FamilyCase{"qform_negative_sigma", -0.5, 2, 0.4, SolutionBranch::qform, QRoot::small, 0.5, 0.2,
                   {1.1608611202339419, 0.40984454056439493, -0.21398225508951962, 0.47007706815037446,
                    -0.36744909143154635, 0.96666871770140841}},
        FamilyCase{"qform_positive_sigma", 0.5, 1, 0.6, SolutionBranch::qform, QRoot::automatic, 0.5, 0.2,
                   {0.48838091294198113, 0.49151740448064228, -0.95088981433197788, 0.5058827821038108,
                    -1.0401560467996415, 1.3990972276811411}}),
    [](const ::testing::TestParamInfo<FamilyCase>& info) { return std::string(info.param.name); });

TEST(Solutions, AutomaticSignsGivePositivePhi) {
  const PhiSpec iii = solution_family(-1, 3, 0.3, SolutionBranch::iii);
  EXPECT_EQ(iii.params().at("sign1"), 1.0);
  EXPECT_EQ(iii.params().at("sign2"), -1.0);
  const PhiSpec iv = solution_family(1, 1, 0.5, SolutionBranch::iv);
  EXPECT_EQ(iv.params().at("sign1"), -1.0);
  for (const PhiSpec& f : {iii, iv})
    for (const auto& [b2, s] : tensor_grid(f.domain(), 9, 9).nodes) EXPECT_GT(f(b2, s), 0.0);
}

TEST(Solutions, PrintedComplexFormSolvesOnlyTheEinsteinEquation) {
  // Re 1/(sqrt(z) + i s) / sqrt(sigma), z = C - b2 + s^2 + 2 i sqrt(sigma) D
  const double sigma = 1, C = 1, D = 0.5;
  auto eval = [=](const Jet& b2, const Jet& s) {
    const Jet X = C - b2 + s * s;
    const double Y = 2 * std::sqrt(sigma) * D;
    const Jet mod = sqrt(X * X + Y * Y);
    const Jet P = sqrt(0.5 * (mod + X));
    const Jet Q = Y / (2.0 * P);
    const Jet im = Q + s;
    return P / (std::sqrt(sigma) * (P * P + im * im));
  };
  const PhiSpec f = custom_phi("printed", eval, {0.0, 0.9});
  EXPECT_NEAR(pde2_normalized_residual(f, 1.0, sigma, 0.5, 0.2), 0.0, 1e-10);
  EXPECT_GT(std::abs(pde1_residual(f, 0.5, 0.2)), 1e-2);
}

TEST(Solutions, QuarticIdentity) {
  for (auto [sigma, C, D] : {std::array{-0.5, 2.0, 0.4}, {0.5, 1.0, 0.6}, {0.0, 1.5, 0.7}, {-1.0, 2.0, 0.0}})
    for (double u : {-0.5, 0.0, 0.3, 0.9})
      for (QRoot root : {QRoot::small, QRoot::large}) {
        if ((D == 0.0 && root == QRoot::large) || (sigma == 0.0 && root == QRoot::small)) continue;
        const double q = qform_q(sigma, C, D, Jet(u), root, 1).value();
        const double r = D * D * std::pow(q, 4) + (u - C) * q * q - sigma;
        EXPECT_NEAR(r, 0.0, 1e-12 * std::max(1.0, D * D * std::pow(q, 4)));
      }
}

TEST(Solutions, QFormWithoutDReducesToBranchI) {
  const PhiSpec a = solution_family(-1, 2, 0, SolutionBranch::qform);
  const PhiSpec b = solution_family(-1, 2, 0, SolutionBranch::i);
  for (const auto& [b2, s] : tensor_grid(safe_domain({0.0, std::min(a.domain().b2_hi, b.domain().b2_hi)}), 11, 11).nodes)
    EXPECT_NEAR(a(b2, s), b(b2, s), 1e-10 * std::abs(b(b2, s)));
}

TEST(Solutions, InvalidParameters) {
  EXPECT_THROW(solution_family(1, 2, 0, SolutionBranch::sol03), InvalidInput);
  EXPECT_THROW(solution_family(-1, 2, 0.5, SolutionBranch::i), InvalidInput);
  EXPECT_THROW(solution_family(-1, 2, 0.5, SolutionBranch::ii), InvalidInput);
  EXPECT_THROW(solution_family(-1, 0.5, 1.0, SolutionBranch::iii), InvalidInput);
  EXPECT_THROW(solution_family(-1, 2, 0.5, SolutionBranch::iv), InvalidInput);
  SolutionOptions bad;
  bad.signs = {1};
  EXPECT_THROW(solution_family(-1, 2, 0, SolutionBranch::sol03, bad), InvalidInput);
  EXPECT_THROW(qform_q(-1, 0.5, 0.5, Jet(1.0), QRoot::small, 1), DomainError);
}

TEST(Solutions, BranchNamesRoundTrip) {
  for (auto b : {SolutionBranch::sol03, SolutionBranch::qform, SolutionBranch::i, SolutionBranch::ii,
                 SolutionBranch::iii, SolutionBranch::iv})
    EXPECT_EQ(solution_branch_from_string(to_string(b)), b);
  EXPECT_THROW(solution_branch_from_string("v"), InvalidInput);
}

// ---------------------------------------------------------------- profile ODE

TEST(ProfileOde, LinearWhenRightSideVanishes) {
  const FtSolution y = ode_ft_solve(0, 0, 5, 1, 1);
  for (double x : {-1.0, -0.3, 0.0, 0.45, 1.0}) EXPECT_NEAR(y.value(x), 1 + x, 1e-15);
}

TEST(ProfileOde, ReproducesSquareProfile) {
  const FtSolution y = ode_ft_solve(2, 0, -3, 1, 2, -0.9, 0.9);
  for (int i = 0; i <= 20; ++i) {
    const double x = -0.9 + 1.8 * i / 20;
    EXPECT_NEAR(y.value(x), (1 + x) * (1 + x), 1e-10);
  }
}

TEST(ProfileOde, MatchesOracleWithQuarticTerm) {
  const FtSolution y = ode_ft_solve(1, 0.5, -1, 1, 0.3);
  EXPECT_NEAR(y.value(0.4), 1.1998995369560289, 1e-13);
  EXPECT_NEAR(y.value(0.8), 1.5542255464210826, 1e-13);
}

TEST(ProfileOde, ResidualIsSmall) {
  const FtSolution y = ode_ft_solve(1, 0.5, -1, 1, 0.3);
  for (int i = 0; i < 20; ++i) EXPECT_LT(std::abs(y.residual(-0.95 + 1.9 * i / 19)), 1e-9);
}

TEST(ProfileOde, JetsMatchTaylorCoefficients) {
  const FtSolution y = ode_ft_solve(1, 0.5, -1, 1, 0.3);
  const Jet j = y(Jet::variable(JetSpace::get(1, 2), 0, 0.4));
  const auto t = y.taylor(0.4, 2);
  EXPECT_DOUBLE_EQ(j.coefficients()[1], t[1]);
  EXPECT_DOUBLE_EQ(j.coefficients()[2], t[2]);
}

TEST(ProfileOde, SingularCoefficientIsReported) {
  // 1 - 2 x^2 vanishes at 1/sqrt(2)
  try {
    ode_ft_solve(-2, 0, 0, 1, 0);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NEAR(std::abs(e.witness()[0]), std::sqrt(0.5), 1e-14);
  }
  EXPECT_NO_THROW(ode_ft_solve(-2, 0, 0, 1, 0, -0.7, 0.7));
}

// ---------------------------------------------------------------- projflat

TEST(ProjFlat, ReproducesRanders) {
  const PhiSpec f = projflat_phi(0, 0, -1, phibar_polynomial({1, 1}));
  for (const auto& [b2, s] : tensor_grid({0.0, 0.95}, 15, 15).nodes)
    EXPECT_NEAR(f(b2, s), randers_phi()(b2, s), 1e-12 * randers_phi()(b2, s));
}

TEST(ProjFlat, ReproducesSquare) {
  const PhiSpec f = projflat_phi(2, 0, -3, phibar_polynomial({1, 2, 1}));
  for (const auto& [b2, s] : tensor_grid({0.0, 0.95}, 15, 15).nodes)
    EXPECT_NEAR(f(b2, s), square_phi()(b2, s), 1e-12 * square_phi()(b2, s));
}

TEST(ProjFlat, EtaWithQuarticTerm) {
  EXPECT_NEAR(projflat_eta(1, 0.5, -1, Jet(0.3)).value(), 1.1466041282200699, 1e-13);
  const Jet e = projflat_eta(1, 0.5, -1, Jet::variable(JetSpace::get(1, 1), 0, 0.3));
  EXPECT_NEAR(e.coefficients()[1], 0.4663222531038562, 1e-13);
}

TEST(ProjFlat, OdeProfileMatchesOracleAndSolvesProjectiveEquation) {
  const PhiBar pb = ode_ft_solve(1, 0.5, -1, 1, 0.3).as_phibar();
  const PhiSpec f = projflat_phi(1, 0.5, -1, pb);
  EXPECT_NEAR(f(0.2, 0.1), 1.1364846870575487, 1e-12);
  EXPECT_LT(max_pde_residual(f, 1.0, 0.0, false), 1e-9);
}

TEST(ProjFlat, GenericInitialSlopeSolvesProjectiveEquation) {
  const PhiSpec f = projflat_phi(2, 0, -3, ode_ft_solve(2, 0, -3, 1, 0.5, -0.99, 0.99).as_phibar(), 1.0, 0.9);
  EXPECT_LT(max_pde_residual(f, 1.0, 0.0, false), 1e-9);
}

TEST(ProjFlat, RejectsNonSolutionProfile) {
  EXPECT_THROW(projflat_phi(2, 0, -3, phibar_polynomial({1, 0, 0, 1})), InvalidInput);
}

// ---------------------------------------------------------------- berwald

TEST(BerwaldFamily, Examples) {
  const PhiSpec one = berwald_phi(phibar_polynomial({1}));
  EXPECT_NEAR(one(2.0, 0.3), 1 / std::sqrt(2.0), 1e-15);
  EXPECT_NEAR(one.jet(2.0, 0.3).phi2, 0.0, 1e-15);
  EXPECT_NEAR(berwald_phi(phibar_polynomial({1, 1}))(4.0, 1.0), 0.75, 1e-15);
  EXPECT_THROW(berwald_phi(phibar_polynomial({1}), 0.0), InvalidInput);
}

TEST(BerwaldFamily, ViolatesProjectiveEquation) {
  // phi = 1/b + s/b^2 gives residual b^-3
  const PhiSpec f = berwald_phi(phibar_polynomial({1, 1}), 0.25, 1.0);
  EXPECT_NEAR(pde1_residual(f, 0.25, 0.1), 8.0, 1e-12);
}

// ---------------------------------------------------------------- regularity

TEST(Regularity, ConstantPasses) {
  const auto r = regularity_check(riemannian_phi(), tensor_grid({0.0, 1.0}, 5, 5));
  EXPECT_TRUE(r.pass);
  EXPECT_DOUBLE_EQ(r.min_v1, 1.0);
  EXPECT_DOUBLE_EQ(r.min_v2, 1.0);
}

TEST(Regularity, RandersPasses) {
  EXPECT_TRUE(regularity_check(randers_phi(), tensor_grid({0.0, 0.9}, 31, 31)).pass);
}

TEST(Regularity, LinearProfileIsRegular) {
  // phi = 1 - 2s: both quantities are identically 1
  const PhiSpec f = custom_phi("1-2s", [](const Jet&, const Jet& s) { return 1.0 - 2.0 * s; }, {1.0, 1.0});
  const auto r = regularity_check(f, tensor_grid(f.domain(), 1, 11, 0.45));
  EXPECT_TRUE(r.pass);
  EXPECT_NEAR(r.min_v2, 1.0, 1e-15);
}

TEST(Regularity, FailureReportsWitness) {
  // phi = 1 - 2 s^2: second quantity 6 s^2 - 3 < 0 near s = 0
  const PhiSpec f = custom_phi("1-2s^2", [](const Jet&, const Jet& s) { return 1.0 - 2.0 * s * s; }, {1.0, 1.0});
  const auto r = regularity_check(f, tensor_grid(f.domain(), 1, 11));
  EXPECT_FALSE(r.pass);
  EXPECT_DOUBLE_EQ(r.b2, 1.0);
  EXPECT_NEAR(r.v2, 6 * r.s * r.s - 3, 1e-12);
  EXPECT_LT(r.v2, 0.0);
  EXPECT_NEAR(r.min_v2, -3.0, 1e-12);
}

// ---------------------------------------------------------------- grids and psi

TEST(Grids, InteriorPointsAreDeterministicAndInside) {
  const PhiDomain d{0.1, 0.8};
  const PhiGrid a = interior_points(d, 64, 11), b = interior_points(d, 64, 11);
  ASSERT_EQ(a.nodes.size(), 64u);
  for (std::size_t k = 0; k < a.nodes.size(); ++k) {
    EXPECT_EQ(a.nodes[k], b.nodes[k]);
    const auto [b2, s] = a.nodes[k];
    EXPECT_GE(b2, 0.1);
    EXPECT_LE(b2, 0.8);
    EXPECT_LE(s * s, b2);
  }
}

TEST(Psi, Definitions) {
  const PsiValue c = psi_jet(riemannian_phi(2.0), 0.3, 0.1);
  EXPECT_EQ(c.psi, 0.0);
  EXPECT_EQ(c.psi1, 0.0);
  EXPECT_EQ(c.psi2, 0.0);
  const PhiJet j = randers_phi().jet(0.25, 0.1);
  const PsiValue p = psi_jet(randers_phi(), 0.25, 0.1);
  EXPECT_NEAR(p.psi, (j.phi2 + 0.2 * j.phi1) / (2 * j.phi), 1e-15);
  const double h = 1e-6;
  auto psi = [](double b2, double s) { return psi_jet(randers_phi(), b2, s).psi; };
  EXPECT_NEAR(p.psi1, (psi(0.25 + h, 0.1) - psi(0.25 - h, 0.1)) / (2 * h), 1e-6);
  EXPECT_NEAR(p.psi2, (psi(0.25, 0.1 + h) - psi(0.25, 0.1 - h)) / (2 * h), 1e-6);
  // even in s at s = 0
  const PhiJet e = square_phi().jet(0.3, 0.0);
  EXPECT_NEAR(psi_jet(square_phi(), 0.3, 0.0).psi, e.phi2 / (2 * e.phi), 1e-15);
}

TEST(Pde, HandCounterexamplesAndNormalizedForm) {
  const PhiSpec f = custom_phi("1+b4", [](const Jet& b2, const Jet&) { return 1.0 + b2 * b2; }, {0.0, 1.0});
  EXPECT_NEAR(pde1_residual(f, 0.5, 0.2), -2.0, 1e-14);  // -4 b^2
  const PhiSpec c = riemannian_phi(2.0);
  EXPECT_DOUBLE_EQ(pde2_normalized_residual(c, 1.0, 0.5, 0.3, 0.1), -2.0);
  EXPECT_EQ(pde2_normalized_residual(randers_phi(), 1.3, 0.2, 0.3, 0.1),
            pde2_residual(randers_phi(), 0.0, 1.3, 0.2, 0.3, 0.1));
  EXPECT_THROW(pde2_residual(randers_phi(), 1.0, 0.1, 0.0, 0.3, 0.1), DomainError);
  const UvResiduals uv = uv_residuals(c, 1.0, 0.5, 0.2, 0.1);
  EXPECT_NEAR(uv.pde5, -0.5 * std::pow(2.0, 1.5), 1e-14);
  EXPECT_EQ(uv.eqn02, 0.0);
}
