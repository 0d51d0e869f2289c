#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gabm/deform.hpp"
#include "gabm/errors.hpp"
#include "gabm/gab.hpp"
#include "gabm/pde.hpp"

using namespace gabm;

namespace {

// S^3 = dt^2 + sin^2 t g_S2, beta = sin t dt: mu = 1, kappa = 1
OneFormField s3_form() {
  return warped_form(
      make_warped(1.0, 0.0, 1.0, space_form(2, 1.0), 1.0).metric.with_box({0.3, -1, -1}, {1.2, 1, 1}));
}

// H^3 written as dt^2 + h^2 g_S2, h(0) = 1, h'(0) = sqrt 2: mu = -1, kappa = 1
OneFormField h3_form() {
  return warped_form(
      make_warped(-1.0, 1.0, std::sqrt(2.0), space_form(2, 1.0), 1.0).metric.with_box({-0.3, -1, -1}, {0.6, 1, 1}));
}

// dt^2 + e^{2t} |dx|^2, beta = e^t dt: mu = -1, kappa = 0
OneFormField exp_form() {
  return warped_form(make_warped(-1.0, 1.0, 1.0, euclidean(2), 0.0).metric.with_box({-1.5, -1, -1}, {0.6, 1, 1}));
}

std::vector<std::vector<double>> points(const MetricField& g, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> xs;
  while (static_cast<int>(xs.size()) < count) {
    std::vector<double> x(g.dim());
    for (int i = 0; i < g.dim(); ++i)
      x[i] = std::uniform_real_distribution<double>(g.box_lo()[i], g.box_hi()[i])(rng);
    if (g.contains(x)) xs.push_back(x);
  }
  return xs;
}

std::vector<double> random_y(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> y(n);
  for (auto& v : y) v = u(rng);
  return y;
}

double max_ricci_alpha(const MetricField& g, int count) {
  std::mt19937_64 rng(5);
  double worst = 0;
  for (const auto& x : points(g, count, 9)) {
    const auto y = random_y(g.dim(), rng);
    worst = std::max(worst, std::abs(ricci_alpha(g, x, y).value) / alpha2(g, x, y));
  }
  return worst;
}

// sol03 with sigma = -1, normalized kappa_bar = |mu| = 1, so K = -1
PhiSpec sol03_bar() { return solution_family(-1.0, 10.0, 0.0, SolutionBranch::sol03); }

}  // namespace

// ---------------------------------------------------------------- pairs

TEST(DeformMu, SphereGivesRicciFlatPair) {
  const DeformedPair p = deform_mu(s3_form(), 1.0, 1.0);
  EXPECT_NEAR(std::abs(p.c_bar), 1.0, 1e-8);
  EXPECT_LT(max_ricci_alpha(p.alpha_bar(), 20), 1e-5);
  const ConformalReport cr = conformal_check(p.beta_bar, points(p.alpha_bar(), 10, 2));
  EXPECT_TRUE(cr.pass) << cr.max_residual;
}

TEST(DeformMu, NegativeMuGivesRicciFlatPair) {
  const DeformedPair p = deform_mu(h3_form(), -1.0, 1.0);
  EXPECT_NEAR(std::abs(p.c_bar), 1.0, 1e-8);
  EXPECT_LT(max_ricci_alpha(p.alpha_bar(), 20), 1e-5);
}

TEST(DeformMu, KappaMuIdentity) {
  for (auto [form, mu] : {std::pair{s3_form(), 1.0}, std::pair{h3_form(), -1.0}}) {
    const DeformedPair p = deform_mu(form, mu, 1.0);
    for (const auto& x : points(form.metric(), 100, 3)) {
      const double D = 1.0 - mu * form.norm2(x);
      EXPECT_NEAR(D * (1.0 + p.b2_bar(x) / mu), 1.0, 1e-12);
      EXPECT_NEAR(p.b2_bar(x), deform_b2(form.norm2(x), mu, 1.0, DeformDirection::forward), 1e-12);
    }
  }
}

TEST(DeformMu, InverseRoundTrip) {
  for (auto [form, mu] : {std::pair{s3_form(), 1.0}, std::pair{h3_form(), -1.0}}) {
    const OneFormField back = deform_mu_inverse(deform_mu(form, mu, 1.0));
    for (const auto& x : points(form.metric(), 20, 4)) {
      EXPECT_LT((back.metric().eval(x) - form.metric().eval(x)).cwiseAbs().maxCoeff(), 1e-12);
      EXPECT_LT((back.eval(x) - form.eval(x)).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(DeformMu, Refusals) {
  EXPECT_THROW(deform_mu(s3_form(), 0.0, 1.0), InvalidInput);
  EXPECT_THROW(deform_mu(s3_form(), 1.0, 2.0), InvalidInput);  // wrong kappa
  // H^3 with beta = sinh t dt... here cosh: kappa = -1, abar would be indefinite
  const OneFormField hyp = warped_form(
      make_warped(-1.0, 1.0, 0.0, space_form(2, -1.0), -1.0).metric.with_box({-0.5, -0.5, -0.5}, {0.5, 0.5, 0.5}));
  EXPECT_THROW(deform_mu(hyp, -1.0, -1.0), InvalidInput);
  EXPECT_THROW(deform_mu(radial_form(euclidean(3), 0.5), 1.0, 0.25), InvalidInput);  // not mu = 1
  const DeformedPair kz = deform_kzero(exp_form(), -1.0);
  EXPECT_THROW(deform_mu_inverse(kz), InvalidInput);
}

TEST(DeformKzero, UnitParallelForm) {
  const DeformedPair p = deform_kzero(exp_form(), -1.0);
  EXPECT_NEAR(p.c_bar, 0.0, 1e-8);
  const auto xs = points(p.alpha_bar(), 30, 6);
  for (const auto& x : xs) {
    EXPECT_NEAR(std::sqrt(p.b2_bar(x)), 1.0, 1e-12);
    EXPECT_LT(covariant_derivative(p.beta_bar, x).cwiseAbs().maxCoeff(), 1e-8);
  }
  EXPECT_LT(max_ricci_alpha(p.alpha_bar(), 20), 1e-6);
  EXPECT_THROW(deform_kzero(exp_form(), 1.0), InvalidInput);
  EXPECT_THROW(deform_kzero(s3_form(), -1.0), InvalidInput);
}

TEST(DeformKzero, BerwaldFamilyIsRicciFlatBerwald) {
  const GabMetric m(exp_form(), berwald_phi(phibar_polynomial({1, 0.5}), 1e-2, 4.0));
  const Samples s = admissible_samples(m, 12, 2);
  ASSERT_EQ(s.size(), 12u);
  EXPECT_LT(einstein_residual(m, 0.0, s).max_residual, 1e-6);
  const BerwaldReport br = berwald_check(m, s);
  EXPECT_TRUE(br.pass) << br.max_third;
}

// ---------------------------------------------------------------- phi

TEST(DeformPhi, RoundTrip) {
  const PhiSpec bar = sol03_bar();
  const PhiSpec phi = deform_phi(bar, 1.0, 1.0, -1.0, DeformDirection::inverse);
  const PhiSpec back = deform_phi(phi, 1.0, 1.0, -1.0, DeformDirection::forward);
  for (const auto& [b2, s] : interior_points(safe_domain(back.domain()), 60, 7).nodes)
    EXPECT_NEAR(back(b2, s), bar(b2, s), 1e-10 * std::abs(bar(b2, s)));
}

TEST(DeformPhi, OutputsSolveTheirSystems) {
  for (double mu : {1.0, -1.0}) {
    const double kappa = 1.0, K = -std::abs(mu);
    const PhiSpec bar = sol03_bar();
    const PhiSpec phi = deform_phi(bar, mu, kappa, K, DeformDirection::inverse);
    const PhiSpec fwd = deform_phi(phi, mu, kappa, K, DeformDirection::forward);
    for (const auto& [b2, s] : interior_points(safe_domain(phi.domain()), 50, 8).nodes) {
      const double scale = std::max(1.0, std::abs(K * phi(b2, s) * phi(b2, s)));
      EXPECT_LT(std::abs(pde1_residual(phi, b2, s)), 1e-9 * scale);
      EXPECT_LT(std::abs(pde2_residual(phi, mu, kappa, K, b2, s)), 1e-9 * scale) << mu << " " << b2 << " " << s;
    }
    for (const auto& [b2, s] : interior_points(safe_domain(fwd.domain()), 50, 9).nodes) {
      const double scale = std::max(1.0, std::abs(K * fwd(b2, s) * fwd(b2, s)));
      EXPECT_LT(std::abs(pde1_residual(fwd, b2, s)), 1e-9 * scale);
      EXPECT_LT(std::abs(pde2_normalized_residual(fwd, std::abs(mu), K, b2, s)), 1e-9 * scale);
    }
  }
}

TEST(DeformPhi, RejectsNonSolutions) {
  EXPECT_THROW(deform_phi(randers_phi(), 1.0, 1.0, 5.0, DeformDirection::forward), InvalidInput);
  EXPECT_THROW(deform_phi(sol03_bar(), 1.0, 1.0, -3.0, DeformDirection::inverse), InvalidInput);
  EXPECT_THROW(deform_phi(sol03_bar(), 0.0, 1.0, -1.0, DeformDirection::inverse), InvalidInput);
}

TEST(DeformPhi, SubstitutionOutsideSourceDomain) {
  const PhiSpec phi = deform_phi(sol03_bar(), 1.0, 1.0, -1.0, DeformDirection::inverse);
  // b^2 close to kappa / mu sends bbar^2 past the sol03 domain
  try {
    (void)phi.closure()(Jet(0.999), Jet(0.0));
    FAIL() << "expected DomainError";
  } catch (const DomainError& e) {
    ASSERT_EQ(e.witness().size(), 2u);
    EXPECT_DOUBLE_EQ(e.witness()[0], 0.999);
  }
}

// ---------------------------------------------------------------- F

TEST(DeformF, Invariance) {
  const double mu = 1.0, kappa = 1.0, K = -1.0;
  const OneFormField form = s3_form();
  const DeformedPair p = deform_mu(form, mu, kappa);
  const PhiSpec bar = sol03_bar();
  const PhiSpec phi = deform_phi(bar, mu, kappa, K, DeformDirection::inverse);
  const GabMetric m(form, phi), mbar(p.beta_bar, bar);
  std::mt19937_64 rng(11);
  int checked = 0;
  for (const auto& x : points(form.metric(), 100, 12)) {
    const auto y = random_y(3, rng);
    const double f = F(m, x, y);
    EXPECT_NEAR(F(mbar, x, y), f, 1e-10 * f);
    ++checked;
  }
  EXPECT_EQ(checked, 100);
}

TEST(DeformF, SphereSolutionIsEinstein) {
  const double K = -1.0;
  const PhiSpec phi = deform_phi(sol03_bar(), 1.0, 1.0, K, DeformDirection::inverse);
  const GabMetric m(s3_form(), phi, EinsteinContext{1.0, 1.0, K, true, true, true});
  const Samples s = admissible_samples(m, 10, 3);
  ASSERT_EQ(s.size(), 10u);
  const EinsteinReport r = einstein_residual(m, K, s);
  EXPECT_LT(r.max_residual, 1e-6);
  // and a wrong constant is detected
  EXPECT_GT(einstein_residual(m, 0.5 * K, s).max_residual, 0.1);
}
