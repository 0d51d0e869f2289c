#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "gabm/errors.hpp"
#include "gabm/oneform.hpp"

using namespace gabm;

namespace {

std::vector<std::vector<double>> sample(const MetricField& g, int count, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> xs;
  for (int s = 0; s < count; ++s) {
    std::vector<double> x(g.dim());
    for (int i = 0; i < g.dim(); ++i)
      x[i] = std::uniform_real_distribution<double>(g.box_lo()[i], g.box_hi()[i])(rng);
    xs.push_back(x);
  }
  return xs;
}

std::vector<double> random_dir(int n, std::mt19937_64& rng) {
  std::vector<double> y(n);
  for (auto& v : y) v = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
  return y;
}

MetricField s3() { return make_warped(1.0, 0.0, 1.0, space_form(2, 1.0), 1.0).metric.with_box({0.3, -1, -1}, {1.2, 1, 1}); }
MetricField hyperbolic_warp() { return make_warped(-1.0, 1.0, 0.0, space_form(2, -1.0), -1.0).metric; }
MetricField exp_warp() { return make_warped(-1.0, 1.0, 1.0, euclidean(2), 0.0).metric; }

// an arbitrary non-conformal 1-form
OneFormField generic_form(const MetricField& g) {
  auto eval = [](std::span<const Jet> x) { return std::vector<Jet>{x[1], x[0] * x[0], Jet(1.0) + x[2] * x[0]}; };
  return OneFormField(g, eval);
}

}  // namespace

TEST(CovariantDerivative, RadialOnEuclidean) {
  const auto beta = radial_form(euclidean(3), 0.7);
  const std::vector<double> x{0.1, -0.4, 0.9};
  const auto B = covariant_derivative(beta, x);
  EXPECT_LT((B - 0.7 * Eigen::MatrixXd::Identity(3, 3)).norm(), 1e-15);
}

TEST(CovariantDerivative, ConstantOnEuclideanIsZero) {
  const auto beta = constant_form(euclidean(3), {0.1, 0.2, 0.3});
  const std::vector<double> x{0.5, 0.5, -0.5}, y{1.0, 2.0, -1.0};
  EXPECT_EQ(covariant_derivative(beta, x).norm(), 0.0);
  const auto d = beta_quantities(beta, x, y);
  EXPECT_NEAR(d.b2, 0.14, 1e-15);
  EXPECT_EQ(d.r00, 0.0);
  EXPECT_EQ(d.r0, 0.0);
  EXPECT_EQ(d.s0, 0.0);
  EXPECT_EQ(d.r_bb, 0.0);
  EXPECT_EQ(d.s_up0.norm(), 0.0);
  EXPECT_EQ(d.r_up.norm(), 0.0);
  EXPECT_EQ(d.s_up_i.norm(), 0.0);
}

TEST(CovariantDerivative, WarpedIsHPrimeTimesMetric) {
  for (const auto& g : {s3(), hyperbolic_warp(), exp_warp()}) {
    const auto beta = warped_form(g);
    for (const auto& x : sample(g, 20, 3)) {
      const auto B = covariant_derivative(beta, x);
      const double dh = g.warp()->dh(x[0]);
      EXPECT_LT((B - dh * g.eval(std::span<const double>(x))).cwiseAbs().maxCoeff(), 1e-8) << g.label();
    }
  }
}

TEST(BetaQuantities, RadialOnEuclidean) {
  const double c = 0.5;
  const auto beta = radial_form(euclidean(3), c);
  const std::vector<double> x{0.4, 0.2, -0.1}, y{1.0, -2.0, 0.5};
  const auto d = beta_quantities(beta, x, y);
  EXPECT_NEAR(d.r00, c * 5.25, 1e-14);
  EXPECT_EQ(d.s.norm(), 0.0);
  EXPECT_NEAR(d.b2, c * c * 0.21, 1e-15);
  EXPECT_NEAR(d.r_bb, c * d.b2, 1e-15);
  EXPECT_EQ(d.s0, 0.0);
  EXPECT_NEAR(d.beta, c * (0.4 - 0.4 - 0.05), 1e-15);
  EXPECT_NEAR(d.alpha, std::sqrt(5.25), 1e-15);
}

TEST(BetaQuantities, SplitIsExact) {
  const auto g = s3();
  const auto beta = generic_form(g);
  std::mt19937_64 rng(4);
  for (const auto& x : sample(g, 20, 4)) {
    const auto y = random_dir(3, rng);
    const auto d = beta_quantities(beta, x, y);
    EXPECT_LE((d.r + d.s - d.bij).cwiseAbs().maxCoeff(), 4e-16 * d.bij.cwiseAbs().maxCoeff());
    EXPECT_EQ((d.r - d.r.transpose()).norm(), 0.0);
    EXPECT_EQ((d.s + d.s.transpose()).norm(), 0.0);
    // s_0 = b^j s_ji y^i
    double s0 = 0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s0 += d.b_up[j] * d.s(j, i) * y[i];
    EXPECT_NEAR(d.s0, s0, 1e-14);
    EXPECT_GE(d.b2, 0.0);
  }
}

TEST(BetaQuantities, ClosedFormHasNoAntisymmetricPart) {
  // beta = d(x0 x1 + sin x2) on the round sphere chart
  const auto g = space_form(3, 1.0);
  auto eval = [](std::span<const Jet> x) { return std::vector<Jet>{x[1], x[0], cos(x[2])}; };
  const OneFormField beta(g, eval);
  for (const auto& x : sample(g, 10, 5)) EXPECT_LT(beta_tensors(beta, x).s.cwiseAbs().maxCoeff(), 1e-15);
}

TEST(BetaQuantities, ConformalIdentities) {
  std::mt19937_64 rng(6);
  for (const auto& beta : {radial_form(euclidean(3), 0.3), warped_form(s3()), warped_form(hyperbolic_warp())}) {
    const auto& g = beta.metric();
    for (const auto& x : sample(g, 20, 6)) {
      const auto y = random_dir(3, rng);
      const auto d = beta_quantities(beta, x, y);
      const double c = conformal_check(beta, {x}).c[0];
      EXPECT_NEAR(d.r00, c * d.alpha * d.alpha, 1e-10);
      EXPECT_LT(d.s_up0.norm(), 1e-10);
      EXPECT_NEAR(d.s0, 0.0, 1e-10);
      EXPECT_NEAR(d.r_bb, c * d.b2, 1e-10);
    }
  }
}

TEST(OneForm, JetNormMatchesValue) {
  const auto g = s3();
  const auto beta = generic_form(g);
  const std::vector<double> x{0.7, 0.2, -0.3};
  std::vector<Jet> xj(x.begin(), x.end());
  EXPECT_NEAR(beta.norm2(std::span<const Jet>(xj)).value(), beta.norm2(std::span<const double>(x)), 1e-14);
}

TEST(ConformalCheck, Radial) {
  const auto beta = radial_form(euclidean(3), 0.5);
  const auto rep = conformal_check(beta, sample(beta.metric(), 10, 7));
  EXPECT_TRUE(rep.pass);
  for (double c : rep.c) EXPECT_NEAR(c, 0.5, 1e-15);
  EXPECT_EQ(rep.max_residual, 0.0);
}

TEST(ConformalCheck, SphereFactorIsCosT) {
  const auto beta = warped_form(s3());
  const auto xs = sample(beta.metric(), 20, 8);
  const auto rep = conformal_check(beta, xs);
  EXPECT_TRUE(rep.pass);
  EXPECT_LT(rep.max_residual, 1e-8);
  for (std::size_t k = 0; k < xs.size(); ++k) EXPECT_NEAR(rep.c[k], std::cos(xs[k][0]), 1e-12);
}

TEST(ConformalCheck, GenericFormFailsWithoutThrowing) {
  const auto beta = generic_form(euclidean(3));
  ConformalReport rep;
  ASSERT_NO_THROW(rep = conformal_check(beta, sample(beta.metric(), 5, 9)));
  EXPECT_FALSE(rep.pass);
  EXPECT_GT(rep.max_residual, 0.1);
  EXPECT_THROW(conformal_check(beta, {}), InvalidInput);
}

TEST(KappaCheck, EuclideanRadial) {
  const auto beta = radial_form(euclidean(3), 0.5);
  const auto rep = kappa_check(beta, 0.0, sample(beta.metric(), 10, 10));
  EXPECT_TRUE(rep.pass);
  EXPECT_NEAR(rep.mean, 0.25, 1e-15);
  EXPECT_LT(rep.spread, 1e-15);
}

TEST(KappaCheck, WarpedKappa) {
  struct Case {
    MetricField g;
    double mu, kappa;
  };
  for (const auto& c : {Case{s3(), 1.0, 1.0}, Case{hyperbolic_warp(), -1.0, -1.0}, Case{exp_warp(), -1.0, 0.0}}) {
    const auto rep = kappa_check(warped_form(c.g), c.mu, sample(c.g, 30, 11));
    EXPECT_TRUE(rep.pass) << c.g.label() << " spread " << rep.spread;
    EXPECT_NEAR(rep.mean, c.kappa, 1e-12);
  }
}

TEST(KappaCheck, NonConformalIsInvalidInput) {
  const auto beta = generic_form(euclidean(3));
  EXPECT_THROW(kappa_check(beta, 0.0, sample(beta.metric(), 3, 12)), InvalidInput);
}

TEST(CDirection, MatchesMinusMuBeta) {
  std::mt19937_64 rng(13);
  struct Case {
    MetricField g;
    double mu;
  };
  for (const auto& c : {Case{s3(), 1.0}, Case{hyperbolic_warp(), -1.0}, Case{exp_warp(), -1.0}}) {
    const auto beta = warped_form(c.g);
    for (const auto& x : sample(c.g, 20, 14)) {
      const auto y = random_dir(3, rng);
      const auto chk = c_direction_check(beta, c.mu, x, y);
      EXPECT_LT(chk.defect, 1e-6) << c.g.label();
    }
  }
}
