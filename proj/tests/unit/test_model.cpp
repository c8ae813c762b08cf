#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pfgb/error.hpp"
#include "pfgb/model.hpp"

using namespace pfgb;

namespace {

PotentialSpec pot(Potential s, double o = 0.0, double i = 1.0) {
  PotentialSpec p;
  p.setting = s;
  p.o_star = o;
  p.iota_star = i;
  return p;
}

// Bisection on the monotone optimality residual x - r + lambda gamma'(x).
double prox_log_bisect(double lambda, double r) {
  double lo = 0.0, hi = 1.0;
  for (int it = 0; it < 200; ++it) {
    const double x = 0.5 * (lo + hi);
    const double res = x - r + lambda * 0.5 * std::log(x / (1.0 - x));
    (res > 0.0 ? hi : lo) = x;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST(Gamma, PolynomialIsZero) {
  const PotentialSpec p = pot(Potential::Polynomial);
  EXPECT_EQ(gamma_eval(p, -3.0), 0.0);
  EXPECT_EQ(gamma_eval(p, 0.4), 0.0);
  EXPECT_EQ(gamma_prox(p, 0.7, 1.7), 1.7);
}

TEST(Gamma, LogarithmicValues) {
  const PotentialSpec p = pot(Potential::Logarithmic, 0.05, 0.95);
  EXPECT_NEAR(gamma_eval(p, 0.5), -0.3465735903, 1e-10);
  EXPECT_EQ(gamma_eval(p, 0.0), 1.0);
  EXPECT_EQ(gamma_eval(p, 1.0), 1.0);
  EXPECT_TRUE(std::isinf(gamma_eval(p, -0.1)));
  EXPECT_TRUE(std::isinf(gamma_eval(p, 1.1)));
  const Interval d = gamma_subdifferential(p, 0.5);
  EXPECT_EQ(d.lo, 0.0);
  EXPECT_EQ(d.hi, 0.0);
  EXPECT_TRUE(gamma_subdifferential(p, 0.0).empty());
  EXPECT_TRUE(gamma_subdifferential(p, 1.0).empty());
}

TEST(Gamma, IndicatorValues) {
  const PotentialSpec p = pot(Potential::Indicator);
  EXPECT_EQ(gamma_eval(p, 0.0), 0.0);
  EXPECT_EQ(gamma_eval(p, 1.0), 0.0);
  EXPECT_TRUE(std::isinf(gamma_eval(p, 1.0 + 1e-12)));
  EXPECT_EQ(gamma_prox(p, 0.3, -2.0), 0.0);
  EXPECT_EQ(gamma_prox(p, 0.3, 0.25), 0.25);
  EXPECT_EQ(gamma_prox(p, 0.3, 4.0), 1.0);
  EXPECT_TRUE(std::isinf(gamma_subdifferential(p, 0.0).lo));
  EXPECT_EQ(gamma_subdifferential(p, 0.0).hi, 0.0);
  EXPECT_TRUE(std::isinf(gamma_subdifferential(p, 1.0).hi));
  EXPECT_TRUE(gamma_subdifferential(p, 2.0).empty());
}

TEST(Gamma, LogProxMatchesBisection) {
  const PotentialSpec p = pot(Potential::Logarithmic, 0.05, 0.95);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> R(-3.0, 4.0), L(1e-3, 2.0);
  for (int t = 0; t < 500; ++t) {
    const double r = R(rng), lambda = L(rng);
    const double x = gamma_prox(p, lambda, r);
    ASSERT_GT(x, 0.0);
    ASSERT_LT(x, 1.0);
    EXPECT_NEAR(x, prox_log_bisect(lambda, r), 1e-12) << "r=" << r << " lambda=" << lambda;
  }
  EXPECT_NEAR(gamma_prox(p, 0.4, 0.5), 0.5, 1e-15);
  EXPECT_THROW(gamma_prox(p, 0.0, 0.5), InvalidArgument);
}

TEST(Gamma, ProxIsFirmlyNonexpansive) {
  for (Potential s : {Potential::Logarithmic, Potential::Indicator}) {
    const PotentialSpec p = pot(s, 0.05, 0.95);
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> R(-2.0, 3.0);
    for (int t = 0; t < 500; ++t) {
      const double a = R(rng), b = R(rng);
      const double pa = gamma_prox(p, 0.2, a), pb = gamma_prox(p, 0.2, b);
      EXPECT_LE((pa - pb) * (pa - pb), (pa - pb) * (a - b) + 1e-14);
    }
  }
}

TEST(Potential, PolynomialValues) {
  const PotentialSpec p = pot(Potential::Polynomial);
  EXPECT_DOUBLE_EQ(g_eval(p, 0.5, 0.5), 0.015625);
  EXPECT_EQ(g_eval(p, 0.0, 0.0), 0.0);
  EXPECT_EQ(g_eval(p, 1.0, 1.0), 0.0);
  const Vec2 d = grad_g(p, 0.5, 0.0);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[1], -0.5);
}

TEST(Potential, ConcaveValues) {
  const PotentialSpec p = pot(Potential::Indicator);
  EXPECT_DOUBLE_EQ(g_eval(p, 0.5, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(g_eval(p, 1.0, 1.0), -0.125);
  const Vec2 d = grad_g(p, 1.0, 0.0);
  EXPECT_DOUBLE_EQ(d[0], 0.5);
  EXPECT_DOUBLE_EQ(d[1], -1.0);
}

TEST(Potential, DerivativesMatchFiniteDifferences) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> U(0.0, 1.0), Uu(-0.3, 0.3);
  for (Potential s : {Potential::Polynomial, Potential::Logarithmic, Potential::Indicator}) {
    PotentialSpec p = pot(s, 0.05, 0.95);
    p.u = Uu(rng);
    p.c = 0.5 + U(rng);
    for (int t = 0; t < 200; ++t) {
      const double w = U(rng), e = U(rng), d = 1e-6;
      const Vec2 gr = grad_g(p, w, e);
      const double fw = (g_eval(p, w + d, e) - g_eval(p, w - d, e)) / (2 * d);
      const double fe = (g_eval(p, w, e + d) - g_eval(p, w, e - d)) / (2 * d);
      EXPECT_NEAR(fw, gr[0], 1e-6 * (1 + std::abs(gr[0])));
      EXPECT_NEAR(fe, gr[1], 1e-6 * (1 + std::abs(gr[1])));
      const Sym2 H = hess_g(p, w, e);
      const Vec2 gp = grad_g(p, w + d, e), gm = grad_g(p, w - d, e);
      EXPECT_NEAR((gp[0] - gm[0]) / (2 * d), H[0], 1e-6 * (1 + std::abs(H[0])));
      EXPECT_NEAR((gp[1] - gm[1]) / (2 * d), H[1], 1e-6);
      const Vec2 ep = grad_g(p, w, e + d), em = grad_g(p, w, e - d);
      EXPECT_NEAR((ep[1] - em[1]) / (2 * d), H[2], 1e-6);
    }
  }
}

TEST(SpectralNorm, Examples) {
  EXPECT_DOUBLE_EQ(spectral_norm({2.0, 0.0, -3.0}), 3.0);
  EXPECT_DOUBLE_EQ(spectral_norm({0.0, -1.0, 1.0}), (1.0 + std::sqrt(5.0)) / 2.0);
  EXPECT_DOUBLE_EQ(spectral_norm({1.0, 1.0, 1.0}), 2.0);
}

TEST(C2Norm, ConcaveSettingsGiveGoldenRatio) {
  for (Potential s : {Potential::Logarithmic, Potential::Indicator}) {
    const C2NormEstimate e = estimate_c2_norm(pot(s, 0.05, 0.95));
    EXPECT_NEAR(e.value, std::numbers::phi, 1e-12);
    EXPECT_EQ(e.resolution, 401);
  }
}

TEST(C2Norm, PolynomialAndResolutionStability) {
  const PotentialSpec p = pot(Potential::Polynomial);
  const double L = estimate_c2_norm(p).value;
  EXPECT_NEAR(L, 2.28078, 1e-5);
  EXPECT_LT(std::abs(estimate_c2_norm(p, 801).value - L), 1e-3);
  PotentialSpec q = p;
  q.u = 0.2;
  EXPECT_LT(std::abs(estimate_c2_norm(q, 801).value - estimate_c2_norm(q).value), 1e-3);
  EXPECT_THROW(estimate_c2_norm(p, 1), InvalidArgument);
}

TEST(CStar, BoundsPotentialFromBelow) {
  std::mt19937_64 rng(14);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (Potential s : {Potential::Polynomial, Potential::Logarithmic, Potential::Indicator}) {
    const PotentialSpec p = pot(s, 0.05, 0.95);
    const double cs = estimate_c_star(p);
    for (int t = 0; t < 2000; ++t) {
      const double w = U(rng), e = U(rng);
      EXPECT_GE(gamma_eval(p, w) + g_eval(p, w, e), cs);
    }
  }
}

TEST(Mobility, KobayashiValues) {
  MobilitySpec m;
  const MobilityValues v = mobility_eval(m, 0.5, 1.0);
  EXPECT_DOUBLE_EQ(v.a0, 0.505);
  EXPECT_DOUBLE_EQ(v.a, 0.505);
  EXPECT_DOUBLE_EQ(v.b, 0.13);
  EXPECT_EQ(v.grad_a[0], 0.0);
  EXPECT_EQ(v.grad_a[1], 1.0);
  EXPECT_EQ(v.grad_b[0], 0.5);
  EXPECT_EQ(v.grad_b[1], 0.0);
  EXPECT_DOUBLE_EQ(delta0(m), 0.005);
  EXPECT_DOUBLE_EQ(delta1(m), 0.005);
  EXPECT_DOUBLE_EQ(delta_star(m), 0.505);
  EXPECT_DOUBLE_EQ(alpha0_floor(m), 0.005);
}

TEST(Mobility, ConstantAndValidation) {
  MobilitySpec m;
  m.kind = MobilityKind::Constant;
  m.a0 = 2.0;
  m.a = 0.5;
  m.b = 3.0;
  const MobilityValues v = mobility_eval(m, 0.1, 0.9);
  EXPECT_EQ(v.a0, 2.0);
  EXPECT_EQ(v.a, 0.5);
  EXPECT_EQ(v.b, 3.0);
  EXPECT_EQ(delta0(m), 0.5);
  EXPECT_EQ(delta1(m), 2.0);
  m.a0 = 0.0;
  EXPECT_THROW(m.validate(), InvalidArgument);
  m.a0 = 1.0;
  m.b = -1.0;
  EXPECT_THROW(m.validate(), InvalidArgument);
  MobilitySpec k;
  k.kappa = -1.0;
  EXPECT_THROW(k.validate(), InvalidArgument);
}

TEST(Mobility, KobayashiIsConvexAlongSegments) {
  const MobilitySpec m;
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> U(-0.5, 1.5);
  for (int t = 0; t < 1000; ++t) {
    const double w1 = U(rng), e1 = U(rng), w2 = U(rng), e2 = U(rng);
    const MobilityValues a = mobility_eval(m, w1, e1), b = mobility_eval(m, w2, e2);
    const MobilityValues mid = mobility_eval(m, 0.5 * (w1 + w2), 0.5 * (e1 + e2));
    EXPECT_LE(mid.a, 0.5 * (a.a + b.a) + 1e-15);
    EXPECT_LE(mid.b, 0.5 * (a.b + b.b) + 1e-15);
  }
}

TEST(PotentialSpec, Validation) {
  PotentialSpec p = pot(Potential::Polynomial);
  p.c = 0.0;
  EXPECT_THROW(p.validate(), InvalidArgument);
  EXPECT_THROW(pot(Potential::Polynomial, 0.6, 0.4).validate(), InvalidArgument);
  EXPECT_THROW(pot(Potential::Logarithmic, 0.0, 0.95).validate(), InvalidArgument);
  EXPECT_NO_THROW(pot(Potential::Logarithmic, 0.05, 0.95).validate());
}

TEST(CheckA4, DefaultSettingsSatisfyCornerConditions) {
  for (Potential s : {Potential::Polynomial, Potential::Indicator}) {
    const ModelSpec m = ModelSpec::make(pot(s), MobilitySpec{});
    const ValidationReport r = check_a4(m);
    EXPECT_TRUE(r.ok()) << r.summary();
  }
  MobilitySpec k0;
  k0.kappa = 0.0;
  EXPECT_TRUE(check_a4(ModelSpec::make(pot(Potential::Indicator), k0)).ok());
}

TEST(CheckA4, LogarithmicWithKobayashiFailsOnlyBetaSign) {
  // beta_w(o*, 0) = o* > 0 once o* is pulled inside (0, 1).
  const ModelSpec m = ModelSpec::make(pot(Potential::Logarithmic, 0.05, 0.95), MobilitySpec{});
  const ValidationReport r = check_a4(m);
  int failed = 0;
  for (const auto& item : r.items) {
    if (item.passed) continue;
    ++failed;
    EXPECT_EQ(item.name, "beta_w(o_star,0) <= 0");
  }
  EXPECT_EQ(failed, 1);
}

TEST(CheckA4, DetectsViolations) {
  // A logarithmic well placed too close to 1/2 cannot hold the lower corner.
  const ModelSpec m = ModelSpec::make(pot(Potential::Logarithmic, 0.45, 0.95), MobilitySpec{});
  const ValidationReport r = check_a4(m);
  EXPECT_FALSE(r.ok());
  EXPECT_NE(r.summary().find("o_star"), std::string::npos);
  // Polynomial potential with an interior corner violates the derivative sign.
  const ModelSpec q = ModelSpec::make(pot(Potential::Polynomial, 0.3, 1.0), MobilitySpec{});
  EXPECT_FALSE(check_a4(q).ok());
}
