#include <gtest/gtest.h>

#include <cmath>

#include "pfgb/error.hpp"
#include "pfgb/scheme.hpp"
#include "pfgb/verify.hpp"
#include "pfgb/vstep.hpp"

using namespace pfgb;

namespace {

ModelSpec model_g(Potential s, double u = 0.0) {
  PotentialSpec p;
  p.setting = s;
  p.u = u;
  if (s == Potential::Logarithmic) {
    p.o_star = 0.05;
    p.iota_star = 0.95;
  }
  return ModelSpec::make(p, MobilitySpec{});
}

VStepParams params_for(const ModelSpec& m, double frac = 0.5) {
  VStepParams vp;
  vp.h = frac * h_star(m);
  return vp;
}

// Gradient of the per-step functional for the polynomial setting with
// Kobayashi mobilities, divided by the cell measure.
void oracle_gradient(const ScalarField& w, const ScalarField& e, const ScalarField& wp, const ScalarField& ep,
                     const ScalarField& theta, const PotentialSpec& p, double kappa, double nu, double h,
                     ScalarField& gw, ScalarField& ge) {
  const ScalarField lw = neumann_laplacian(w), le = neumann_laplacian(e);
  const ScalarField s = gradient_magnitude(theta);
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double x = w[k], y = e[k];
    const double dg_w = p.c * (x * (x - 1.0) * (x - 0.5) - p.u * x * (x - 1.0)) + (x - y);
    const double dg_e = y - x;
    gw[k] = (x - wp[k]) / h - lw[k] + dg_w + nu * s[k] * s[k] * x;
    ge[k] = (y - ep[k]) / h - le[k] + dg_e + s[k] * y;
  }
  (void)kappa;
}

}  // namespace

TEST(VStep, WellBottomIsReachedImmediately) {
  const ModelSpec m = model_g(Potential::Polynomial);
  const GridSpec g = GridSpec::line(16, 0.5);
  const ScalarField one(g, 1.0), th(g, 0.25);
  const VStepResult r = v_step(one, one, th, m, 0.1, params_for(m));
  EXPECT_EQ(r.report.outer_iters, 1);
  EXPECT_EQ(r.report.residual, 0.0);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_EQ(r.w[k], 1.0);
    EXPECT_EQ(r.eta[k], 1.0);
  }
}

TEST(VStep, MatchesGradientDescentOracle) {
  const ModelSpec m = model_g(Potential::Polynomial, 0.1);
  const GridSpec g = GridSpec::line(24, 0.5);
  const double nu = 0.2;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const PhaseState s = random_state(g, m, seed);
    const VStepParams vp = params_for(m);
    const VStepResult r = v_step(s.w, s.eta, s.theta, m, nu, vp);

    const ScalarField mag = gradient_magnitude(s.theta);
    const double smax = mag.max();
    const double lip = 1.0 / vp.h + grad_operator_norm_bound(g) + m.c2_norm + smax + nu * smax * smax + 1.0;
    ScalarField w = s.w, e = s.eta, gw(g), ge(g);
    double gnorm = 1.0;
    for (int it = 0; it < 200000 && gnorm > 1e-13; ++it) {
      oracle_gradient(w, e, s.w, s.eta, s.theta, m.potential, m.mobility.kappa, nu, vp.h, gw, ge);
      gnorm = std::sqrt(dot(gw.values(), gw.values()) + dot(ge.values(), ge.values()));
      for (std::size_t k = 0; k < g.size(); ++k) {
        w[k] -= gw[k] / lip;
        e[k] -= ge[k] / lip;
      }
    }
    ASSERT_LE(gnorm, 1e-13);
    EXPECT_LE(std::hypot(l2_distance(w, r.w), l2_distance(e, r.eta)), 1e-7);
  }
}

TEST(VStep, ContractionRatiosStayBelowBound) {
  for (Potential p : {Potential::Polynomial, Potential::Logarithmic, Potential::Indicator}) {
    const ModelSpec m = model_g(p);
    const VStepParams vp = params_for(m);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PhaseState s = random_state(GridSpec::line(32, 0.5), m, seed);
      const VStepResult r = v_step(s.w, s.eta, s.theta, m, 0.1, vp);
      EXPECT_DOUBLE_EQ(r.report.contraction_bound, vp.h * m.c2_norm);
      EXPECT_LE(r.report.max_contraction_ratio, r.report.contraction_bound * (1.0 + 1e-6)) << to_string(p);
      EXPECT_LE(r.report.residual, vp.outer_tol);
    }
  }
}

TEST(VStep, StaysInsideBox) {
  for (Potential p : {Potential::Polynomial, Potential::Logarithmic, Potential::Indicator}) {
    const ModelSpec m = model_g(p);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PhaseState s = random_state(GridSpec::plane(8, 8, 0.5), m, seed, 2.0);
      const VStepResult r = v_step(s.w, s.eta, s.theta, m, 0.0, params_for(m));
      EXPECT_LE(r.report.box_violation, 1e-9) << to_string(p);
      EXPECT_EQ(r.report.box_violation, box_violation(r.w, r.eta, m.potential));
    }
  }
}

TEST(VStep, DecreasesPerStepFunctional) {
  for (Potential p : {Potential::Polynomial, Potential::Logarithmic, Potential::Indicator}) {
    const ModelSpec m = model_g(p);
    const VStepParams vp = params_for(m);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const PhaseState s = random_state(GridSpec::line(32, 0.5), m, seed);
      const VStepResult r = v_step(s.w, s.eta, s.theta, m, 0.1, vp);
      const double after = v_step_energy(r.w, r.eta, s.w, s.eta, s.theta, m, 0.1, vp.h);
      const double before = v_step_energy(s.w, s.eta, s.w, s.eta, s.theta, m, 0.1, vp.h);
      EXPECT_LE(after, before + 1e-10 * (1.0 + std::abs(before)));
    }
  }
}

TEST(VStep, Deterministic) {
  const ModelSpec m = model_g(Potential::Logarithmic);
  const PhaseState s = random_state(GridSpec::plane(6, 7, 0.5), m, 4);
  const VStepResult a = v_step(s.w, s.eta, s.theta, m, 0.1, params_for(m));
  const VStepResult b = v_step(s.w, s.eta, s.theta, m, 0.1, params_for(m));
  EXPECT_EQ(a.w, b.w);
  EXPECT_EQ(a.eta, b.eta);
  EXPECT_EQ(a.report.outer_iters, b.report.outer_iters);
}

TEST(VStep, PerturbationRatioAndOrder) {
  for (Potential p : {Potential::Polynomial, Potential::Indicator}) {
    const ModelSpec m = model_g(p);
    const auto res = check_perturbation(m, 0.1, GridSpec::line(32, 0.5), 0.5 * h_star(m), 5, 9);
    for (const CheckResult& c : res) EXPECT_TRUE(c.passed) << c.csv_row();
  }
}

TEST(VStep, PerturbationBoundHelper) {
  const GridSpec g = GridSpec::line(2, 1.0);
  const ScalarField z(g, 0.0), a(g, {1.0, 0.0}), b(g, {2.0, 0.0});
  EXPECT_EQ(v_step_perturbation_bound(z, z, z, z, z, z, z, z), 0.0);
  EXPECT_TRUE(std::isinf(v_step_perturbation_bound(a, z, z, z, z, z, z, z)));
  EXPECT_DOUBLE_EQ(v_step_perturbation_bound(b, z, z, z, a, z, z, z), 4.0);
  EXPECT_DOUBLE_EQ(positive_part_sq(b, a, a, b), 1.0);
}

TEST(VStep, RefusesStepAtOrAboveGate) {
  const ModelSpec m = model_g(Potential::Polynomial);
  const PhaseState s = random_state(GridSpec::line(16, 0.5), m, 1);
  VStepParams vp;
  vp.h = h_star(m);
  EXPECT_THROW(v_step(s.w, s.eta, s.theta, m, 0.0, vp), InvalidArgument);
  vp.override_h_gate = true;
  const VStepResult r = v_step(s.w, s.eta, s.theta, m, 0.0, vp);
  EXPECT_LE(r.report.max_contraction_ratio, r.report.contraction_bound);
}

TEST(VStep, RejectsBadArguments) {
  const ModelSpec m = model_g(Potential::Polynomial);
  const PhaseState s = random_state(GridSpec::line(16, 0.5), m, 1);
  VStepParams vp = params_for(m);
  EXPECT_THROW(v_step(s.w, s.eta, s.theta, m, -0.1, vp), InvalidArgument);
  ScalarField bad = s.theta;
  bad[3] = std::nan("");
  EXPECT_THROW(v_step(s.w, s.eta, bad, m, 0.0, vp), InvalidArgument);
  EXPECT_THROW(v_step(s.w, s.eta, ScalarField(GridSpec::line(8, 0.5)), m, 0.0, vp), InvalidArgument);
  vp.h = 0.0;
  EXPECT_THROW(v_step(s.w, s.eta, s.theta, m, 0.0, vp), InvalidArgument);
}

TEST(VStep, InnerCapRaises) {
  const ModelSpec m = model_g(Potential::Polynomial);
  const PhaseState s = random_state(GridSpec::line(16, 0.5), m, 1);
  VStepParams vp = params_for(m);
  vp.max_inner = 2;
  EXPECT_THROW(v_step(s.w, s.eta, s.theta, m, 0.0, vp), InnerNoConvergence);
  vp = params_for(m);
  vp.max_outer = 1;
  EXPECT_THROW(v_step(s.w, s.eta, s.theta, m, 0.0, vp), OuterNoConvergence);
}
