#pragma once

// Per-step solve for the order parameters v = [w, eta].
//
// The outer loop iterates the map S that sends a frozen argument v' to the
// unique minimizer of
//
//   (1/2h)|v - v_prev|^2 + V_D(v) + Gamma(v) + <[grad g](T v'; u), v>
//     + sum (|grad theta_prev| alpha(v) + nu |grad theta_prev|^2 beta(v)) dx^d,
//
// where T clamps both components to [0,1].  S is a contraction with ratio at
// most h L for L = |g|_{C^2([0,1]^2)}; the fixed point is the new v.  Each
// application of S is an accelerated proximal-gradient solve whose proximal
// map is the pointwise resolvent of d gamma.

#include <vector>

#include "pfgb/grid.hpp"
#include "pfgb/model.hpp"

namespace pfgb {

struct VStepParams {
  double h = 0.0;
  /// Stop when successive outer iterates differ by at most this much in L2.
  double outer_tol = 1e-10;
  /// Inner stopping threshold on h |G|, G the proximal gradient mapping.
  double inner_tol = 1e-13;
  int max_outer = 200;
  int max_inner = 200000;
  /// Permit h >= h_star (runs outside the contraction hypotheses).
  bool override_h_gate = false;

  void validate() const;
};

struct VStepReport {
  int outer_iters = 0;
  /// Last and largest measured ratio |v(k+1) - v(k)| / |v(k) - v(k-1)|.
  double final_contraction_ratio = 0.0;
  double max_contraction_ratio = 0.0;
  int measured_ratios = 0;
  /// h L, the a-priori bound on the ratio.
  double contraction_bound = 0.0;
  int inner_iters_total = 0;
  /// Largest distance of (w, eta) from [o*, iota*] x [0, 1].
  double box_violation = 0.0;
  /// L2 distance between the last two outer iterates.
  double residual = 0.0;
};

struct VStepResult {
  ScalarField w;
  ScalarField eta;
  VStepReport report;
};

/// Single application of S: minimizer for the frozen argument (w_dag, eta_dag),
/// warm-started from (w_start, eta_start).
struct FrozenSolve {
  ScalarField w;
  ScalarField eta;
  int iterations = 0;
  double residual = 0.0;
};
FrozenSolve solve_frozen(const ScalarField& w_prev, const ScalarField& eta_prev,
                         const ScalarField& theta_prev, const ScalarField& w_dag,
                         const ScalarField& eta_dag, const ScalarField& w_start,
                         const ScalarField& eta_start, const ModelSpec& model, double nu,
                         const VStepParams& params);

VStepResult v_step(const ScalarField& w_prev, const ScalarField& eta_prev, const ScalarField& theta_prev,
                   const ModelSpec& model, double nu, const VStepParams& params);

/// The convex per-step functional minimized by the v-step, evaluated with the
/// true coupling term G(v; u) in place of its linearization:
///   (1/2h)|v - v_prev|^2 + V_D(v) + Gamma(v) + G(v) + sum(alpha|grad theta| + nu beta|grad theta|^2).
/// With h = +inf the first term is dropped.
double v_step_energy(const ScalarField& w, const ScalarField& eta, const ScalarField& w_prev,
                     const ScalarField& eta_prev, const ScalarField& theta_prev, const ModelSpec& model,
                     double nu, double h);

/// Largest distance of (w, eta) from the box [o*, iota*] x [0, 1].
double box_violation(const ScalarField& w, const ScalarField& eta, const PotentialSpec& potential);

/// |v1 - v2|^2 / |v1_0 - v2_0|^2 for two converged v-steps sharing theta_prev;
/// 0/0 is reported as 0.
double v_step_perturbation_bound(const ScalarField& w1, const ScalarField& eta1, const ScalarField& w2,
                                 const ScalarField& eta2, const ScalarField& w1_prev,
                                 const ScalarField& eta1_prev, const ScalarField& w2_prev,
                                 const ScalarField& eta2_prev);

/// |[a - b]^+|^2 summed over both components, with quadrature weight.
double positive_part_sq(const ScalarField& wa, const ScalarField& etaa, const ScalarField& wb,
                        const ScalarField& etab);

}  // namespace pfgb
