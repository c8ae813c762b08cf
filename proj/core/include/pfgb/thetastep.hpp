#pragma once

// Orientation update.  For fixed v_new the new theta minimizes
//
//   (1/2h) |sqrt(alpha0(v)) (theta - theta_prev)|^2 + Phi_nu(v; theta),
//
// a weighted ROF problem with an extra quadratic gradient penalty when nu > 0.

#include <optional>
#include <span>
#include <vector>

#include "pfgb/grid.hpp"
#include "pfgb/model.hpp"

namespace pfgb {

/// Generic instance
///   P(theta) = dx^d sum_i a_i/2 (theta_i - anchor_i)^2
///            + dx^d sum_c (rho_c |grad theta|_c + q_c |grad theta|_c^2).
struct ThetaProblem {
  GridSpec grid{};
  std::vector<double> data_weight;  // a = alpha0(v) / h, strictly positive
  std::vector<double> anchor;       // theta_prev
  std::vector<double> tv_weight;    // rho = alpha(v) >= 0
  std::vector<double> quad_weight;  // q = nu beta(v) >= 0

  static ThetaProblem from_state(const ScalarField& theta_prev, const ScalarField& w, const ScalarField& eta,
                                 const ModelSpec& model, double nu, double h);
  void validate() const;

  double objective(std::span<const double> theta) const;
  /// Dual objective at a vector field y = (yx, yy); -inf when y violates
  /// |y_c| <= rho_c at a cell with q_c = 0.
  double dual_objective(std::span<const double> yx, std::span<const double> yy) const;
};

struct ThetaStepParams {
  double h = 0.0;
  /// Stop once the duality gap is at most gap_tol * (1 + |objective|).
  double gap_tol = 1e-10;
  int max_iters = 2'000'000;
  /// Primal / dual step sizes; 0 selects them from the operator-norm bound.
  double tau = 0.0;
  double sigma = 0.0;
  /// Smoothing parameter for theta_step_smoothed.
  double smoothing_mu = 1e-6;

  void validate(const GridSpec& grid) const;
};

struct ThetaStepReport {
  int iters = 0;
  double primal = 0.0;
  double dual = 0.0;
  double duality_gap = 0.0;
  double linf_in = 0.0;
  double linf_out = 0.0;
  /// Phi(v; theta_prev) - Phi(v; theta_new) - (1/h)|sqrt(alpha0)(theta_new - theta_prev)|^2.
  double energy_decrease = 0.0;
  /// 1D only: the PDHG iterate was replaced by a solution whose optimality
  /// conditions were verified exactly.
  bool exact = false;
};

struct ThetaStepResult {
  ScalarField theta;
  ThetaStepReport report;
  /// Final dual field, usable as a warm start.
  VectorField dual;
};

/// Chambolle-Pock primal-dual iteration (accelerated on the strongly convex
/// data term) with a duality-gap stopping rule.
ThetaStepResult solve_theta_problem(const ThetaProblem& problem, const ThetaStepParams& params,
                                    const VectorField* warm_dual = nullptr);

ThetaStepResult theta_step(const ScalarField& theta_prev, const ScalarField& w_new, const ScalarField& eta_new,
                           const ModelSpec& model, double nu, const ThetaStepParams& params,
                           const VectorField* warm_dual = nullptr);

/// Independent validator: |grad theta| replaced by sqrt(|grad theta|^2 + mu^2) - mu,
/// minimized by gradient descent with Barzilai-Borwein steps and Armijo
/// backtracking until the gradient norm is at most grad_tol.
struct SmoothedSolve {
  ScalarField theta;
  int iters = 0;
  double smoothed_objective = 0.0;
  double objective = 0.0;  // exact (unsmoothed) objective at theta
};
SmoothedSolve solve_theta_smoothed(const ThetaProblem& problem, double mu, double grad_tol = 1e-10,
                                   int max_iters = 20'000'000);
ScalarField theta_step_smoothed(const ScalarField& theta_prev, const ScalarField& w_new,
                                const ScalarField& eta_new, const ModelSpec& model, double nu, double h,
                                double mu);

/// Reference minimizer for small instances (<= 64 cells): weighted-average
/// subgradient descent followed by a smoothing-continuation Newton polish.
struct OracleResult {
  ScalarField theta;
  double objective = 0.0;
  double subgradient_objective = 0.0;
  int newton_steps = 0;
};
OracleResult oracle_theta_min(const ThetaProblem& problem, int subgradient_iters = 100'000);

struct TMonotonicityReport {
  /// max (theta_low_out - theta_high_out)^+.
  double excess = 0.0;
  /// |sqrt(alpha0)(theta_low_out - theta_high_out)| and the same for the inputs.
  double weighted_out = 0.0;
  double weighted_in = 0.0;
  double gap_low = 0.0;
  double gap_high = 0.0;
};
TMonotonicityReport tmonotonicity_check(const ScalarField& w_new, const ScalarField& eta_new,
                                        const ScalarField& theta_prev_low, const ScalarField& theta_prev_high,
                                        const ModelSpec& model, double nu, const ThetaStepParams& params);

/// |sqrt(alpha0(v)) f|_{L2}.
double weighted_l2_norm(const ScalarField& f, const ScalarField& w, const ScalarField& eta,
                        const MobilitySpec& mobility);

}  // namespace pfgb
