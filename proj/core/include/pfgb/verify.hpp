#pragma once

// Invariant checks over trajectories and single steps, seeded random fields,
// and the nu -> 0 study.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "pfgb/scheme.hpp"

namespace pfgb {

struct CheckResult {
  std::string name;
  bool passed = false;
  double worst_violation = 0.0;
  double tolerance = 0.0;
  std::string context;

  /// passed is set to worst_violation <= tolerance.
  static CheckResult make(std::string name, double worst_violation, double tolerance, std::string context = {});
  static std::string csv_header();  // "name,passed,worst_violation,tolerance,context"
  std::string csv_row() const;
};

bool all_passed(const std::vector<CheckResult>& checks) noexcept;

// --- seeded random fields ---------------------------------------------------

/// Uniform double in [0,1) from the top 53 bits; identical on every platform.
double uniform01(std::mt19937_64& rng);
double uniform(std::mt19937_64& rng, double lo, double hi);

/// Smooth field: a random low-frequency cosine mixture rescaled onto [lo, hi].
ScalarField cosine_field(const GridSpec& grid, std::mt19937_64& rng, double lo, double hi, int max_mode = 3);

/// Piecewise-constant grains: n_grains distinct seed cells, each cell takes the
/// value of its nearest seed (ties to the lower seed index); values drawn in [lo, hi].
ScalarField grain_field(const GridSpec& grid, std::mt19937_64& rng, int n_grains, double lo, double hi);

/// w, eta smooth in the admissible box, theta a cosine mixture in [-amplitude, amplitude].
PhaseState random_state(const GridSpec& grid, const ModelSpec& model, std::uint64_t seed, double amplitude = 1.0);

// --- trajectory checks --------------------------------------------------------

inline constexpr double kStepSlack = 1e-8;

/// diss_v + diss_theta + F_i - F_{i-1} <= slack (1 + |F_{i-1}|) at every step;
/// the violation is reported after dividing by (1 + |F_{i-1}|).
CheckResult check_dissipation(const Trajectory& traj, double slack = kStepSlack);
/// Summed dissipation plus F_n - F_0, against slack * sum(1 + |F_{i-1}|).
CheckResult check_telescoped(const Trajectory& traj, double slack = kStepSlack);
/// |F_i| <= |F_0| + |c*| |Omega| for every i.
CheckResult check_energy_bound(const Trajectory& traj, const ModelSpec& model, double slack = kStepSlack);
/// (w, eta) in [o*, iota*] x [0, 1] at every step.
CheckResult check_box(const Trajectory& traj, const ModelSpec& model, double tol = kStepSlack);
/// |theta_i|_inf <= |theta_{i-1}|_inf at every step.
CheckResult check_linfty(const Trajectory& traj, double tol = kStepSlack);
/// Measured outer ratios against h L; the violation is max(ratio / (h L)) - 1.
CheckResult check_contraction(const Trajectory& traj, double rel_tol = 1e-6);

// --- model and operator checks ------------------------------------------------

/// Phi_0 + nu delta1 S <= Phi_nu <= Phi_0 + nu delta*(1) S with S = sum |grad theta|^2 dx^d.
CheckResult check_gamma_sandwich(const ModelSpec& model, double nu, const GridSpec& grid, int n_samples,
                                 std::uint64_t seed, double rel_tol = 1e-12);
/// Central differences (step 1e-6) of g, alpha and beta against the analytic gradients.
CheckResult check_derivatives(const ModelSpec& model, int n_points, std::uint64_t seed, double rel_tol = 1e-6);
/// <grad f, p> = -<f, div p> and <Lap f, g> = <f, Lap g> on random fields.
std::vector<CheckResult> check_grid_identities(const GridSpec& grid, int n_trials, std::uint64_t seed,
                                               double tol = 1e-13);

// --- single-step checks -------------------------------------------------------

/// theta_step against oracle_theta_min on random instances with at most 64 cells.
/// Returns the objective agreement and the largest terminal duality gap.
std::vector<CheckResult> check_theta_oracle(const ModelSpec& model, double nu, int n_instances, std::uint64_t seed,
                                            double tol = 1e-6, double gap_limit = 1e-8);
/// Ordered theta pairs through one theta step: order excess and weighted-L2 nonexpansiveness.
std::vector<CheckResult> check_tmonotonicity(const ModelSpec& model, double nu, const GridSpec& grid, double h,
                                             int n_pairs, std::uint64_t seed, double tol = kStepSlack);
/// Pairs of v-steps from perturbed v_prev: squared-distance ratio <= 2, and
/// for ordered perturbations the positive part of the output difference.
std::vector<CheckResult> check_perturbation(const ModelSpec& model, double nu, const GridSpec& grid, double h,
                                            int n_pairs, std::uint64_t seed, double amplitude = 1e-3,
                                            double ratio_tol = 1e-6);

// --- nu -> 0 study ------------------------------------------------------------

struct StudyRun {
  double nu = 0.0;
  /// sum_i h nu sum beta(v_i)|grad theta_i|^2 dx^d
  double nu_dirichlet_aggregate = 0.0;
  /// sum_i h sum alpha(v_i)|grad theta_i| dx^d
  double wtv_aggregate = 0.0;
  double final_energy = 0.0;
  CheckResult dissipation;
};

struct StudyReport {
  std::vector<StudyRun> runs;
  /// Final aggregate below trend_factor times the first.
  CheckResult trend;
  /// Aggregates nonincreasing along the schedule.
  bool monotone = false;
};

inline constexpr double kTrendFactor = 0.1;

/// Runs the scheme once per nu (schedule strictly decreasing, entries >= 0),
/// using up to `threads` worker threads.
StudyReport nu_limit_study(const PhaseState& init, const ModelSpec& model, const std::vector<double>& schedule,
                           const SchemeParams& params, int threads = 1);

}  // namespace pfgb
