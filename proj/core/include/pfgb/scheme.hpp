#pragma once

// The time-discrete scheme: per step a v-solve followed by a theta-solve.

#include <functional>
#include <vector>

#include "pfgb/energy.hpp"
#include "pfgb/model.hpp"
#include "pfgb/thetastep.hpp"
#include "pfgb/vstep.hpp"

namespace pfgb {

/// 1 / max(2, 4L), the step bound without safety margin.
double h_star_raw(double c2_norm);
double h_star_raw(const ModelSpec& model);
/// 0.9 * h_star_raw.
double h_star(double c2_norm);
double h_star(const ModelSpec& model);

struct SchemeParams {
  double h = 0.0;
  double nu = 0.0;
  int n_steps = 1;
  VStepParams vstep{};
  ThetaStepParams thetastep{};
  int record_every = 1;
  /// Permit h >= h_star; the trajectory is then flagged.
  bool override_h_gate = false;

  /// Copies h and the override flag into the sub-solver parameters.
  void sync();
  void validate(const ModelSpec& model) const;
};

ValidationReport validate_initial(const PhaseState& state, const ModelSpec& model, double nu);

struct StepReport {
  int step = 0;
  double t = 0.0;
  EnergyBreakdown energy{};
  /// (1/2h)|v_i - v_{i-1}|^2
  double diss_v = 0.0;
  /// (1/h)|sqrt(alpha0(v_i)) (theta_i - theta_{i-1})|^2
  double diss_theta = 0.0;
  VStepReport vstep{};
  ThetaStepReport thetastep{};
  double max_box_violation = 0.0;
  double linf_theta = 0.0;
};

struct Trajectory {
  double h = 0.0;
  double nu = 0.0;
  bool outside_hypotheses = false;
  /// Snapshots and the step index of each; step 0 is always recorded.
  std::vector<PhaseState> states;
  std::vector<int> state_steps;
  /// One entry per completed step.
  std::vector<StepReport> reports;
  /// energies[i] is the energy after step i; energies[0] is the initial energy.
  std::vector<EnergyBreakdown> energies;
  std::vector<double> t_grid;
  double linf_theta0 = 0.0;

  int steps() const noexcept { return static_cast<int>(reports.size()); }
  /// Snapshot at the given step; throws if it was not recorded.
  const PhaseState& state_at(int step) const;
};

struct SchemeSink {
  std::function<void(const StepReport&)> on_step;
  std::function<void(int step, const PhaseState&)> on_snapshot;
};

Trajectory run(const PhaseState& init, const ModelSpec& model, const SchemeParams& params,
               const SchemeSink& sink = {});

enum class Interpolant { PiecewiseConstantRight, PiecewiseConstantLeft, Linear };

/// Time interpolants of the recorded states; requires the nodes bracketing t.
PhaseState time_interpolate(const Trajectory& traj, double t, Interpolant kind);

}  // namespace pfgb
