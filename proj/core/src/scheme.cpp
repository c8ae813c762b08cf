#include "pfgb/scheme.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfgb/error.hpp"

namespace pfgb {
namespace {

constexpr double kHMargin = 0.9;

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

double squared_distance(const ScalarField& a, const ScalarField& b) {
  const double d = l2_distance(a, b);
  return d * d;
}

}  // namespace

double h_star_raw(double c2_norm) { return 1.0 / std::max(2.0, 4.0 * c2_norm); }
double h_star_raw(const ModelSpec& model) { return h_star_raw(model.c2_norm); }
double h_star(double c2_norm) { return kHMargin * h_star_raw(c2_norm); }
double h_star(const ModelSpec& model) { return h_star(model.c2_norm); }

void SchemeParams::sync() {
  vstep.h = h;
  vstep.override_h_gate = override_h_gate;
  thetastep.h = h;
}

void SchemeParams::validate(const ModelSpec& model) const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("scheme: h must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidArgument("scheme: nu must be >= 0");
  if (n_steps < 1) throw InvalidArgument("scheme: n_steps must be >= 1");
  if (record_every < 1) throw InvalidArgument("scheme: record_every must be >= 1");
  if (vstep.h != h || thetastep.h != h) throw InvalidArgument("scheme: sub-solver h differs from h");
  if (!override_h_gate && !(h < h_star(model)))
    throw InvalidArgument("scheme: h = " + fmt(h) + " is not below h_star = " + fmt(h_star(model)));
  vstep.validate();
}

ValidationReport validate_initial(const PhaseState& state, const ModelSpec& model, double nu) {
  ValidationReport rep;
  const bool same = state.w.grid() == state.eta.grid() && state.w.grid() == state.theta.grid() &&
                    state.w.size() == state.w.grid().size() && state.eta.size() == state.w.size() &&
                    state.theta.size() == state.w.size();
  rep.add("shared_grid", same);
  if (!same) return rep;
  const PotentialSpec& p = model.potential;
  rep.add("w_range", state.w.all_finite() && state.w.min() >= p.o_star && state.w.max() <= p.iota_star,
          "w in [" + fmt(state.w.min()) + ", " + fmt(state.w.max()) + "], required [" + fmt(p.o_star) + ", " +
              fmt(p.iota_star) + "]");
  rep.add("eta_range", state.eta.all_finite() && state.eta.min() >= 0.0 && state.eta.max() <= 1.0,
          "eta in [" + fmt(state.eta.min()) + ", " + fmt(state.eta.max()) + "]");
  rep.add("theta_finite", state.theta.all_finite(), "|theta|_inf = " + fmt(state.theta.max_abs()));
  const double floor = nu > 0.0 ? delta1(model.mobility) : delta0(model.mobility);
  rep.add("mobility_floor", floor > 0.0, (nu > 0.0 ? "delta1 = " : "delta0 = ") + fmt(floor));
  return rep;
}

const PhaseState& Trajectory::state_at(int step) const {
  const auto it = std::lower_bound(state_steps.begin(), state_steps.end(), step);
  if (it == state_steps.end() || *it != step)
    throw InvalidArgument("trajectory: step " + std::to_string(step) + " was not recorded");
  return states[static_cast<std::size_t>(it - state_steps.begin())];
}

Trajectory run(const PhaseState& init, const ModelSpec& model, const SchemeParams& params,
               const SchemeSink& sink) {
  params.validate(model);
  const ValidationReport init_rep = validate_initial(init, model, params.nu);
  if (!init_rep.ok()) throw InvalidArgument("scheme: initial state rejected: " + init_rep.summary());

  Trajectory traj;
  traj.h = params.h;
  traj.nu = params.nu;
  traj.outside_hypotheses = !(params.h < h_star(model));
  traj.linf_theta0 = init.theta.max_abs();
  traj.states.push_back(init);
  traj.state_steps.push_back(0);
  traj.t_grid.push_back(0.0);
  traj.energies.push_back(free_energy(init, model, params.nu));
  if (!traj.energies.back().finite()) throw StepError(0, "initial energy is not finite");
  if (sink.on_snapshot) sink.on_snapshot(0, init);

  PhaseState cur = init;
  VectorField dual;
  bool have_dual = false;
  for (int i = 1; i <= params.n_steps; ++i) {
    StepReport rep;
    rep.step = i;
    rep.t = i * params.h;
    PhaseState next;
    try {
      VStepResult v = v_step(cur.w, cur.eta, cur.theta, model, params.nu, params.vstep);
      ThetaStepResult th =
          theta_step(cur.theta, v.w, v.eta, model, params.nu, params.thetastep, have_dual ? &dual : nullptr);
      next = PhaseState{std::move(v.w), std::move(v.eta), std::move(th.theta)};
      rep.vstep = v.report;
      rep.thetastep = th.report;
      dual = std::move(th.dual);
      have_dual = true;
    } catch (const std::exception& e) {
      throw StepError(i, e.what());
    }
    rep.diss_v = (squared_distance(next.w, cur.w) + squared_distance(next.eta, cur.eta)) / (2.0 * params.h);
    ScalarField inc = next.theta;
    for (std::size_t k = 0; k < inc.size(); ++k) inc[k] -= cur.theta[k];
    const double wn = weighted_l2_norm(inc, next.w, next.eta, model.mobility);
    rep.diss_theta = wn * wn / params.h;
    rep.energy = free_energy(next, model, params.nu);
    if (!rep.energy.finite()) throw StepError(i, "energy is not finite");
    rep.max_box_violation = rep.vstep.box_violation;
    rep.linf_theta = next.theta.max_abs();

    cur = std::move(next);
    traj.reports.push_back(rep);
    traj.energies.push_back(rep.energy);
    traj.t_grid.push_back(rep.t);
    if (sink.on_step) sink.on_step(rep);
    if (i % params.record_every == 0 || i == params.n_steps) {
      traj.states.push_back(cur);
      traj.state_steps.push_back(i);
      if (sink.on_snapshot) sink.on_snapshot(i, cur);
    }
  }
  return traj;
}

PhaseState time_interpolate(const Trajectory& traj, double t, Interpolant kind) {
  const int n = traj.steps();
  const double h = traj.h;
  const double t_end = n * h;
  const double eps = 1e-12 * std::max(1.0, t_end);
  if (!(t >= -eps && t <= t_end + eps)) throw InvalidArgument("time_interpolate: t = " + fmt(t) + " out of range");
  const double s = t / h;
  const int nearest = static_cast<int>(std::lround(s));
  if (std::abs(s - nearest) * h <= eps) return traj.state_at(std::clamp(nearest, 0, n));
  const int i = std::clamp(static_cast<int>(std::floor(s)), 0, n - 1);
  switch (kind) {
    case Interpolant::PiecewiseConstantRight:
      return traj.state_at(i + 1);
    case Interpolant::PiecewiseConstantLeft:
      return traj.state_at(i);
    case Interpolant::Linear: {
      const PhaseState& a = traj.state_at(i);
      const PhaseState& b = traj.state_at(i + 1);
      const double lam = s - i;
      PhaseState out = a;
      for (std::size_t k = 0; k < out.w.size(); ++k) {
        out.w[k] = (1.0 - lam) * a.w[k] + lam * b.w[k];
        out.eta[k] = (1.0 - lam) * a.eta[k] + lam * b.eta[k];
        out.theta[k] = (1.0 - lam) * a.theta[k] + lam * b.theta[k];
      }
      return out;
    }
  }
  throw InvalidArgument("time_interpolate: unknown interpolant");
}

}  // namespace pfgb
