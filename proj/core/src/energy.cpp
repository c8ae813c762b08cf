#include "pfgb/energy.hpp"

#include <cmath>

#include "pfgb/error.hpp"

namespace pfgb {

void PhaseState::require_consistent() const {
  require_same_grid(w.grid(), eta.grid(), "PhaseState");
  require_same_grid(w.grid(), theta.grid(), "PhaseState");
}

bool EnergyBreakdown::finite() const noexcept { return std::isfinite(total); }

MobilityFields mobility_fields(const ScalarField& w, const ScalarField& eta, const MobilitySpec& spec) {
  require_same_grid(w.grid(), eta.grid(), "mobility_fields");
  MobilityFields f{ScalarField(w.grid()), ScalarField(w.grid()), ScalarField(w.grid())};
  for (std::size_t k = 0; k < w.size(); ++k) {
    const MobilityValues m = mobility_eval(spec, w[k], eta[k]);
    f.a0[k] = m.a0;
    f.a[k] = m.a;
    f.b[k] = m.b;
  }
  return f;
}

double phi_nu(const ScalarField& w, const ScalarField& eta, const ScalarField& theta,
              const ModelSpec& model, double nu) {
  require_same_grid(w.grid(), theta.grid(), "phi_nu");
  require_same_grid(eta.grid(), theta.grid(), "phi_nu");
  const VectorField g = gradient(theta);
  double tv = 0.0;
  double quad = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    const MobilityValues m = mobility_eval(model.mobility, w[k], eta[k]);
    const double s = g.norm_at(k);
    tv += m.a * s;
    quad += m.b * s * s;
  }
  const double meas = theta.grid().cell_measure();
  return (tv + nu * quad) * meas;
}

EnergyBreakdown free_energy(const PhaseState& state, const ModelSpec& model, double nu) {
  state.require_consistent();
  const double meas = state.grid().cell_measure();
  EnergyBreakdown e;
  e.dirichlet_v = dirichlet_energy(state.w) + dirichlet_energy(state.eta);

  double gam = 0.0;
  double gg = 0.0;
  for (std::size_t k = 0; k < state.w.size(); ++k) {
    gam += gamma_eval(model.potential, state.w[k]);
    gg += g_eval(model.potential, state.w[k], state.eta[k]);
  }
  e.gamma_term = gam * meas;
  e.g_term = gg * meas;

  const VectorField g = gradient(state.theta);
  double tv = 0.0;
  double quad = 0.0;
  for (std::size_t k = 0; k < state.theta.size(); ++k) {
    const MobilityValues m = mobility_eval(model.mobility, state.w[k], state.eta[k]);
    const double s = g.norm_at(k);
    tv += m.a * s;
    quad += m.b * s * s;
  }
  e.wtv_term = tv * meas;
  e.nu_dirichlet_term = nu * quad * meas;
  e.total = e.dirichlet_v + e.gamma_term + e.g_term + e.wtv_term + e.nu_dirichlet_term;
  return e;
}

}  // namespace pfgb
