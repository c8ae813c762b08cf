#pragma once

// Discrete free energy F_nu = V_D(w, eta) + Gamma(v) + G(v; u) + Phi_nu(v; theta).
// Integrals are cell sums times dx^dim.

#include "pfgb/grid.hpp"
#include "pfgb/model.hpp"

namespace pfgb {

/// The triplet [w, eta, theta]; v = [w, eta].
struct PhaseState {
  ScalarField w;
  ScalarField eta;
  ScalarField theta;

  const GridSpec& grid() const noexcept { return w.grid(); }
  /// Throws unless all three fields share one grid.
  void require_consistent() const;

  friend bool operator==(const PhaseState&, const PhaseState&) = default;
};

struct EnergyBreakdown {
  double dirichlet_v = 0.0;        // 1/2 sum |grad w|^2 + |grad eta|^2
  double gamma_term = 0.0;         // may be +inf
  double g_term = 0.0;
  double wtv_term = 0.0;           // sum alpha(v) |grad theta|
  double nu_dirichlet_term = 0.0;  // nu sum beta(v) |grad theta|^2
  double total = 0.0;

  bool finite() const noexcept;
};

EnergyBreakdown free_energy(const PhaseState& state, const ModelSpec& model, double nu);

/// Phi_nu(v; theta) = sum alpha(v)|grad theta| + nu sum beta(v)|grad theta|^2.
double phi_nu(const ScalarField& w, const ScalarField& eta, const ScalarField& theta,
              const ModelSpec& model, double nu);

/// Cell-wise mobility fields evaluated at v.
struct MobilityFields {
  ScalarField a0;
  ScalarField a;
  ScalarField b;
};
MobilityFields mobility_fields(const ScalarField& w, const ScalarField& eta, const MobilitySpec& spec);

}  // namespace pfgb
