#pragma once

// Potential settings gamma + g, mobilities alpha0/alpha/beta, and the
// constants the time-stepping scheme derives from them.

#include <array>
#include <string>
#include <vector>

namespace pfgb {

using Vec2 = std::array<double, 2>;
/// Symmetric 2x2 matrix stored as {m11, m12, m22}.
using Sym2 = std::array<double, 3>;

enum class Potential {
  Polynomial,   // gamma = 0, quartic double well
  Logarithmic,  // entropy-type gamma on (0,1)
  Indicator,    // gamma = indicator of [0,1]
};

struct PotentialSpec {
  Potential setting = Potential::Polynomial;
  double c = 1.0;  // well depth
  double u = 0.0;  // relative temperature
  double o_star = 0.0;
  double iota_star = 1.0;

  void validate() const;
};

enum class MobilityKind { Constant, KobayashiSafeguarded };

struct MobilitySpec {
  MobilityKind kind = MobilityKind::KobayashiSafeguarded;
  double kappa = 1e-2;
  double a0 = 1.0;
  double a = 1.0;
  double b = 1.0;

  void validate() const;
};

struct MobilityValues {
  double a0 = 0.0;
  double a = 0.0;
  double b = 0.0;
  Vec2 grad_a{0.0, 0.0};
  Vec2 grad_b{0.0, 0.0};
};

/// Closed interval [lo, hi] of the real line, possibly unbounded or empty.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
  bool empty() const noexcept { return lo > hi; }
};

// --- potential --------------------------------------------------------------

/// gamma(w); +inf outside D(gamma).  The logarithmic setting uses the
/// convention gamma(0) = gamma(1) = 1.
double gamma_eval(const PotentialSpec& spec, double w);
/// Subdifferential of gamma at w; empty when w is not in D(d gamma).
Interval gamma_subdifferential(const PotentialSpec& spec, double w);
/// argmin_x (x - r)^2 / (2 lambda) + gamma(x).
double gamma_prox(const PotentialSpec& spec, double lambda, double r);

double g_eval(const PotentialSpec& spec, double w, double eta);
Vec2 grad_g(const PotentialSpec& spec, double w, double eta);
Sym2 hess_g(const PotentialSpec& spec, double w, double eta);

/// Spectral norm of a symmetric 2x2 matrix.
double spectral_norm(const Sym2& m) noexcept;

struct C2NormEstimate {
  double value = 0.0;  // max of the three sup-norms below
  double sup_value = 0.0;
  double sup_gradient = 0.0;  // Euclidean norm of grad g
  double sup_hessian = 0.0;   // spectral norm of the Hessian
  int resolution = 0;         // lattice points per axis
};

/// Sup-norm of g, |grad g| and ||Hess g||_2 over an n x n lattice on [0,1]^2.
C2NormEstimate estimate_c2_norm(const PotentialSpec& spec, int resolution = 401);

/// Lower bound c* of gamma + g on [0,1]^2 by lattice sampling.  The logarithmic
/// boundary convention makes the infimum interior, so a small downward margin
/// covers the sampling gap.
double estimate_c_star(const PotentialSpec& spec, int resolution = 401);

// --- mobility ---------------------------------------------------------------

MobilityValues mobility_eval(const MobilitySpec& spec, double w, double eta);
/// Global bounds on the spectral norms of Hess(alpha) and Hess(beta).
Vec2 mobility_curvature_bounds(const MobilitySpec& spec);
/// inf over [0,1]^2 of min(alpha0, beta).
double delta1(const MobilitySpec& spec);
/// inf over [0,1]^2 of min(alpha0, alpha).
double delta0(const MobilitySpec& spec);
/// sup over [0,R]^2 of beta.
double delta_star(const MobilitySpec& spec, double radius = 1.0);
/// inf over [0,1]^2 of alpha0.
double alpha0_floor(const MobilitySpec& spec);

// --- model ------------------------------------------------------------------

struct ModelSpec {
  PotentialSpec potential;
  MobilitySpec mobility;
  double c2_norm = 0.0;  // L = |g(.;u)|_{C^2([0,1]^2)}
  int c2_resolution = 0;
  double c_star = 0.0;

  /// Validates both specs and caches L and c*.
  static ModelSpec make(const PotentialSpec& potential, const MobilitySpec& mobility,
                        int resolution = 401);
};

struct ValidationItem {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct ValidationReport {
  std::vector<ValidationItem> items;

  bool ok() const noexcept;
  void add(std::string name, bool passed, std::string detail = {});
  std::string summary() const;
};

/// Evaluates every inequality of the corner-point compatibility conditions at
/// (o*, 0) and (iota*, 1), plus whether alpha0 is bounded away from zero.
ValidationReport check_a4(const ModelSpec& model);

std::string to_string(Potential p);
std::string to_string(MobilityKind k);

}  // namespace pfgb
