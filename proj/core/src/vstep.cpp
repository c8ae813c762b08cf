#include "pfgb/vstep.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pfgb/error.hpp"
#include "pfgb/scheme.hpp"

namespace pfgb {
namespace {

// Ratios are only recorded while the previous outer increment dominates the
// inner solve error by this factor.
constexpr double kRatioFloorFactor = 1e6;

struct InnerProblem {
  const GridSpec& grid;
  const ModelSpec& model;
  std::span<const double> w_prev;
  std::span<const double> eta_prev;
  std::vector<double> tv_coef;    // |grad theta_prev|
  std::vector<double> quad_coef;  // nu |grad theta_prev|^2
  std::vector<double> lin_w;      // g_w(T v')
  std::vector<double> lin_eta;    // g_eta(T v')
  double inv_h = 0.0;
  double lipschitz = 0.0;
};

// Scratch buffers for Laplacian evaluation.
struct Workspace {
  std::vector<double> gx, gy, lap;
  explicit Workspace(std::size_t n) : gx(n), gy(n), lap(n) {}
};

void laplacian(const GridSpec& grid, std::span<const double> f, Workspace& ws) {
  gradient_into(grid, f, ws.gx, ws.gy);
  divergence_into(grid, ws.gx, ws.gy, ws.lap);
}

// Gradient of the smooth part at (yw, ye), written to (dw, de).
void smooth_gradient(const InnerProblem& P, std::span<const double> yw, std::span<const double> ye,
                     std::span<double> dw, std::span<double> de, Workspace& ws) {
  const std::size_t n = yw.size();
  laplacian(P.grid, yw, ws);
  for (std::size_t k = 0; k < n; ++k) {
    const MobilityValues m = mobility_eval(P.model.mobility, yw[k], ye[k]);
    dw[k] = (yw[k] - P.w_prev[k]) * P.inv_h + P.lin_w[k] + P.tv_coef[k] * m.grad_a[0] +
            P.quad_coef[k] * m.grad_b[0] - ws.lap[k];
    de[k] = (ye[k] - P.eta_prev[k]) * P.inv_h + P.lin_eta[k] + P.tv_coef[k] * m.grad_a[1] +
            P.quad_coef[k] * m.grad_b[1];
  }
  laplacian(P.grid, ye, ws);
  for (std::size_t k = 0; k < n; ++k) de[k] -= ws.lap[k];
}

}  // namespace

void VStepParams::validate() const {
  if (!(h > 0.0) || !std::isfinite(h)) throw InvalidArgument("vstep: h must be positive");
  if (!(outer_tol > 0.0) || !(inner_tol > 0.0)) throw InvalidArgument("vstep: tolerances must be positive");
  if (max_outer < 1 || max_inner < 1) throw InvalidArgument("vstep: iteration caps must be >= 1");
}

FrozenSolve solve_frozen(const ScalarField& w_prev, const ScalarField& eta_prev,
                         const ScalarField& theta_prev, const ScalarField& w_dag,
                         const ScalarField& eta_dag, const ScalarField& w_start,
                         const ScalarField& eta_start, const ModelSpec& model, double nu,
                         const VStepParams& params) {
  const GridSpec& grid = w_prev.grid();
  const std::size_t n = grid.size();
  InnerProblem P{grid, model, w_prev.values(), eta_prev.values(), {}, {}, {}, {}, 1.0 / params.h, 0.0};
  P.tv_coef.resize(n);
  P.quad_coef.resize(n);
  P.lin_w.resize(n);
  P.lin_eta.resize(n);

  const VectorField gt = gradient(theta_prev);
  const Vec2 curv = mobility_curvature_bounds(model.mobility);
  double coef_max = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double s = gt.norm_at(k);
    P.tv_coef[k] = s;
    P.quad_coef[k] = nu * s * s;
    coef_max = std::max(coef_max, s * curv[0] + nu * s * s * curv[1]);
    const Vec2 gg = grad_g(model.potential, std::clamp(w_dag[k], 0.0, 1.0), std::clamp(eta_dag[k], 0.0, 1.0));
    P.lin_w[k] = gg[0];
    P.lin_eta[k] = gg[1];
  }
  P.lipschitz = P.inv_h + grad_operator_norm_bound(grid) + coef_max;

  const double t = 1.0 / P.lipschitz;
  const double q = P.inv_h / P.lipschitz;
  const double momentum = (1.0 - std::sqrt(q)) / (1.0 + std::sqrt(q));
  const double meas = grid.cell_measure();

  std::vector<double> xw(w_start.values().begin(), w_start.values().end());
  std::vector<double> xe(eta_start.values().begin(), eta_start.values().end());
  // The starting point must lie in D(gamma).
  for (double& v : xw)
    if (!std::isfinite(gamma_eval(model.potential, v))) v = gamma_prox(model.potential, t, v);
  std::vector<double> yw = xw, ye = xe, nw(n), ne(n), dw(n), de(n);
  Workspace ws(n);

  FrozenSolve out;
  double residual = std::numeric_limits<double>::infinity();
  int it = 0;
  for (; it < params.max_inner; ++it) {
    smooth_gradient(P, yw, ye, dw, de, ws);
    double gmap_sq = 0.0;
    double restart_dot = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      nw[k] = gamma_prox(model.potential, t, yw[k] - t * dw[k]);
      ne[k] = ye[k] - t * de[k];
      const double gw = yw[k] - nw[k];
      const double ge = ye[k] - ne[k];
      gmap_sq += gw * gw + ge * ge;
      restart_dot += gw * (nw[k] - xw[k]) + ge * (ne[k] - xe[k]);
    }
    // |G| / mu with G = (y - x+) / t and mu = 1/h.
    residual = std::sqrt(gmap_sq * meas) / t * params.h;
    if (residual <= params.inner_tol) {
      xw.swap(nw);
      xe.swap(ne);
      ++it;
      break;
    }
    const double beta = restart_dot > 0.0 ? 0.0 : momentum;
    for (std::size_t k = 0; k < n; ++k) {
      yw[k] = nw[k] + beta * (nw[k] - xw[k]);
      ye[k] = ne[k] + beta * (ne[k] - xe[k]);
    }
    xw.swap(nw);
    xe.swap(ne);
  }
  if (!(residual <= params.inner_tol)) {
    std::ostringstream os;
    os << "vstep inner solve: residual " << residual << " above " << params.inner_tol << " after "
       << params.max_inner << " iterations";
    throw InnerNoConvergence(os.str());
  }
  out.w = ScalarField(grid, std::move(xw));
  out.eta = ScalarField(grid, std::move(xe));
  out.iterations = it;
  out.residual = residual;
  return out;
}

VStepResult v_step(const ScalarField& w_prev, const ScalarField& eta_prev, const ScalarField& theta_prev,
                   const ModelSpec& model, double nu, const VStepParams& params) {
  params.validate();
  require_same_grid(w_prev.grid(), eta_prev.grid(), "v_step");
  require_same_grid(w_prev.grid(), theta_prev.grid(), "v_step");
  if (!(nu >= 0.0)) throw InvalidArgument("v_step: nu must be >= 0");
  if (!theta_prev.all_finite()) throw InvalidArgument("v_step: theta_prev must be finite");
  const double gate = h_star(model);
  if (!params.override_h_gate && !(params.h < gate)) {
    std::ostringstream os;
    os << "v_step: h = " << params.h << " is not below h_star = " << gate;
    throw InvalidArgument(os.str());
  }

  VStepResult res;
  res.report.contraction_bound = params.h * model.c2_norm;
  const double ratio_floor = kRatioFloorFactor * params.inner_tol;

  ScalarField cur_w = w_prev;
  ScalarField cur_eta = eta_prev;
  double prev_diff = -1.0;
  bool converged = false;
  for (int k = 1; k <= params.max_outer; ++k) {
    FrozenSolve s = solve_frozen(w_prev, eta_prev, theta_prev, cur_w, cur_eta, cur_w, cur_eta, model, nu, params);
    res.report.inner_iters_total += s.iterations;
    const double dw = l2_distance(s.w, cur_w);
    const double de = l2_distance(s.eta, cur_eta);
    const double diff = std::hypot(dw, de);
    if (prev_diff > ratio_floor) {
      const double ratio = diff / prev_diff;
      res.report.final_contraction_ratio = ratio;
      res.report.max_contraction_ratio = std::max(res.report.max_contraction_ratio, ratio);
      ++res.report.measured_ratios;
    }
    cur_w = std::move(s.w);
    cur_eta = std::move(s.eta);
    res.report.outer_iters = k;
    res.report.residual = diff;
    prev_diff = diff;
    if (diff <= params.outer_tol) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    std::ostringstream os;
    os << "vstep outer loop: increment " << res.report.residual << " above " << params.outer_tol << " after "
       << params.max_outer << " iterations (h L = " << res.report.contraction_bound << ")";
    throw OuterNoConvergence(os.str());
  }
  res.report.box_violation = box_violation(cur_w, cur_eta, model.potential);
  res.w = std::move(cur_w);
  res.eta = std::move(cur_eta);
  return res;
}

double v_step_energy(const ScalarField& w, const ScalarField& eta, const ScalarField& w_prev,
                     const ScalarField& eta_prev, const ScalarField& theta_prev, const ModelSpec& model,
                     double nu, double h) {
  const GridSpec& grid = w.grid();
  const double meas = grid.cell_measure();
  const VectorField gt = gradient(theta_prev);
  double local = 0.0;
  double motion = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    const MobilityValues m = mobility_eval(model.mobility, w[k], eta[k]);
    const double s = gt.norm_at(k);
    local += gamma_eval(model.potential, w[k]) + g_eval(model.potential, w[k], eta[k]) + m.a * s + nu * m.b * s * s;
    const double dw = w[k] - w_prev[k];
    const double de = eta[k] - eta_prev[k];
    motion += dw * dw + de * de;
  }
  double total = local * meas + dirichlet_energy(w) + dirichlet_energy(eta);
  if (std::isfinite(h)) total += motion * meas / (2.0 * h);
  return total;
}

double box_violation(const ScalarField& w, const ScalarField& eta, const PotentialSpec& potential) {
  double worst = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) {
    worst = std::max({worst, potential.o_star - w[k], w[k] - potential.iota_star, -eta[k], eta[k] - 1.0});
  }
  return worst;
}

double positive_part_sq(const ScalarField& wa, const ScalarField& etaa, const ScalarField& wb,
                        const ScalarField& etab) {
  double s = 0.0;
  for (std::size_t k = 0; k < wa.size(); ++k) {
    const double pw = std::max(0.0, wa[k] - wb[k]);
    const double pe = std::max(0.0, etaa[k] - etab[k]);
    s += pw * pw + pe * pe;
  }
  return s * wa.grid().cell_measure();
}

double v_step_perturbation_bound(const ScalarField& w1, const ScalarField& eta1, const ScalarField& w2,
                                 const ScalarField& eta2, const ScalarField& w1_prev,
                                 const ScalarField& eta1_prev, const ScalarField& w2_prev,
                                 const ScalarField& eta2_prev) {
  const double num = std::pow(l2_distance(w1, w2), 2) + std::pow(l2_distance(eta1, eta2), 2);
  const double den = std::pow(l2_distance(w1_prev, w2_prev), 2) + std::pow(l2_distance(eta1_prev, eta2_prev), 2);
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

}  // namespace pfgb
