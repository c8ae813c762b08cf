#include "pfgb/thetastep.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <optional>
#include <sstream>

#include "pfgb/energy.hpp"
#include "pfgb/error.hpp"

namespace pfgb {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// The gap is evaluated every max(kGapMin, iters / 16) iterations, capped at kGapMax.
constexpr int kGapMin = 10;
constexpr int kGapMax = 200;

double cell_norm(std::span<const double> gx, std::span<const double> gy, std::size_t k) {
  return gy.empty() ? std::abs(gx[k]) : std::sqrt(gx[k] * gx[k] + gy[k] * gy[k]);
}

struct Buffers {
  std::vector<double> gx, gy, div;
  Buffers(const GridSpec& g) : gx(g.size()), gy(g.dim == 2 ? g.size() : 0), div(g.size()) {}
};

// On a line every edge couples two cells, so the flux y_e through edge e = (k, k+1)
// follows from the primal by y_k = y_{k-1} + dx a_k (theta_k - f_k).  Guess which
// edges are flat and the sign of the others from an approximate minimizer, solve
// the tridiagonal system for the group values, and keep the result only if the
// optimality conditions hold exactly (flat edges need |y_e| <= rho_e).
std::optional<std::vector<double>> polish_line(const ThetaProblem& P, std::span<const double> approx, double flat_tol) {
  const std::size_t n = approx.size();
  const double dx = P.grid.dx;
  std::vector<char> flat(n, 0);
  std::vector<double> sign(n, 0.0);
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double d = approx[e + 1] - approx[e];
    if (P.tv_weight[e] > 0.0 && std::abs(d) <= flat_tol)
      flat[e] = 1;
    else if (P.tv_weight[e] > 0.0)
      sign[e] = d > 0.0 ? 1.0 : -1.0;
  }
  // group g covers cells [start[g], start[g+1]); edge start[g+1]-1 joins g and g+1
  std::vector<std::size_t> start{0};
  for (std::size_t e = 0; e + 1 < n; ++e)
    if (!flat[e]) start.push_back(e + 1);
  const std::size_t m = start.size();
  start.push_back(n);
  std::vector<double> diag(m), off(m, 0.0), rhs(m);
  for (std::size_t g = 0; g < m; ++g) {
    double A = 0.0, B = 0.0;
    for (std::size_t k = start[g]; k < start[g + 1]; ++k) {
      A += dx * P.data_weight[k];
      B += dx * P.data_weight[k] * P.anchor[k];
    }
    diag[g] = A;
    rhs[g] = B;
  }
  for (std::size_t g = 0; g + 1 < m; ++g) {
    const std::size_t e = start[g + 1] - 1;
    const double c = 2.0 * P.quad_weight[e] / dx;
    diag[g] += c;
    diag[g + 1] += c;
    off[g] = -c;
    rhs[g] += P.tv_weight[e] * sign[e];
    rhs[g + 1] -= P.tv_weight[e] * sign[e];
  }
  // Thomas algorithm; the matrix is symmetric and diagonally dominant
  for (std::size_t g = 1; g < m; ++g) {
    const double r = off[g - 1] / diag[g - 1];
    diag[g] -= r * off[g - 1];
    rhs[g] -= r * rhs[g - 1];
  }
  std::vector<double> u(m);
  for (std::size_t g = m; g-- > 0;) u[g] = (rhs[g] - (g + 1 < m ? off[g] * u[g + 1] : 0.0)) / diag[g];

  std::vector<double> theta(n);
  for (std::size_t g = 0; g < m; ++g)
    for (std::size_t k = start[g]; k < start[g + 1]; ++k) theta[k] = u[g];
  double y = 0.0, scale = 0.0;
  for (std::size_t e = 0; e + 1 < n; ++e) {
    const double t = dx * P.data_weight[e] * (theta[e] - P.anchor[e]);
    y += t;
    scale += std::abs(t);
    const double d = theta[e + 1] - theta[e];
    if (flat[e]) {
      if (std::abs(y) > P.tv_weight[e] + 1e-12 * (1.0 + scale)) return std::nullopt;
    } else if (sign[e] * d <= 0.0 && P.tv_weight[e] > 0.0) {
      return std::nullopt;
    }
  }
  return theta;
}

}  // namespace

ThetaProblem ThetaProblem::from_state(const ScalarField& theta_prev, const ScalarField& w, const ScalarField& eta,
                                      const ModelSpec& model, double nu, double h) {
  require_same_grid(theta_prev.grid(), w.grid(), "ThetaProblem");
  require_same_grid(theta_prev.grid(), eta.grid(), "ThetaProblem");
  if (!(h > 0.0)) throw InvalidArgument("theta step: h must be positive");
  if (!(nu >= 0.0)) throw InvalidArgument("theta step: nu must be >= 0");
  ThetaProblem p;
  p.grid = theta_prev.grid();
  const std::size_t n = p.grid.size();
  p.data_weight.resize(n);
  p.tv_weight.resize(n);
  p.quad_weight.resize(n);
  p.anchor.assign(theta_prev.values().begin(), theta_prev.values().end());
  for (std::size_t k = 0; k < n; ++k) {
    const MobilityValues m = mobility_eval(model.mobility, w[k], eta[k]);
    p.data_weight[k] = m.a0 / h;
    p.tv_weight[k] = m.a;
    p.quad_weight[k] = nu * m.b;
  }
  return p;
}

void ThetaProblem::validate() const {
  const std::size_t n = grid.size();
  if (data_weight.size() != n || anchor.size() != n || tv_weight.size() != n || quad_weight.size() != n)
    throw InvalidArgument("ThetaProblem: array sizes do not match the grid");
  for (std::size_t k = 0; k < n; ++k) {
    if (!(data_weight[k] > 0.0)) throw InvalidArgument("ThetaProblem: alpha0 must be positive");
    if (!(tv_weight[k] >= 0.0) || !(quad_weight[k] >= 0.0))
      throw InvalidArgument("ThetaProblem: mobility weights must be nonnegative");
    if (!std::isfinite(anchor[k])) throw InvalidArgument("ThetaProblem: theta_prev must be finite");
  }
}

double ThetaProblem::objective(std::span<const double> theta) const {
  const std::size_t n = grid.size();
  std::vector<double> gx(n), gy(grid.dim == 2 ? n : 0);
  gradient_into(grid, theta, gx, gy);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double d = theta[k] - anchor[k];
    const double r = cell_norm(gx, gy, k);
    s += 0.5 * data_weight[k] * d * d + tv_weight[k] * r + quad_weight[k] * r * r;
  }
  return s * grid.cell_measure();
}

double ThetaProblem::dual_objective(std::span<const double> yx, std::span<const double> yy) const {
  const std::size_t n = grid.size();
  std::vector<double> div(n);
  divergence_into(grid, yx, yy, div);
  double s = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    s -= div[k] * anchor[k] + 0.5 * div[k] * div[k] / data_weight[k];
    const double r = cell_norm(yx, yy, k);
    if (quad_weight[k] > 0.0) {
      const double excess = std::max(0.0, r - tv_weight[k]);
      s -= excess * excess / (4.0 * quad_weight[k]);
    } else if (r > tv_weight[k] * (1.0 + 1e-12) + 1e-300) {
      return -kInf;
    }
  }
  return s * grid.cell_measure();
}

void ThetaStepParams::validate(const GridSpec& grid) const {
  if (!(h > 0.0)) throw InvalidArgument("theta step: h must be positive");
  if (!(gap_tol > 0.0)) throw InvalidArgument("theta step: gap_tol must be positive");
  if (max_iters < 1) throw InvalidArgument("theta step: max_iters must be >= 1");
  if ((tau > 0.0) != (sigma > 0.0)) throw InvalidArgument("theta step: set both tau and sigma or neither");
  if (tau > 0.0 && tau * sigma * grad_operator_norm_bound(grid) > 1.0 + 1e-12)
    throw InvalidArgument("theta step: tau sigma ||grad||^2 must not exceed 1");
}

ThetaStepResult solve_theta_problem(const ThetaProblem& P, const ThetaStepParams& params,
                                    const VectorField* warm_dual) {
  P.validate();
  params.validate(P.grid);
  const GridSpec& grid = P.grid;
  const std::size_t n = grid.size();
  const bool two_d = grid.dim == 2;
  const double meas = grid.cell_measure();
  const double op_norm_sq = grad_operator_norm_bound(grid);

  double tau = params.tau > 0.0 ? params.tau : 1.0 / std::sqrt(op_norm_sq);
  double sigma = params.sigma > 0.0 ? params.sigma : 1.0 / std::sqrt(op_norm_sq);
  const double gamma = *std::min_element(P.data_weight.begin(), P.data_weight.end());

  std::vector<double> theta(P.anchor), theta_old(n), theta_bar(P.anchor), theta_hat(n);
  std::vector<double> yx(n, 0.0), yy(two_d ? n : 0, 0.0);
  if (warm_dual != nullptr && warm_dual->grid == grid) {
    yx = warm_dual->x;
    if (two_d) yy = warm_dual->y;
  }
  Buffers buf(grid);

  auto project_dual = [&](std::size_t k, double sig) {
    const double r = two_d ? std::sqrt(yx[k] * yx[k] + yy[k] * yy[k]) : std::abs(yx[k]);
    const double rho = P.tv_weight[k];
    if (r <= rho) return;
    double target = rho;
    if (P.quad_weight[k] > 0.0) target = rho + (r - rho) / (1.0 + sig / (2.0 * P.quad_weight[k]));
    const double scale = r > 0.0 ? target / r : 0.0;
    yx[k] *= scale;
    if (two_d) yy[k] *= scale;
  };
  for (std::size_t k = 0; k < n; ++k) project_dual(k, 0.0);

  ThetaStepResult res;
  double best_primal = kInf;
  std::vector<double> best_theta(P.anchor);
  double dual_val = -kInf;
  double gap = kInf;
  int it = 0;
  int next_check = kGapMin;
  for (; it < params.max_iters; ++it) {
    // dual ascent on the extrapolated primal point
    gradient_into(grid, theta_bar, buf.gx, buf.gy);
    for (std::size_t k = 0; k < n; ++k) {
      yx[k] += sigma * buf.gx[k];
      if (two_d) yy[k] += sigma * buf.gy[k];
      project_dual(k, sigma);
    }
    // primal descent: theta <- prox_{tau G}(theta + tau div y)
    divergence_into(grid, yx, yy, buf.div);
    theta_old = theta;
    for (std::size_t k = 0; k < n; ++k) {
      const double z = theta[k] + tau * buf.div[k];
      theta[k] = (z + tau * P.data_weight[k] * P.anchor[k]) / (1.0 + tau * P.data_weight[k]);
    }
    const double step_ratio = 1.0 / std::sqrt(1.0 + 2.0 * gamma * tau);
    tau *= step_ratio;
    sigma /= step_ratio;
    for (std::size_t k = 0; k < n; ++k) theta_bar[k] = theta[k] + step_ratio * (theta[k] - theta_old[k]);

    if (it + 1 < next_check && it + 1 != params.max_iters) continue;
    next_check = it + 1 + std::clamp((it + 1) / 16, kGapMin, kGapMax);
    dual_val = P.dual_objective(yx, yy);
    for (std::size_t k = 0; k < n; ++k) theta_hat[k] = P.anchor[k] + buf.div[k] / P.data_weight[k];
    const double p_iter = P.objective(theta);
    const double p_hat = P.objective(theta_hat);
    if (p_iter < best_primal) {
      best_primal = p_iter;
      best_theta = theta;
    }
    if (p_hat < best_primal) {
      best_primal = p_hat;
      best_theta = theta_hat;
    }
    gap = best_primal - dual_val;
    if (gap <= params.gap_tol * (1.0 + std::abs(best_primal))) {
      ++it;
      break;
    }
  }
  if (!(gap <= params.gap_tol * (1.0 + std::abs(best_primal)))) {
    std::ostringstream os;
    os << "theta step: duality gap " << gap << " above tolerance after " << params.max_iters << " iterations";
    throw NoConvergence(os.str());
  }
  bool exact_kkt = false;
  if (!two_d && n > 1) {
    const auto [f_lo, f_hi] = std::minmax_element(P.anchor.begin(), P.anchor.end());
    const double range = 1.0 + *f_hi - *f_lo;
    for (double t = 1e-10; t <= 1e-3; t *= 10.0) {
      const auto exact = polish_line(P, best_theta, t * range);
      if (!exact) continue;
      const double p_exact = P.objective(*exact);
      if (p_exact <= best_primal + 1e-13 * (1.0 + std::abs(best_primal))) {
        best_theta = *exact;
        best_primal = p_exact;
        exact_kkt = true;
        break;
      }
    }
  }
  // Projecting onto [min anchor, max anchor] never raises the objective, so the
  // certificate survives and the iterate keeps the exact maximum principle.
  const auto [lo_it, hi_it] = std::minmax_element(P.anchor.begin(), P.anchor.end());
  for (double& t : best_theta) t = std::clamp(t, *lo_it, *hi_it);
  best_primal = P.objective(best_theta);
  gap = best_primal - dual_val;
  res.theta = ScalarField(grid, std::move(best_theta));
  res.report.iters = it;
  res.report.exact = exact_kkt;
  res.report.primal = best_primal;
  res.report.dual = dual_val;
  res.report.duality_gap = gap;
  res.report.linf_in = *std::max_element(P.anchor.begin(), P.anchor.end(),
                                         [](double a, double b) { return std::abs(a) < std::abs(b); });
  res.report.linf_in = std::abs(res.report.linf_in);
  res.report.linf_out = res.theta.max_abs();
  res.dual = VectorField(grid);
  res.dual.x = std::move(yx);
  if (two_d) res.dual.y = std::move(yy);
  (void)meas;
  return res;
}

double weighted_l2_norm(const ScalarField& f, const ScalarField& w, const ScalarField& eta,
                        const MobilitySpec& mobility) {
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += mobility_eval(mobility, w[k], eta[k]).a0 * f[k] * f[k];
  return std::sqrt(s * f.grid().cell_measure());
}

ThetaStepResult theta_step(const ScalarField& theta_prev, const ScalarField& w_new, const ScalarField& eta_new,
                           const ModelSpec& model, double nu, const ThetaStepParams& params,
                           const VectorField* warm_dual) {
  const ThetaProblem P = ThetaProblem::from_state(theta_prev, w_new, eta_new, model, nu, params.h);
  ThetaStepResult res = solve_theta_problem(P, params, warm_dual);
  ScalarField inc = res.theta;
  for (std::size_t k = 0; k < inc.size(); ++k) inc[k] -= theta_prev[k];
  const double wn = weighted_l2_norm(inc, w_new, eta_new, model.mobility);
  res.report.energy_decrease = phi_nu(w_new, eta_new, theta_prev, model, nu) -
                               phi_nu(w_new, eta_new, res.theta, model, nu) - wn * wn / params.h;
  return res;
}

// --- smoothed validator --------------------------------------------------------

namespace {

struct Smoothed {
  const ThetaProblem& P;
  double mu;
  std::vector<double> gx, gy, fx, fy, div;

  Smoothed(const ThetaProblem& p, double m)
      : P(p), mu(m), gx(p.grid.size()), gy(p.grid.dim == 2 ? p.grid.size() : 0), fx(p.grid.size()),
        fy(p.grid.dim == 2 ? p.grid.size() : 0), div(p.grid.size()) {}

  // Value per unit cell measure; fills grad when non-null.
  double eval(std::span<const double> theta, std::vector<double>* grad) {
    const std::size_t n = theta.size();
    gradient_into(P.grid, theta, gx, gy);
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double d = theta[k] - P.anchor[k];
      const double r2 = gx[k] * gx[k] + (gy.empty() ? 0.0 : gy[k] * gy[k]);
      const double root = std::sqrt(r2 + mu * mu);
      s += 0.5 * P.data_weight[k] * d * d + P.tv_weight[k] * (r2 / (root + mu)) + P.quad_weight[k] * r2;
      if (grad != nullptr) {
        const double c = P.tv_weight[k] / root + 2.0 * P.quad_weight[k];
        fx[k] = c * gx[k];
        if (!gy.empty()) fy[k] = c * gy[k];
      }
    }
    if (grad != nullptr) {
      divergence_into(P.grid, fx, fy, div);
      grad->resize(n);
      for (std::size_t k = 0; k < n; ++k) (*grad)[k] = P.data_weight[k] * (theta[k] - P.anchor[k]) - div[k];
    }
    return s;
  }
};

}  // namespace

SmoothedSolve solve_theta_smoothed(const ThetaProblem& P, double mu, double grad_tol, int max_iters) {
  P.validate();
  if (!(mu > 0.0)) throw InvalidArgument("smoothed theta solve: mu must be positive");
  const std::size_t n = P.grid.size();
  Smoothed S(P, mu);
  std::vector<double> x(P.anchor), g, x_new(n), g_new;
  double f = S.eval(x, &g);
  double step = 1.0 / (*std::max_element(P.data_weight.begin(), P.data_weight.end()) +
                       grad_operator_norm_bound(P.grid) *
                           (*std::max_element(P.tv_weight.begin(), P.tv_weight.end()) / mu +
                            2.0 * *std::max_element(P.quad_weight.begin(), P.quad_weight.end())));
  std::deque<double> recent{f};
  constexpr std::size_t kWindow = 10;
  int it = 0;
  double gnorm = std::sqrt(dot(g, g));
  for (; it < max_iters && gnorm > grad_tol; ++it) {
    const double ref = *std::max_element(recent.begin(), recent.end());
    double f_new = kInf;
    double a = step;
    for (int bt = 0; bt < 60; ++bt) {
      for (std::size_t k = 0; k < n; ++k) x_new[k] = x[k] - a * g[k];
      f_new = S.eval(x_new, nullptr);
      if (f_new <= ref - 1e-4 * a * gnorm * gnorm + 1e-15 * std::abs(ref)) break;
      a *= 0.5;
    }
    S.eval(x_new, &g_new);
    double sy = 0.0, ss = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      const double sk = x_new[k] - x[k];
      const double yk = g_new[k] - g[k];
      sy += sk * yk;
      ss += sk * sk;
    }
    step = sy > 0.0 ? ss / sy : a * 2.0;
    x.swap(x_new);
    g.swap(g_new);
    f = f_new;
    gnorm = std::sqrt(dot(g, g));
    recent.push_back(f);
    if (recent.size() > kWindow) recent.pop_front();
  }
  if (gnorm > grad_tol) {
    std::ostringstream os;
    os << "smoothed theta solve: gradient norm " << gnorm << " above " << grad_tol;
    throw NoConvergence(os.str());
  }
  SmoothedSolve out;
  out.iters = it;
  out.smoothed_objective = f * P.grid.cell_measure();
  out.objective = P.objective(x);
  out.theta = ScalarField(P.grid, std::move(x));
  return out;
}

ScalarField theta_step_smoothed(const ScalarField& theta_prev, const ScalarField& w_new,
                                const ScalarField& eta_new, const ModelSpec& model, double nu, double h,
                                double mu) {
  const ThetaProblem P = ThetaProblem::from_state(theta_prev, w_new, eta_new, model, nu, h);
  return solve_theta_smoothed(P, mu).theta;
}

// --- reference oracle ----------------------------------------------------------

OracleResult oracle_theta_min(const ThetaProblem& P, int subgradient_iters) {
  P.validate();
  const GridSpec& grid = P.grid;
  const int n = static_cast<int>(grid.size());
  if (n > 64) throw InvalidArgument("oracle_theta_min: at most 64 cells");
  const bool two_d = grid.dim == 2;
  const int rows = two_d ? 2 * n : n;

  // Dense forward-difference matrix, rows ordered (x-components, y-components).
  Eigen::MatrixXd K = Eigen::MatrixXd::Zero(rows, n);
  {
    std::vector<double> e(n, 0.0), gx(n), gy(two_d ? n : 0);
    for (int j = 0; j < n; ++j) {
      e[j] = 1.0;
      gradient_into(grid, e, gx, gy);
      for (int k = 0; k < n; ++k) {
        K(k, j) = gx[k];
        if (two_d) K(n + k, j) = gy[k];
      }
      e[j] = 0.0;
    }
  }
  const Eigen::Map<const Eigen::VectorXd> a(P.data_weight.data(), n);
  const Eigen::Map<const Eigen::VectorXd> anchor(P.anchor.data(), n);

  auto cell = [&](const Eigen::VectorXd& g, int k) {
    return two_d ? Eigen::Vector2d(g(k), g(n + k)) : Eigen::Vector2d(g(k), 0.0);
  };

  // Stage 1: subgradient descent with step min(2 / (mu (k + 1)), 1 / L_quad) and
  // weights k, where L_quad bounds the curvature of the quadratic terms.
  const double strong = a.minCoeff();
  const double quad_curv =
      a.maxCoeff() + 2.0 * grad_operator_norm_bound(grid) * *std::max_element(P.quad_weight.begin(), P.quad_weight.end());
  std::vector<double> xs(P.anchor), avg_s(P.anchor), gx(n), gy(two_d ? n : 0), fx(n), fy(two_d ? n : 0), dv(n);
  double weight_sum = 0.0;
  for (int k = 1; k <= subgradient_iters; ++k) {
    gradient_into(grid, xs, gx, gy);
    for (int c = 0; c < n; ++c) {
      const double r = cell_norm(gx, gy, c);
      const double coef = (r > 0.0 ? P.tv_weight[c] / r : 0.0) + 2.0 * P.quad_weight[c];
      fx[c] = coef * gx[c];
      if (two_d) fy[c] = coef * gy[c];
    }
    divergence_into(grid, fx, fy, dv);
    const double step = std::min(2.0 / (strong * (k + 1)), 1.0 / quad_curv);
    weight_sum += k;
    const double mix = k / weight_sum;
    for (int c = 0; c < n; ++c) {
      xs[c] -= step * (P.data_weight[c] * (xs[c] - P.anchor[c]) - dv[c]);
      avg_s[c] += mix * (xs[c] - avg_s[c]);
    }
  }
  const Eigen::VectorXd avg = Eigen::Map<const Eigen::VectorXd>(avg_s.data(), n);
  OracleResult out;
  out.subgradient_objective = P.objective(avg_s);

  // Stage 2: Newton on the pseudo-Huber smoothing with decreasing mu.  The
  // smoothed objective differs from the exact one by at most mu * sum(rho).
  Eigen::VectorXd x = avg;
  auto smoothed = [&](const Eigen::VectorXd& th, double mu) {
    const Eigen::VectorXd g = K * th;
    double s = 0.5 * (th - anchor).cwiseAbs2().dot(a);
    for (int c = 0; c < n; ++c) {
      const double r2 = cell(g, c).squaredNorm();
      s += P.tv_weight[c] * (r2 / (std::sqrt(r2 + mu * mu) + mu)) + P.quad_weight[c] * r2;
    }
    return s;
  };
  for (double mu = 1e-2; mu >= 1e-11; mu *= 0.1) {
    for (int step = 0; step < 100; ++step) {
      const Eigen::VectorXd g = K * x;
      Eigen::VectorXd z = Eigen::VectorXd::Zero(rows);
      Eigen::MatrixXd W = Eigen::MatrixXd::Zero(rows, rows);
      for (int c = 0; c < n; ++c) {
        const Eigen::Vector2d gc = cell(g, c);
        const double root = std::sqrt(gc.squaredNorm() + mu * mu);
        const double rho = P.tv_weight[c];
        const double q2 = 2.0 * P.quad_weight[c];
        const Eigen::Vector2d s = (rho / root + q2) * gc;
        Eigen::Matrix2d H = (rho / root + q2) * Eigen::Matrix2d::Identity() -
                            (rho / (root * root * root)) * gc * gc.transpose();
        z(c) = s(0);
        W(c, c) = H(0, 0);
        if (two_d) {
          z(n + c) = s(1);
          W(c, n + c) = H(0, 1);
          W(n + c, c) = H(1, 0);
          W(n + c, n + c) = H(1, 1);
        }
      }
      const Eigen::VectorXd grad = a.cwiseProduct(x - anchor) + K.transpose() * z;
      Eigen::MatrixXd Hess = K.transpose() * W * K;
      Hess.diagonal() += a;
      const Eigen::VectorXd dir = Hess.ldlt().solve(-grad);
      const double decrement = -grad.dot(dir);
      if (!(decrement > 1e-28)) break;
      const double f0 = smoothed(x, mu);
      double t = 1.0;
      for (int bt = 0; bt < 60; ++bt) {
        if (smoothed(x + t * dir, mu) <= f0 - 0.25 * t * decrement) break;
        t *= 0.5;
      }
      x += t * dir;
      ++out.newton_steps;
      if (t == 1.0 && decrement < 1e-26) break;
    }
  }
  xs.assign(x.data(), x.data() + n);
  out.objective = P.objective(xs);
  out.theta = ScalarField(grid, std::move(xs));
  return out;
}

TMonotonicityReport tmonotonicity_check(const ScalarField& w_new, const ScalarField& eta_new,
                                        const ScalarField& theta_prev_low, const ScalarField& theta_prev_high,
                                        const ModelSpec& model, double nu, const ThetaStepParams& params) {
  const ThetaStepResult lo = theta_step(theta_prev_low, w_new, eta_new, model, nu, params);
  const ThetaStepResult hi = theta_step(theta_prev_high, w_new, eta_new, model, nu, params);
  TMonotonicityReport rep;
  ScalarField d_out(w_new.grid()), d_in(w_new.grid());
  for (std::size_t k = 0; k < d_out.size(); ++k) {
    d_out[k] = lo.theta[k] - hi.theta[k];
    d_in[k] = theta_prev_low[k] - theta_prev_high[k];
    rep.excess = std::max(rep.excess, d_out[k]);
  }
  rep.weighted_out = weighted_l2_norm(d_out, w_new, eta_new, model.mobility);
  rep.weighted_in = weighted_l2_norm(d_in, w_new, eta_new, model.mobility);
  rep.gap_low = lo.report.duality_gap;
  rep.gap_high = hi.report.duality_gap;
  return rep;
}

}  // namespace pfgb
