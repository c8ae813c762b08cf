#include "pfgb/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <sstream>
#include <thread>

#include "pfgb/energy.hpp"
#include "pfgb/error.hpp"

namespace pfgb {
namespace {

std::string num(double x) {
  std::ostringstream os;
  os.precision(6);
  os << x;
  return os.str();
}

std::string seed_ctx(std::uint64_t seed) { return "seed=" + std::to_string(seed); }

std::string traj_ctx(const Trajectory& t) {
  return "steps=" + std::to_string(t.steps()) + " h=" + num(t.h) + " nu=" + num(t.nu) +
         (t.outside_hypotheses ? " outside_hypotheses" : "");
}

double max_or(double init, double v) { return std::isnan(v) ? std::numeric_limits<double>::infinity() : std::max(init, v); }

ScalarField noise_field(const GridSpec& grid, std::mt19937_64& rng, double lo, double hi) {
  ScalarField f(grid);
  for (double& v : f.values()) v = uniform(rng, lo, hi);
  return f;
}

}  // namespace

CheckResult CheckResult::make(std::string name, double worst_violation, double tolerance, std::string context) {
  CheckResult r;
  r.name = std::move(name);
  r.worst_violation = worst_violation;
  r.tolerance = tolerance;
  r.passed = worst_violation <= tolerance;
  r.context = std::move(context);
  return r;
}

std::string CheckResult::csv_header() { return "name,passed,worst_violation,tolerance,context"; }

std::string CheckResult::csv_row() const {
  std::ostringstream os;
  os.precision(17);
  std::string ctx = context;
  std::replace(ctx.begin(), ctx.end(), ',', ';');
  os << name << ',' << (passed ? "true" : "false") << ',' << worst_violation << ',' << tolerance << ',' << ctx;
  return os.str();
}

bool all_passed(const std::vector<CheckResult>& checks) noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

// --- random fields -----------------------------------------------------------

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

double uniform(std::mt19937_64& rng, double lo, double hi) { return lo + (hi - lo) * uniform01(rng); }

ScalarField cosine_field(const GridSpec& grid, std::mt19937_64& rng, double lo, double hi, int max_mode) {
  if (lo > hi) throw InvalidArgument("cosine_field: lo > hi");
  const int n1 = grid.shape[0];
  const int n2 = grid.dim == 2 ? grid.shape[1] : 1;
  const int m2 = grid.dim == 2 ? max_mode : 0;
  std::vector<double> coef;
  for (int a = 0; a <= max_mode; ++a)
    for (int b = 0; b <= m2; ++b) coef.push_back((a + b == 0) ? 0.0 : uniform(rng, -1.0, 1.0) / (1.0 + a + b));
  ScalarField f(grid);
  for (int i = 0; i < n1; ++i) {
    const double x = (i + 0.5) / n1;
    for (int j = 0; j < n2; ++j) {
      const double y = (j + 0.5) / n2;
      double s = 0.0;
      std::size_t c = 0;
      for (int a = 0; a <= max_mode; ++a)
        for (int b = 0; b <= m2; ++b) s += coef[c++] * std::cos(M_PI * a * x) * std::cos(M_PI * b * y);
      f.at(i, j) = s;
    }
  }
  const double mn = f.min();
  const double mx = f.max();
  for (double& v : f.values()) v = mx > mn ? lo + (hi - lo) * (v - mn) / (mx - mn) : 0.5 * (lo + hi);
  // Guard the endpoints against rounding in the affine map.
  for (double& v : f.values()) v = std::clamp(v, lo, hi);
  return f;
}

ScalarField grain_field(const GridSpec& grid, std::mt19937_64& rng, int n_grains, double lo, double hi) {
  const std::size_t n = grid.size();
  if (n_grains < 1 || static_cast<std::size_t>(n_grains) > n)
    throw InvalidArgument("grain_field: n_grains must be in [1, cells]");
  const int n2 = grid.dim == 2 ? grid.shape[1] : 1;
  std::vector<std::size_t> seeds;
  while (seeds.size() < static_cast<std::size_t>(n_grains)) {
    const std::size_t k = static_cast<std::size_t>(rng() % n);
    if (std::find(seeds.begin(), seeds.end(), k) == seeds.end()) seeds.push_back(k);
  }
  std::vector<double> values;
  while (values.size() < seeds.size()) {
    const double v = uniform(rng, lo, hi);
    if (std::find(values.begin(), values.end(), v) == values.end()) values.push_back(v);
  }
  ScalarField f(grid);
  for (std::size_t k = 0; k < n; ++k) {
    const long i = static_cast<long>(k) / n2, j = static_cast<long>(k) % n2;
    long best = -1;
    std::size_t owner = 0;
    for (std::size_t s = 0; s < seeds.size(); ++s) {
      const long si = static_cast<long>(seeds[s]) / n2, sj = static_cast<long>(seeds[s]) % n2;
      const long d = (i - si) * (i - si) + (j - sj) * (j - sj);
      if (best < 0 || d < best) {
        best = d;
        owner = s;
      }
    }
    f[k] = values[owner];
  }
  return f;
}

PhaseState random_state(const GridSpec& grid, const ModelSpec& model, std::uint64_t seed, double amplitude) {
  std::mt19937_64 rng(seed);
  const double lo = model.potential.o_star;
  const double span = model.potential.iota_star - lo;
  PhaseState s;
  s.w = cosine_field(grid, rng, lo + 0.05 * span, lo + 0.95 * span);
  s.eta = cosine_field(grid, rng, 0.05, 0.95);
  s.theta = cosine_field(grid, rng, -amplitude, amplitude);
  return s;
}

// --- trajectory checks ---------------------------------------------------------

CheckResult check_dissipation(const Trajectory& traj, double slack) {
  double worst = -std::numeric_limits<double>::infinity();
  int at = 0;
  for (int i = 0; i < traj.steps(); ++i) {
    const StepReport& r = traj.reports[i];
    const double prev = traj.energies[i].total;
    const double v = (r.diss_v + r.diss_theta + traj.energies[i + 1].total - prev) / (1.0 + std::abs(prev));
    if (std::isnan(v) || v > worst) {
      worst = std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
      at = i + 1;
    }
  }
  if (traj.steps() == 0) worst = 0.0;
  return CheckResult::make("dissipation", worst, slack, traj_ctx(traj) + " worst_step=" + std::to_string(at));
}

CheckResult check_telescoped(const Trajectory& traj, double slack) {
  double lhs = 0.0;
  double budget = 0.0;
  for (int i = 0; i < traj.steps(); ++i) {
    lhs += traj.reports[i].diss_v + traj.reports[i].diss_theta;
    budget += 1.0 + std::abs(traj.energies[i].total);
  }
  lhs += traj.energies.back().total - traj.energies.front().total;
  const double worst = budget > 0.0 ? lhs / budget : 0.0;
  return CheckResult::make("telescoped_energy", max_or(-std::numeric_limits<double>::infinity(), worst), slack,
                           traj_ctx(traj));
}

CheckResult check_energy_bound(const Trajectory& traj, const ModelSpec& model, double slack) {
  const double volume = traj.states.front().grid().volume();
  const double bound = std::abs(traj.energies.front().total) + std::abs(model.c_star) * volume;
  double worst = -std::numeric_limits<double>::infinity();
  for (const EnergyBreakdown& e : traj.energies) worst = max_or(worst, (std::abs(e.total) - bound) / (1.0 + bound));
  return CheckResult::make("energy_bound", worst, slack, traj_ctx(traj) + " F*=" + num(bound));
}

CheckResult check_box(const Trajectory& traj, const ModelSpec& model, double tol) {
  double worst = 0.0;
  for (const StepReport& r : traj.reports) worst = max_or(worst, r.max_box_violation);
  for (const PhaseState& s : traj.states) worst = max_or(worst, box_violation(s.w, s.eta, model.potential));
  return CheckResult::make("box", worst, tol, traj_ctx(traj));
}

CheckResult check_linfty(const Trajectory& traj, double tol) {
  double worst = -std::numeric_limits<double>::infinity();
  double prev = traj.linf_theta0;
  for (const StepReport& r : traj.reports) {
    worst = max_or(worst, r.linf_theta - prev);
    prev = r.linf_theta;
  }
  if (traj.reports.empty()) worst = 0.0;
  return CheckResult::make("linf_theta", worst, tol, traj_ctx(traj));
}

CheckResult check_contraction(const Trajectory& traj, double rel_tol) {
  double worst = -1.0;
  int measured = 0;
  for (const StepReport& r : traj.reports) {
    if (r.vstep.measured_ratios == 0) continue;
    measured += r.vstep.measured_ratios;
    worst = max_or(worst, r.vstep.max_contraction_ratio / r.vstep.contraction_bound - 1.0);
  }
  return CheckResult::make("contraction", worst, rel_tol, traj_ctx(traj) + " ratios=" + std::to_string(measured));
}

// --- model and operator checks ---------------------------------------------------

CheckResult check_gamma_sandwich(const ModelSpec& model, double nu, const GridSpec& grid, int n_samples,
                                 std::uint64_t seed, double rel_tol) {
  std::mt19937_64 rng(seed);
  const double d1 = delta1(model.mobility);
  const double ds = delta_star(model.mobility, 1.0);
  double worst = 0.0;
  for (int s = 0; s < n_samples; ++s) {
    const ScalarField w = s % 2 ? noise_field(grid, rng, 0.0, 1.0) : cosine_field(grid, rng, 0.0, 1.0);
    const ScalarField eta = s % 2 ? noise_field(grid, rng, 0.0, 1.0) : cosine_field(grid, rng, 0.0, 1.0);
    const ScalarField theta = s % 3 == 0 ? grain_field(grid, rng, 4, -1.0, 1.0) : cosine_field(grid, rng, -1.0, 1.0);
    const double phi0 = phi_nu(w, eta, theta, model, 0.0);
    const double phin = phi_nu(w, eta, theta, model, nu);
    const double sq = 2.0 * dirichlet_energy(theta);
    const double lower = phi0 + nu * d1 * sq;
    const double upper = phi0 + nu * ds * sq;
    const double scale = 1.0 + std::abs(phin);
    worst = max_or(worst, (lower - phin) / scale);
    worst = max_or(worst, (phin - upper) / scale);
  }
  return CheckResult::make("gamma_sandwich", worst, rel_tol,
                           seed_ctx(seed) + " nu=" + num(nu) + " delta1=" + num(d1) + " delta*=" + num(ds));
}

CheckResult check_derivatives(const ModelSpec& model, int n_points, std::uint64_t seed, double rel_tol) {
  std::mt19937_64 rng(seed);
  constexpr double step = 1e-6;
  double worst = 0.0;
  auto score = [&](double exact, double fd) { worst = max_or(worst, std::abs(exact - fd) / (1.0 + std::abs(exact))); };
  for (int p = 0; p < n_points; ++p) {
    const double w = uniform(rng, 0.0, 1.0);
    const double e = uniform(rng, 0.0, 1.0);
    const Vec2 gg = grad_g(model.potential, w, e);
    score(gg[0], (g_eval(model.potential, w + step, e) - g_eval(model.potential, w - step, e)) / (2 * step));
    score(gg[1], (g_eval(model.potential, w, e + step) - g_eval(model.potential, w, e - step)) / (2 * step));
    const MobilityValues m = mobility_eval(model.mobility, w, e);
    const MobilityValues wp = mobility_eval(model.mobility, w + step, e);
    const MobilityValues wm = mobility_eval(model.mobility, w - step, e);
    const MobilityValues ep = mobility_eval(model.mobility, w, e + step);
    const MobilityValues em = mobility_eval(model.mobility, w, e - step);
    score(m.grad_a[0], (wp.a - wm.a) / (2 * step));
    score(m.grad_a[1], (ep.a - em.a) / (2 * step));
    score(m.grad_b[0], (wp.b - wm.b) / (2 * step));
    score(m.grad_b[1], (ep.b - em.b) / (2 * step));
  }
  return CheckResult::make("derivatives", worst, rel_tol,
                           seed_ctx(seed) + " potential=" + to_string(model.potential.setting) +
                               " mobility=" + to_string(model.mobility.kind));
}

std::vector<CheckResult> check_grid_identities(const GridSpec& grid, int n_trials, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  double adj = 0.0;
  double sym = 0.0;
  double nsd = 0.0;
  for (int t = 0; t < n_trials; ++t) {
    const ScalarField f = noise_field(grid, rng, -1.0, 1.0);
    const ScalarField g = noise_field(grid, rng, -1.0, 1.0);
    VectorField p(grid);
    for (double& v : p.x) v = uniform(rng, -1.0, 1.0);
    for (double& v : p.y) v = uniform(rng, -1.0, 1.0);
    const VectorField gf = gradient(f);
    const double lhs = inner(gf, p);
    const double rhs = -inner(f, divergence(p));
    adj = max_or(adj, std::abs(lhs - rhs) / (std::sqrt(inner(gf, gf) * inner(p, p)) + l2_norm(f) * l2_norm(divergence(p))));
    const ScalarField lf = neumann_laplacian(f);
    const ScalarField lg = neumann_laplacian(g);
    const double a = inner(lf, g);
    const double b = inner(f, lg);
    sym = max_or(sym, std::abs(a - b) / (l2_norm(lf) * l2_norm(g) + l2_norm(f) * l2_norm(lg)));
    nsd = max_or(nsd, inner(lf, f) / (l2_norm(lf) * l2_norm(f)));
  }
  const std::string ctx = seed_ctx(seed) + " grid=" + grid.shape_string();
  return {CheckResult::make("adjointness", adj, tol, ctx), CheckResult::make("laplacian_symmetry", sym, tol, ctx),
          CheckResult::make("laplacian_nsd", nsd, tol, ctx)};
}

// --- single-step checks ----------------------------------------------------------

std::vector<CheckResult> check_theta_oracle(const ModelSpec& model, double nu, int n_instances, std::uint64_t seed,
                                            double tol, double gap_limit) {
  std::mt19937_64 rng(seed);
  double worst = 0.0;
  double worst_gap = 0.0;
  for (int k = 0; k < n_instances; ++k) {
    GridSpec grid;
    const double dx = k % 3 == 2 ? 1.0 : 0.5;
    if (k % 2 == 0) {
      grid = GridSpec::line(16, dx);
    } else {
      const int n1 = 2 + static_cast<int>(rng() % 7);
      const int n2 = 2 + static_cast<int>(rng() % 7);
      grid = GridSpec::plane(n1, n2, dx);
    }
    const ScalarField w = cosine_field(grid, rng, 0.0, 1.0);
    const ScalarField eta = cosine_field(grid, rng, 0.0, 1.0);
    const ScalarField theta = k % 4 == 1 ? grain_field(grid, rng, 3, -1.0, 1.0) : cosine_field(grid, rng, -1.0, 1.0);
    const double h = uniform(rng, 0.02, 0.2);
    const ThetaProblem P = ThetaProblem::from_state(theta, w, eta, model, nu, h);
    ThetaStepParams tp;
    tp.h = h;
    const ThetaStepResult r = solve_theta_problem(P, tp);
    const OracleResult o = oracle_theta_min(P);
    worst = max_or(worst, (r.report.primal - o.objective) / (1.0 + std::abs(o.objective)));
    worst = max_or(worst, (o.objective - r.report.primal) / (1.0 + std::abs(o.objective)));
    worst_gap = max_or(worst_gap, r.report.duality_gap);
  }
  const std::string ctx = seed_ctx(seed) + " nu=" + num(nu) + " instances=" + std::to_string(n_instances);
  return {CheckResult::make("theta_oracle", worst, tol, ctx), CheckResult::make("theta_gap", worst_gap, gap_limit, ctx)};
}

std::vector<CheckResult> check_tmonotonicity(const ModelSpec& model, double nu, const GridSpec& grid, double h,
                                             int n_pairs, std::uint64_t seed, double tol) {
  std::mt19937_64 rng(seed);
  double excess = 0.0;
  double expand = -std::numeric_limits<double>::infinity();
  ThetaStepParams tp;
  tp.h = h;
  for (int k = 0; k < n_pairs; ++k) {
    const ScalarField w = cosine_field(grid, rng, 0.0, 1.0);
    const ScalarField eta = cosine_field(grid, rng, 0.0, 1.0);
    const ScalarField low =
        k % 2 ? grain_field(grid, rng, 4, -1.0, 0.5) : cosine_field(grid, rng, -1.0, 0.5);
    ScalarField high = low;
    if (k % 10 != 0) {
      const ScalarField bump = cosine_field(grid, rng, -0.3, 0.5);
      for (std::size_t c = 0; c < high.size(); ++c) high[c] += std::max(0.0, bump[c]);
    }
    const TMonotonicityReport r = tmonotonicity_check(w, eta, low, high, model, nu, tp);
    excess = max_or(excess, r.excess);
    expand = max_or(expand, r.weighted_out - r.weighted_in);
  }
  const std::string ctx = seed_ctx(seed) + " nu=" + num(nu) + " grid=" + grid.shape_string() + " h=" + num(h);
  return {CheckResult::make("t_monotonicity", excess, tol, ctx),
          CheckResult::make("weighted_nonexpansive", expand, tol, ctx)};
}

std::vector<CheckResult> check_perturbation(const ModelSpec& model, double nu, const GridSpec& grid, double h,
                                            int n_pairs, std::uint64_t seed, double amplitude, double ratio_tol) {
  std::mt19937_64 rng(seed);
  VStepParams vp;
  vp.h = h;
  const double lo = model.potential.o_star;
  const double hi = model.potential.iota_star;
  double worst_ratio = 0.0;
  double worst_order = 0.0;
  for (int k = 0; k < n_pairs; ++k) {
    const PhaseState s = random_state(grid, model, rng());
    PhaseState t = s;
    PhaseState u = s;
    for (std::size_t c = 0; c < s.w.size(); ++c) {
      t.w[c] = std::clamp(s.w[c] + amplitude * uniform(rng, -1.0, 1.0), lo, hi);
      t.eta[c] = std::clamp(s.eta[c] + amplitude * uniform(rng, -1.0, 1.0), 0.0, 1.0);
      u.w[c] = std::clamp(s.w[c] + amplitude * uniform(rng, 0.0, 1.0), lo, hi);
      u.eta[c] = std::clamp(s.eta[c] + amplitude * uniform(rng, 0.0, 1.0), 0.0, 1.0);
    }
    const VStepResult a = v_step(s.w, s.eta, s.theta, model, nu, vp);
    const VStepResult b = v_step(t.w, t.eta, s.theta, model, nu, vp);
    const VStepResult c = v_step(u.w, u.eta, s.theta, model, nu, vp);
    worst_ratio = max_or(worst_ratio, v_step_perturbation_bound(a.w, a.eta, b.w, b.eta, s.w, s.eta, t.w, t.eta));
    worst_order = max_or(worst_order, std::sqrt(positive_part_sq(a.w, a.eta, c.w, c.eta)));
  }
  const std::string ctx = seed_ctx(seed) + " nu=" + num(nu) + " grid=" + grid.shape_string() + " h=" + num(h);
  return {CheckResult::make("perturbation_ratio", worst_ratio - 2.0, ratio_tol, ctx),
          CheckResult::make("v_order", worst_order, kStepSlack, ctx)};
}

// --- nu -> 0 study -----------------------------------------------------------------

StudyReport nu_limit_study(const PhaseState& init, const ModelSpec& model, const std::vector<double>& schedule,
                           const SchemeParams& params, int threads) {
  if (schedule.empty()) throw InvalidArgument("nu_limit_study: empty schedule");
  for (std::size_t k = 0; k < schedule.size(); ++k) {
    if (!(schedule[k] >= 0.0)) throw InvalidArgument("nu_limit_study: nu must be >= 0");
    if (k > 0 && !(schedule[k] < schedule[k - 1]))
      throw InvalidArgument("nu_limit_study: schedule must be strictly decreasing");
  }
  StudyReport rep;
  rep.runs.resize(schedule.size());
  std::vector<std::exception_ptr> errors(schedule.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < schedule.size(); k = next++) {
      try {
        SchemeParams p = params;
        p.nu = schedule[k];
        p.record_every = p.n_steps;
        const Trajectory traj = run(init, model, p);
        StudyRun& r = rep.runs[k];
        r.nu = p.nu;
        for (int i = 1; i <= traj.steps(); ++i) {
          r.nu_dirichlet_aggregate += p.h * traj.energies[i].nu_dirichlet_term;
          r.wtv_aggregate += p.h * traj.energies[i].wtv_term;
        }
        r.final_energy = traj.energies.back().total;
        r.dissipation = check_dissipation(traj);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    }
  };
  const int n_threads = std::clamp(threads, 1, static_cast<int>(schedule.size()));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  const double first = rep.runs.front().nu_dirichlet_aggregate;
  const double last = rep.runs.back().nu_dirichlet_aggregate;
  const double ratio = rep.runs.size() == 1 ? 0.0 : (first > 0.0 ? last / first : (last > 0.0 ? 1.0 : 0.0));
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.runs.size(); ++k)
    rep.monotone = rep.monotone && rep.runs[k].nu_dirichlet_aggregate <= rep.runs[k - 1].nu_dirichlet_aggregate;
  rep.trend = CheckResult::make("nu_limit_trend", ratio, kTrendFactor,
                                "runs=" + std::to_string(rep.runs.size()) + " first=" + num(first) + " last=" + num(last) +
                                    (rep.monotone ? " monotone" : " nonmonotone"));
  return rep;
}

}  // namespace pfgb
