#include "pfgb_cli/commands.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>

#include "pfgb/error.hpp"
#include "pfgb/io.hpp"
#include "pfgb_cli/initial.hpp"

namespace pfgb::cli {
namespace {

namespace fs = std::filesystem;

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw ConfigError("output: cannot write " + p.string());
  return os;
}

Provenance provenance(const RunConfig& cfg) { return Provenance{cfg.digest(), cfg.seed}; }

PhaseState initial_state(const RunConfig& cfg, const ModelSpec& model) {
  return make_initial(cfg.init_kind, cfg.grid, model, cfg.seed, cfg.amplitude, cfg.grains);
}

void write_checks(const fs::path& path, const std::vector<CheckResult>& checks, const Provenance& prov) {
  auto os = open_out(path);
  os << prov.comment_line() << '\n' << CheckResult::csv_header() << '\n';
  for (const auto& c : checks) os << c.csv_row() << '\n';
}

void print_checks(std::ostream& out, const std::vector<CheckResult>& checks) {
  out << CheckResult::csv_header() << '\n';
  for (const auto& c : checks) out << c.csv_row() << '\n';
}

void tag(std::vector<CheckResult>& checks, const std::string& prefix) {
  for (auto& c : checks) c.context = prefix + (c.context.empty() ? "" : " " + c.context);
}

std::string snapshot_name(int step, const char* field) {
  std::ostringstream os;
  os << "step_" << std::setw(6) << std::setfill('0') << step << '_' << field;
  return os.str();
}

}  // namespace

RunConfig resolve_config(const CommandOptions& opts) {
  RunConfig cfg = load_config(opts.config);
  if (opts.out) cfg.out_dir = *opts.out;
  if (opts.seed) cfg.seed = *opts.seed;
  return cfg;
}

int cmd_run(const CommandOptions& opts, std::ostream& log) {
  const RunConfig cfg = resolve_config(opts);
  const ModelSpec model = make_model(cfg);
  const SchemeParams params = make_scheme_params(cfg, model, opts.override_h_gate);
  const PhaseState init = initial_state(cfg, model);
  const Provenance prov = provenance(cfg);

  fs::create_directories(cfg.out_dir / "snapshots");
  {
    auto os = open_out(cfg.out_dir / "config.resolved");
    os << prov.comment_line() << '\n' << cfg.canonical();
  }
  auto energy_os = open_out(cfg.out_dir / "energy.csv");
  EnergyLogWriter writer(energy_os, prov);
  writer.write_initial(free_energy(init, model, params.nu), init.theta.max_abs());

  SchemeSink sink;
  sink.on_step = [&](const StepReport& r) { writer.write(r); };
  sink.on_snapshot = [&](int step, const PhaseState& s) {
    const fs::path dir = cfg.out_dir / "snapshots";
    const std::pair<const char*, const ScalarField*> fields[] = {{"w", &s.w}, {"eta", &s.eta}, {"theta", &s.theta}};
    for (const auto& [name, f] : fields) {
      if (cfg.write_csv) write_snapshot_csv(dir / (snapshot_name(step, name) + ".csv"), *f, prov);
      if (cfg.write_raw) write_snapshot_raw(dir / (snapshot_name(step, name) + ".f64"), *f, prov);
    }
  };
  const Trajectory traj = run(init, model, params, sink);
  log << "digest=" << prov.digest << " seed=" << prov.seed << " steps=" << traj.steps() << " h=" << params.h
      << " final_energy=" << format_double(traj.energies.back().total) << '\n';
  if (traj.outside_hypotheses) log << "warning: h >= h_star, run is outside the theorem hypotheses\n";
  return 0;
}

std::vector<CheckResult> verify_checks(const RunConfig& cfg, bool override_h_gate) {
  const ModelSpec model = make_model(cfg);
  const SchemeParams params = make_scheme_params(cfg, model, override_h_gate);
  const PhaseState init = initial_state(cfg, model);
  const Trajectory traj = run(init, model, params);

  std::vector<CheckResult> out{check_dissipation(traj), check_telescoped(traj), check_energy_bound(traj, model),
                               check_box(traj, model), check_linfty(traj), check_contraction(traj)};
  if (delta1(model.mobility) > 0.0)
    out.push_back(check_gamma_sandwich(model, cfg.nu > 0.0 ? cfg.nu : 0.1, cfg.grid, cfg.sandwich_samples, cfg.seed));
  out.push_back(check_derivatives(model, cfg.derivative_points, cfg.seed));
  for (auto& c : check_grid_identities(cfg.grid, 20, cfg.seed)) out.push_back(std::move(c));
  for (auto& c : check_theta_oracle(model, cfg.nu, cfg.oracle_instances, cfg.seed)) out.push_back(std::move(c));
  for (auto& c : check_tmonotonicity(model, cfg.nu, cfg.grid, params.h, cfg.tmono_pairs, cfg.seed))
    out.push_back(std::move(c));
  for (auto& c : check_perturbation(model, cfg.nu, cfg.grid, params.h, cfg.perturbation_pairs, cfg.seed))
    out.push_back(std::move(c));
  tag(out, "digest=" + cfg.digest());
  return out;
}

int cmd_verify(const CommandOptions& opts, std::ostream& out) {
  const RunConfig cfg = resolve_config(opts);
  const std::vector<CheckResult> checks = verify_checks(cfg, opts.override_h_gate);
  fs::create_directories(cfg.out_dir);
  write_checks(cfg.out_dir / "checks.csv", checks, provenance(cfg));
  print_checks(out, checks);
  return all_passed(checks) ? 0 : 1;
}

int cmd_sweep_nu(const CommandOptions& opts, std::ostream& out) {
  RunConfig cfg = resolve_config(opts);
  std::vector<double> schedule = cfg.nu_schedule;
  if (schedule.empty())
    for (int k = 1; k <= 8; ++k) schedule.push_back(std::ldexp(1.0, -k));
  const ModelSpec model = make_model(cfg);
  SchemeParams params = make_scheme_params(cfg, model, opts.override_h_gate);
  const PhaseState init = initial_state(cfg, model);
  const StudyReport rep = nu_limit_study(init, model, schedule, params, cfg.threads);

  const Provenance prov = provenance(cfg);
  fs::create_directories(cfg.out_dir);
  {
    auto os = open_out(cfg.out_dir / "sweep.csv");
    os << prov.comment_line() << '\n'
       << "nu,nu_dirichlet_aggregate,wtv_aggregate,final_energy,dissipation_worst,dissipation_passed\n";
    for (const StudyRun& r : rep.runs)
      os << format_double(r.nu) << ',' << format_double(r.nu_dirichlet_aggregate) << ','
         << format_double(r.wtv_aggregate) << ',' << format_double(r.final_energy) << ','
         << format_double(r.dissipation.worst_violation) << ',' << (r.dissipation.passed ? "true" : "false") << '\n';
  }
  std::vector<CheckResult> checks{rep.trend};
  for (const StudyRun& r : rep.runs) {
    CheckResult c = r.dissipation;
    c.name = "dissipation_nu=" + format_double(r.nu);
    checks.push_back(std::move(c));
  }
  tag(checks, "digest=" + prov.digest);
  write_checks(cfg.out_dir / "checks.csv", checks, prov);
  print_checks(out, checks);
  return all_passed(checks) ? 0 : 1;
}

ProbeResult probe_contraction(const RunConfig& cfg, bool override_h_gate) {
  const ModelSpec model = make_model(cfg);
  const double gate = h_star(model);
  const double h = cfg.probe_h_factor * gate;
  if (!(h < gate) && !override_h_gate)
    throw InvalidArgument("probe-contraction: h = " + format_double(h) + " is not below h_star = " +
                          format_double(gate) + "; pass --override-h-gate");
  RunConfig c = cfg;
  c.h = h;
  c.h_frac.reset();
  c.n_steps = cfg.probe_steps;
  SchemeParams params = make_scheme_params(c, model, override_h_gate);
  params.record_every = params.n_steps;
  const Trajectory traj = run(initial_state(c, model), model, params);

  ProbeResult res;
  res.h = h;
  res.outside_hypotheses = traj.outside_hypotheses;
  const double ceiling = gate * model.c2_norm;
  for (const StepReport& r : traj.reports) {
    res.rows.push_back({r.step, r.vstep.outer_iters, r.vstep.max_contraction_ratio, r.vstep.contraction_bound, ceiling});
    res.max_ratio = std::max(res.max_ratio, r.vstep.max_contraction_ratio);
    res.exceeds_bound = res.exceeds_bound || r.vstep.max_contraction_ratio > r.vstep.contraction_bound * (1.0 + 1e-6);
    res.exceeds_ceiling = res.exceeds_ceiling || r.vstep.max_contraction_ratio > ceiling;
  }
  return res;
}

int cmd_probe_contraction(const CommandOptions& opts, std::ostream& out) {
  const RunConfig cfg = resolve_config(opts);
  const ProbeResult res = probe_contraction(cfg, opts.override_h_gate);
  const Provenance prov = provenance(cfg);
  fs::create_directories(cfg.out_dir);
  auto os = open_out(cfg.out_dir / "probe.csv");
  os << prov.comment_line() << '\n' << "step,outer_iters,max_ratio,bound_hL,ceiling,exceeds_bound,exceeds_ceiling\n";
  for (const ProbeRow& r : res.rows)
    os << r.step << ',' << r.outer_iters << ',' << format_double(r.max_ratio) << ',' << format_double(r.bound) << ','
       << format_double(r.ceiling) << ',' << (r.max_ratio > r.bound * (1.0 + 1e-6) ? "true" : "false") << ','
       << (r.max_ratio > r.ceiling ? "true" : "false") << '\n';
  out << "h=" << format_double(res.h) << " max_ratio=" << format_double(res.max_ratio)
      << " bound_hL=" << format_double(res.rows.empty() ? 0.0 : res.rows.front().bound)
      << " ceiling=" << format_double(res.rows.empty() ? 0.0 : res.rows.front().ceiling)
      << " exceeds_bound=" << (res.exceeds_bound ? "true" : "false")
      << " exceeds_ceiling=" << (res.exceeds_ceiling ? "true" : "false") << '\n';
  if (res.outside_hypotheses) out << "flag: outside theorem hypotheses (h >= h_star)\n";
  return !res.outside_hypotheses && res.exceeds_bound ? 1 : 0;
}

}  // namespace pfgb::cli
