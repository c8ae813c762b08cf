// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "pfgb/io.hpp"
#include "pfgb/verify.hpp"
#include "pfgb_cli/commands.hpp"
#include "pfgb_cli/config.hpp"

using namespace pfgb;
namespace fs = std::filesystem;

namespace {

struct Criterion {
  int id;
  std::string title;
  std::vector<CheckResult> checks;
  std::string note;
  bool failed_to_run = false;

  bool passed() const { return !failed_to_run && all_passed(checks); }
};

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ModelSpec model_for(Potential s) {
  PotentialSpec p;
  p.setting = s;
  if (s == Potential::Logarithmic) {
    p.o_star = 0.05;
    p.iota_star = 0.95;
  }
  return ModelSpec::make(p, MobilitySpec{});
}

SchemeParams params_for(const ModelSpec& m, double nu, int steps) {
  SchemeParams p;
  p.h = 0.5 * h_star(m);
  p.nu = nu;
  p.n_steps = steps;
  p.record_every = steps;
  p.sync();
  return p;
}

// Worst check of a family under a common name: a failing member if there is
// one, otherwise the member closest to its tolerance.
CheckResult worst_of(const std::string& name, const std::vector<CheckResult>& cs) {
  auto scaled = [](const CheckResult& c) { return c.tolerance > 0.0 ? c.worst_violation / c.tolerance : c.worst_violation; };
  const CheckResult* pick = nullptr;
  for (const CheckResult& c : cs)
    if (pick == nullptr || (!c.passed && pick->passed) || (c.passed == pick->passed && scaled(c) > scaled(*pick)))
      pick = &c;
  CheckResult w = pick != nullptr ? *pick : CheckResult::make(name, 0.0, 0.0);
  w.name = name;
  return w;
}

void print(const Criterion& c, double seconds) {
  std::printf("%s [%d] %s", c.passed() ? "PASS" : "FAIL", c.id, c.title.c_str());
  if (!c.checks.empty()) {
    std::printf(":");
    for (const CheckResult& r : c.checks)
      std::printf(" %s=%.3g(tol %.1g)%s", r.name.c_str(), r.worst_violation, r.tolerance, r.passed ? "" : "!");
  }
  if (!c.note.empty()) std::printf(" | %s", c.note.c_str());
  std::printf(" [%.1fs]\n", seconds);
  std::fflush(stdout);
  if (!c.passed())
    for (const CheckResult& r : c.checks)
      if (!r.passed) std::printf("    %s\n", r.csv_row().c_str());
}

void guarded(Criterion& c, const std::function<void()>& body) {
  try {
    body();
  } catch (const std::exception& e) {
    c.failed_to_run = true;
    c.note += std::string(c.note.empty() ? "" : "; ") + "error: " + e.what();
  }
}

const Potential kPotentials[] = {Potential::Polynomial, Potential::Logarithmic, Potential::Indicator};
const double kNus[] = {0.0, 0.1};

struct RunRecord {
  std::string label;
  ModelSpec model;
  Trajectory traj;
};

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::stringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

// Every regular file under `a` must exist under `b` with identical bytes.
bool trees_identical(const fs::path& a, const fs::path& b, int& files, std::string& first_diff) {
  files = 0;
  for (const auto& e : fs::recursive_directory_iterator(a)) {
    if (!e.is_regular_file()) continue;
    const fs::path rel = fs::relative(e.path(), a);
    ++files;
    if (!fs::exists(b / rel) || slurp(e.path()) != slurp(b / rel)) {
      first_diff = rel.string();
      return false;
    }
  }
  return files > 0;
}

}  // namespace

int main() {
  const auto t_all = std::chrono::steady_clock::now();
  std::vector<Criterion> results;
  const GridSpec line = GridSpec::line(64, 0.5);
  const GridSpec plane = GridSpec::plane(32, 32, 0.5);

  // Trajectories shared by the first three criteria.
  std::vector<RunRecord> runs;
  std::string run_errors;
  const auto t_runs = std::chrono::steady_clock::now();
  double slowest = 0.0;
  for (Potential p : kPotentials) {
    const ModelSpec m = model_for(p);
    for (double nu : kNus) {
      for (const GridSpec& g : {line, plane}) {
        const std::string label = to_string(p) + " nu=" + format_double(nu) + " grid=" + g.shape_string();
        const auto t0 = std::chrono::steady_clock::now();
        try {
          runs.push_back({label, m, run(random_state(g, m, 2024), m, params_for(m, nu, 100))});
        } catch (const std::exception& e) {
          run_errors += label + ": " + e.what() + "; ";
        }
        const double dt = elapsed(t0);
        slowest = std::max(slowest, dt);
        std::printf("  run %-28s %6.1fs\n", label.c_str(), dt);
        std::fflush(stdout);
      }
    }
  }
  const double runs_seconds = elapsed(t_runs);

  {
    Criterion c{1, "energy dissipation (12 runs, 100 steps, h = 0.5 h*)", {}, {}};
    std::vector<CheckResult> diss, tele;
    for (const RunRecord& r : runs) {
      diss.push_back(check_dissipation(r.traj));
      tele.push_back(check_telescoped(r.traj));
    }
    c.checks = {worst_of("step_dissipation", diss), worst_of("telescoped", tele)};
    c.checks.push_back(CheckResult::make("slowest_run_seconds", slowest, 60.0));
    if (!run_errors.empty()) {
      c.failed_to_run = true;
      c.note = run_errors;
    }
    print(c, runs_seconds);
    results.push_back(c);
  }
  {
    Criterion c{2, "box invariance and maximum principle", {}, {}};
    std::vector<CheckResult> box, linf;
    for (const RunRecord& r : runs) {
      box.push_back(check_box(r.traj, r.model));
      linf.push_back(check_linfty(r.traj));
    }
    c.checks = {worst_of("box", box), worst_of("linf_theta", linf)};
    c.failed_to_run = !run_errors.empty();
    print(c, 0.0);
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{3, "outer-loop contraction at h = 0.5 h*", {}, {}};
    guarded(c, [&] {
      std::vector<CheckResult> traj_checks, step_checks;
      for (const RunRecord& r : runs) traj_checks.push_back(check_contraction(r.traj));
      for (Potential p : kPotentials) {
        const ModelSpec m = model_for(p);
        VStepParams vp;
        vp.h = 0.5 * h_star(m);
        double worst = -INFINITY;
        for (int k = 0; k < 20; ++k) {
          const PhaseState s = random_state(k % 2 ? plane : line, m, 500 + k);
          const VStepResult v = v_step(s.w, s.eta, s.theta, m, k % 4 < 2 ? 0.0 : 0.1, vp);
          worst = std::max(worst, v.report.max_contraction_ratio / v.report.contraction_bound - 1.0);
        }
        step_checks.push_back(CheckResult::make("random_steps", worst, 1e-6, to_string(p)));
      }
      c.checks = {worst_of("trajectory_ratio", traj_checks), worst_of("random_step_ratio", step_checks)};

      // Negative control: beyond the gate the measured ratio may leave the certified range.
      cli::RunConfig probe;
      probe.grid = line;
      probe.nu = 0.1;
      probe.seed = 3;
      probe.probe_h_factor = 2.0;
      probe.probe_steps = 20;
      const cli::ProbeResult pr = cli::probe_contraction(probe, true);
      std::ostringstream os;
      os << "probe h=2h*: max_ratio=" << format_double(pr.max_ratio) << " bound_hL="
         << format_double(pr.rows.front().bound) << " ceiling_h*L=" << format_double(pr.rows.front().ceiling)
         << " exceeds_ceiling=" << (pr.exceeds_ceiling ? "true" : "false")
         << " exceeds_bound=" << (pr.exceeds_bound ? "true" : "false") << " (recorded, not gated)";
      c.note = os.str();
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{4, "theta-step oracle agreement (20 instances, <= 64 cells)", {}, {}};
    guarded(c, [&] {
      const ModelSpec m = model_for(Potential::Polynomial);
      std::vector<CheckResult> obj, gap;
      for (double nu : kNus) {
        const auto rs = check_theta_oracle(m, nu, 20, 77 + static_cast<int>(nu * 10));
        obj.push_back(rs[0]);
        gap.push_back(rs[1]);
      }
      c.checks = {worst_of("objective", obj), worst_of("duality_gap", gap)};
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{5, "T-monotonicity and weighted nonexpansiveness (50 pairs per configuration)", {}, {}};
    guarded(c, [&] {
      const ModelSpec m = model_for(Potential::Polynomial);
      const double h = 0.5 * h_star(m);
      std::vector<CheckResult> order_1d, order_2d, nonexp;
      std::uint64_t seed = 900;
      for (double nu : kNus)
        for (const GridSpec& g : {line, plane}) {
          const auto rs = check_tmonotonicity(m, nu, g, h, 50, seed++);
          (g.dim == 1 ? order_1d : order_2d).push_back(rs[0]);
          nonexp.push_back(rs[1]);
        }
      c.checks = {worst_of("order_excess_1d", order_1d), worst_of("order_excess_2d", order_2d),
                  worst_of("weighted_nonexpansive", nonexp)};
      if (!c.checks[1].passed)
        c.note = "isotropic cell norm is not submodular in 2D, so the discrete comparison principle can fail there";
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{6, "v-step perturbation stability (20 pairs, h = 0.5 h*)", {}, {}};
    guarded(c, [&] {
      std::vector<CheckResult> ratio;
      for (Potential p : kPotentials) {
        const ModelSpec m = model_for(p);
        for (double nu : kNus) ratio.push_back(check_perturbation(m, nu, line, 0.5 * h_star(m), 20, 60)[0]);
      }
      c.checks = {worst_of("ratio_minus_2", ratio)};
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{7, "Gamma-sandwich (100 fields per mobility spec)", {}, {}};
    guarded(c, [&] {
      MobilitySpec constant;
      constant.kind = MobilityKind::Constant;
      constant.a0 = 1.0;
      constant.a = 0.5;
      constant.b = 2.0;
      std::vector<CheckResult> cs;
      for (const MobilitySpec& mob : {MobilitySpec{}, constant}) {
        const ModelSpec m = ModelSpec::make(PotentialSpec{}, mob);
        cs.push_back(check_gamma_sandwich(m, 0.1, GridSpec::plane(16, 16, 0.5), 100, 7));
        cs.push_back(check_gamma_sandwich(m, 0.1, line, 100, 8));
      }
      c.checks = {worst_of("sandwich", cs)};
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{8, "nu -> 0 trend on the 1D benchmark (nu = 2^-1 ... 2^-8)", {}, {}};
    guarded(c, [&] {
      const ModelSpec m = model_for(Potential::Polynomial);
      std::vector<double> schedule;
      for (int k = 1; k <= 8; ++k) schedule.push_back(std::ldexp(1.0, -k));
      const StudyReport rep = nu_limit_study(random_state(line, m, 1), m, schedule, params_for(m, 0.5, 100));
      std::vector<CheckResult> diss;
      for (const StudyRun& r : rep.runs) diss.push_back(r.dissipation);
      c.checks = {rep.trend, worst_of("sweep_dissipation", diss)};
      std::ostringstream os;
      os << "first=" << format_double(rep.runs.front().nu_dirichlet_aggregate)
         << " last=" << format_double(rep.runs.back().nu_dirichlet_aggregate)
         << " monotone=" << (rep.monotone ? "true" : "false");
      c.note = os.str();
    });
    c.checks.push_back(CheckResult::make("sweep_seconds", elapsed(t0), 600.0));
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{9, "derivative consistency and grid identities", {}, {}};
    guarded(c, [&] {
      std::vector<CheckResult> deriv, adj, sym;
      for (Potential p : kPotentials) deriv.push_back(check_derivatives(model_for(p), 1000, 31));
      for (const GridSpec& g : {line, plane}) {
        const auto rs = check_grid_identities(g, 50, 41);
        for (const CheckResult& r : rs) (r.name == "adjointness" ? adj : sym).push_back(r);
      }
      c.checks = {worst_of("derivatives", deriv), worst_of("adjointness", adj), worst_of("laplacian", sym)};
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }
  {
    const auto t0 = std::chrono::steady_clock::now();
    Criterion c{10, "determinism of energy logs and snapshots", {}, {}};
    guarded(c, [&] {
      const fs::path root = fs::temp_directory_path() / "pfgb_acceptance_determinism";
      fs::remove_all(root);
      fs::create_directories(root);
      const std::string cfg_text =
          "[model]\npotential = g2\no_star = 0.05\niota_star = 0.95\n"
          "[grid]\ndim = 2\nshape = 16x16\ndx = 0.5\n"
          "[scheme]\nh_frac = 0.5\nnu = 0.1\nn_steps = 10\nrecord_every = 5\n"
          "[init]\nkind = grains\nseed = 5\ngrains = 5\n"
          "[output]\nformats = csv,raw\n";
      std::ofstream(root / "c.ini") << cfg_text;
      std::ostringstream log;
      int files = 0;
      std::string diff;
      double worst = 0.0;
      for (int rep = 0; rep < 2; ++rep) {
        const fs::path a = root / ("a" + std::to_string(rep)), b = root / ("b" + std::to_string(rep));
        cli::cmd_run({root / "c.ini", a, 5u + rep, false}, log);
        cli::cmd_run({root / "c.ini", b, 5u + rep, false}, log);
        if (!trees_identical(a, b, files, diff) || !trees_identical(b, a, files, diff)) worst = 1.0;
      }
      c.checks = {CheckResult::make("bitwise_mismatch", worst, 0.0)};
      c.note = std::to_string(files) + " files compared per pair" + (diff.empty() ? "" : ", first mismatch " + diff);
      fs::remove_all(root);
    });
    print(c, elapsed(t0));
    results.push_back(c);
  }

  int failed = 0;
  for (const Criterion& c : results) failed += c.passed() ? 0 : 1;
  std::printf("acceptance: %d/%zu criteria passed in %.1fs\n", static_cast<int>(results.size()) - failed,
              results.size(), elapsed(t_all));
  return failed == 0 ? 0 : 1;
}
