#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pfgb/verify.hpp"
#include "pfgb_cli/config.hpp"

namespace pfgb::cli {

struct CommandOptions {
  std::filesystem::path config;
  std::optional<std::filesystem::path> out;
  std::optional<std::uint64_t> seed;
  bool override_h_gate = false;
};

/// Config with --out / --seed applied.
RunConfig resolve_config(const CommandOptions& opts);

/// Writes energy.csv and snapshots/ under the output directory.
int cmd_run(const CommandOptions& opts, std::ostream& log);
/// Runs the configured trajectory plus every check; writes checks.csv and
/// prints the same rows.  Returns 1 if any check fails.
int cmd_verify(const CommandOptions& opts, std::ostream& out);
/// nu -> 0 study; writes sweep.csv and checks.csv.
int cmd_sweep_nu(const CommandOptions& opts, std::ostream& out);
/// Measures outer-loop contraction ratios at h = h_factor * h_star; writes probe.csv.
int cmd_probe_contraction(const CommandOptions& opts, std::ostream& out);

/// Checks run by `verify`, without file output.
std::vector<CheckResult> verify_checks(const RunConfig& cfg, bool override_h_gate);

struct ProbeRow {
  int step = 0;
  int outer_iters = 0;
  double max_ratio = 0.0;
  double bound = 0.0;    // h L
  double ceiling = 0.0;  // h_star L, the largest ratio certified inside the hypotheses
};
struct ProbeResult {
  double h = 0.0;
  bool outside_hypotheses = false;
  std::vector<ProbeRow> rows;
  double max_ratio = 0.0;
  bool exceeds_bound = false;
  bool exceeds_ceiling = false;
};
ProbeResult probe_contraction(const RunConfig& cfg, bool override_h_gate);

}  // namespace pfgb::cli
