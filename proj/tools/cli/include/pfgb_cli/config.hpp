#pragma once

// Run configuration: a sectioned key = value file.
//
//   [model]   potential, c, u, o_star, iota_star, mobility, kappa, a0, a, b
//   [grid]    dim, shape, dx
//   [scheme]  h | h_frac, nu, n_steps, record_every, outer_tol, inner_tol,
//             max_outer, max_inner, gap_tol, theta_max_iters
//   [init]    kind, seed, amplitude, grains
//   [output]  directory, formats
//   [verify]  oracle_instances, tmono_pairs, perturbation_pairs,
//             sandwich_samples, derivative_points
//   [sweep]   nu_schedule, threads
//   [probe]   h_factor, steps
//
// Lines starting with ';' or '#' are comments; string values may be quoted.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pfgb/grid.hpp"
#include "pfgb/model.hpp"
#include "pfgb/scheme.hpp"

namespace pfgb::cli {

/// Thrown for unreadable files, unknown keys and bad values; the message
/// names the offending key path (e.g. "scheme.h_frac").
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class InitKind { Wells, Random, Grains };

struct RunConfig {
  PotentialSpec potential{};
  MobilitySpec mobility{};
  GridSpec grid = GridSpec::line(64, 0.5);

  std::optional<double> h;
  std::optional<double> h_frac;
  double nu = 0.0;
  int n_steps = 100;
  int record_every = 10;
  double outer_tol = 1e-10;
  double inner_tol = 1e-13;
  int max_outer = 200;
  int max_inner = 200'000;
  double gap_tol = 1e-11;
  int theta_max_iters = 2'000'000;

  InitKind init_kind = InitKind::Random;
  std::uint64_t seed = 0;
  double amplitude = 1.0;
  int grains = 4;

  std::filesystem::path out_dir = "out";
  bool write_csv = true;
  bool write_raw = false;

  int oracle_instances = 20;
  int tmono_pairs = 50;
  int perturbation_pairs = 20;
  int sandwich_samples = 100;
  int derivative_points = 1000;

  std::vector<double> nu_schedule;  // empty selects 2^-1 ... 2^-8
  int threads = 1;

  double probe_h_factor = 2.0;
  int probe_steps = 20;

  /// Canonical text of every setting that affects results (everything except
  /// the seed and the output directory), with keys in a fixed order.
  std::string canonical() const;
  /// FNV-1a of canonical(), as 16 hex digits.
  std::string digest() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// Builds the model (caching L and c*).
ModelSpec make_model(const RunConfig& cfg);
/// Time step: h, or h_frac * h_star (h_frac defaults to 0.5).
double resolve_h(const RunConfig& cfg, const ModelSpec& model);
SchemeParams make_scheme_params(const RunConfig& cfg, const ModelSpec& model, bool override_h_gate);

std::string to_string(InitKind k);

}  // namespace pfgb::cli
