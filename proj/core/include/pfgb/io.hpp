#pragma once

// File formats: field snapshots (CSV or raw little-endian f64 with a sidecar)
// and the per-step energy log.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>

#include "pfgb/grid.hpp"
#include "pfgb/scheme.hpp"

namespace pfgb {

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view data) noexcept;
/// Zero-padded 16-digit lowercase hex.
std::string hex64(std::uint64_t v);

/// Provenance written as the second header line of every output file.
struct Provenance {
  std::string digest;
  std::uint64_t seed = 0;
  std::string comment_line() const;  // "# digest=<hex> seed=<u64>"
};

/// "# grid dim=<d> shape=<n1>[x<n2>] dx=<dx>"
std::string grid_header(const GridSpec& grid);
GridSpec parse_grid_header(std::string_view line);

/// Shortest decimal form that parses back to the same double.
std::string format_double(double v);
double parse_double(std::string_view s);

void write_snapshot_csv(std::ostream& os, const ScalarField& f, const Provenance& prov);
void write_snapshot_csv(const std::filesystem::path& path, const ScalarField& f, const Provenance& prov);
ScalarField read_snapshot_csv(std::istream& is);
ScalarField read_snapshot_csv(const std::filesystem::path& path);

/// Writes <path> (raw values) and <path>.meta (grid and provenance sections).
void write_snapshot_raw(const std::filesystem::path& path, const ScalarField& f, const Provenance& prov);
ScalarField read_snapshot_raw(const std::filesystem::path& path);

inline constexpr std::string_view kEnergyLogColumns =
    "step,t,dirichlet_v,gamma,g,wtv,nu_dirichlet,total,diss_v,diss_theta,v_outer_iters,theta_iters,"
    "max_box_violation,linf_theta";

/// Streams the energy log: header on construction, one row per call.
class EnergyLogWriter {
 public:
  EnergyLogWriter(std::ostream& os, const Provenance& prov);
  /// Row for the initial state (step 0; increments and iteration counts are 0).
  void write_initial(const EnergyBreakdown& e, double linf_theta);
  void write(const StepReport& r);

 private:
  void row(int step, double t, const EnergyBreakdown& e, double diss_v, double diss_theta, int outer,
           int theta_iters, double box, double linf);
  std::ostream& os_;
};

}  // namespace pfgb
