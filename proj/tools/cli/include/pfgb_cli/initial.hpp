#pragma once

#include <cstdint>

#include "pfgb/energy.hpp"
#include "pfgb_cli/config.hpp"

namespace pfgb::cli {

/// wells: constants (iota*, 1, 0).  random: smooth seeded fields in the
/// admissible box.  grains: theta piecewise constant on `grains` Voronoi cells
/// in [-amplitude, amplitude], w and eta close to their upper wells.
PhaseState make_initial(InitKind kind, const GridSpec& grid, const ModelSpec& model, std::uint64_t seed,
                        double amplitude = 1.0, int grains = 4);

}  // namespace pfgb::cli
