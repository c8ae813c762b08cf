#include "pfgb_cli/initial.hpp"

#include "pfgb/error.hpp"
#include "pfgb/verify.hpp"

namespace pfgb::cli {

PhaseState make_initial(InitKind kind, const GridSpec& grid, const ModelSpec& model, std::uint64_t seed,
                        double amplitude, int grains) {
  const double top = model.potential.iota_star;
  const double span = top - model.potential.o_star;
  switch (kind) {
    case InitKind::Wells:
      return PhaseState{ScalarField(grid, top), ScalarField(grid, 1.0), ScalarField(grid, 0.0)};
    case InitKind::Random:
      return random_state(grid, model, seed, amplitude);
    case InitKind::Grains: {
      std::mt19937_64 rng(seed);
      PhaseState s;
      s.theta = grain_field(grid, rng, grains, -amplitude, amplitude);
      s.w = cosine_field(grid, rng, top - 0.1 * span, top);
      s.eta = cosine_field(grid, rng, 0.9, 1.0);
      return s;
    }
  }
  throw InvalidArgument("make_initial: unknown kind");
}

}  // namespace pfgb::cli
