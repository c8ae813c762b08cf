#include <CLI11.hpp>
#include <iostream>

#include "pfgb/error.hpp"
#include "pfgb_cli/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"pfgb: phase-field grain boundary solver and verification harness"};
  app.require_subcommand(1);

  pfgb::cli::CommandOptions opts;
  std::string out_dir;
  std::uint64_t seed = 0;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "Configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory (overrides [output] directory)");
    sub->add_option("--seed", seed, "Seed (overrides [init] seed)");
    sub->add_flag("--override-h-gate", opts.override_h_gate, "Allow h >= h_star");
  };
  auto* run = app.add_subcommand("run", "Run the scheme and write the energy log and snapshots");
  auto* verify = app.add_subcommand("verify", "Run every check; exit 1 if any fails");
  auto* sweep = app.add_subcommand("sweep-nu", "nu -> 0 study over a decreasing schedule");
  auto* probe = app.add_subcommand("probe-contraction", "Measure outer-loop contraction ratios");
  for (auto* s : {run, verify, sweep, probe}) add_common(s);

  CLI11_PARSE(app, argc, argv);
  for (auto* s : {run, verify, sweep, probe}) {
    if (!s->parsed()) continue;
    if (s->count("--out")) opts.out = out_dir;
    if (s->count("--seed")) opts.seed = seed;
  }

  try {
    if (run->parsed()) return pfgb::cli::cmd_run(opts, std::cout);
    if (verify->parsed()) return pfgb::cli::cmd_verify(opts, std::cout);
    if (sweep->parsed()) return pfgb::cli::cmd_sweep_nu(opts, std::cout);
    if (probe->parsed()) return pfgb::cli::cmd_probe_contraction(opts, std::cout);
  } catch (const pfgb::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const pfgb::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const pfgb::StepError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
