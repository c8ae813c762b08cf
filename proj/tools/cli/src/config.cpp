#include "pfgb_cli/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pfgb/io.hpp"

namespace pfgb::cli {
namespace {

using Setter = std::function<void(RunConfig&, const std::string&)>;

std::string unquote(std::string v) {
  if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') || (v.front() == '\'' && v.back() == '\'')))
    return v.substr(1, v.size() - 2);
  return v;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

template <typename Int>
Int to_int(const std::string& key, const std::string& v) {
  Int out{};
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size()) throw ConfigError(key + ": expected an integer, got '" + v + "'");
  return out;
}

std::vector<double> to_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(key, item));
  return out;
}

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = [] {
    std::map<std::string, Setter> t;
    t["model.potential"] = [](RunConfig& c, const std::string& v) {
      if (v == "g1") c.potential.setting = Potential::Polynomial;
      else if (v == "g2") c.potential.setting = Potential::Logarithmic;
      else if (v == "g3") c.potential.setting = Potential::Indicator;
      else throw ConfigError("model.potential: expected g1, g2 or g3, got '" + v + "'");
    };
    t["model.c"] = [](RunConfig& c, const std::string& v) { c.potential.c = to_double("model.c", v); };
    t["model.u"] = [](RunConfig& c, const std::string& v) { c.potential.u = to_double("model.u", v); };
    t["model.o_star"] = [](RunConfig& c, const std::string& v) { c.potential.o_star = to_double("model.o_star", v); };
    t["model.iota_star"] = [](RunConfig& c, const std::string& v) {
      c.potential.iota_star = to_double("model.iota_star", v);
    };
    t["model.mobility"] = [](RunConfig& c, const std::string& v) {
      if (v == "constant") c.mobility.kind = MobilityKind::Constant;
      else if (v == "kobayashi") c.mobility.kind = MobilityKind::KobayashiSafeguarded;
      else throw ConfigError("model.mobility: expected constant or kobayashi, got '" + v + "'");
    };
    t["model.kappa"] = [](RunConfig& c, const std::string& v) { c.mobility.kappa = to_double("model.kappa", v); };
    t["model.a0"] = [](RunConfig& c, const std::string& v) { c.mobility.a0 = to_double("model.a0", v); };
    t["model.a"] = [](RunConfig& c, const std::string& v) { c.mobility.a = to_double("model.a", v); };
    t["model.b"] = [](RunConfig& c, const std::string& v) { c.mobility.b = to_double("model.b", v); };

    t["grid.dim"] = [](RunConfig& c, const std::string& v) { c.grid.dim = to_int<int>("grid.dim", v); };
    t["grid.shape"] = [](RunConfig& c, const std::string& v) {
      const auto x = v.find('x');
      if (x == std::string::npos) {
        c.grid.shape = {to_int<int>("grid.shape", v), 1};
      } else {
        c.grid.shape = {to_int<int>("grid.shape", v.substr(0, x)), to_int<int>("grid.shape", v.substr(x + 1))};
      }
    };
    t["grid.dx"] = [](RunConfig& c, const std::string& v) { c.grid.dx = to_double("grid.dx", v); };

    t["scheme.h"] = [](RunConfig& c, const std::string& v) { c.h = to_double("scheme.h", v); };
    t["scheme.h_frac"] = [](RunConfig& c, const std::string& v) { c.h_frac = to_double("scheme.h_frac", v); };
    t["scheme.nu"] = [](RunConfig& c, const std::string& v) { c.nu = to_double("scheme.nu", v); };
    t["scheme.n_steps"] = [](RunConfig& c, const std::string& v) { c.n_steps = to_int<int>("scheme.n_steps", v); };
    t["scheme.record_every"] = [](RunConfig& c, const std::string& v) {
      c.record_every = to_int<int>("scheme.record_every", v);
    };
    t["scheme.outer_tol"] = [](RunConfig& c, const std::string& v) { c.outer_tol = to_double("scheme.outer_tol", v); };
    t["scheme.inner_tol"] = [](RunConfig& c, const std::string& v) { c.inner_tol = to_double("scheme.inner_tol", v); };
    t["scheme.max_outer"] = [](RunConfig& c, const std::string& v) { c.max_outer = to_int<int>("scheme.max_outer", v); };
    t["scheme.max_inner"] = [](RunConfig& c, const std::string& v) { c.max_inner = to_int<int>("scheme.max_inner", v); };
    t["scheme.gap_tol"] = [](RunConfig& c, const std::string& v) { c.gap_tol = to_double("scheme.gap_tol", v); };
    t["scheme.theta_max_iters"] = [](RunConfig& c, const std::string& v) {
      c.theta_max_iters = to_int<int>("scheme.theta_max_iters", v);
    };

    t["init.kind"] = [](RunConfig& c, const std::string& v) {
      if (v == "wells") c.init_kind = InitKind::Wells;
      else if (v == "random") c.init_kind = InitKind::Random;
      else if (v == "grains") c.init_kind = InitKind::Grains;
      else throw ConfigError("init.kind: expected wells, random or grains, got '" + v + "'");
    };
    t["init.seed"] = [](RunConfig& c, const std::string& v) { c.seed = to_int<std::uint64_t>("init.seed", v); };
    t["init.amplitude"] = [](RunConfig& c, const std::string& v) { c.amplitude = to_double("init.amplitude", v); };
    t["init.grains"] = [](RunConfig& c, const std::string& v) { c.grains = to_int<int>("init.grains", v); };

    t["output.directory"] = [](RunConfig& c, const std::string& v) { c.out_dir = v; };
    t["output.formats"] = [](RunConfig& c, const std::string& v) {
      c.write_csv = c.write_raw = false;
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ',')) {
        item.erase(0, item.find_first_not_of(' '));
        item.erase(item.find_last_not_of(' ') + 1);
        if (item == "csv") c.write_csv = true;
        else if (item == "raw") c.write_raw = true;
        else throw ConfigError("output.formats: unknown format '" + item + "'");
      }
    };

    t["verify.oracle_instances"] = [](RunConfig& c, const std::string& v) {
      c.oracle_instances = to_int<int>("verify.oracle_instances", v);
    };
    t["verify.tmono_pairs"] = [](RunConfig& c, const std::string& v) {
      c.tmono_pairs = to_int<int>("verify.tmono_pairs", v);
    };
    t["verify.perturbation_pairs"] = [](RunConfig& c, const std::string& v) {
      c.perturbation_pairs = to_int<int>("verify.perturbation_pairs", v);
    };
    t["verify.sandwich_samples"] = [](RunConfig& c, const std::string& v) {
      c.sandwich_samples = to_int<int>("verify.sandwich_samples", v);
    };
    t["verify.derivative_points"] = [](RunConfig& c, const std::string& v) {
      c.derivative_points = to_int<int>("verify.derivative_points", v);
    };

    t["sweep.nu_schedule"] = [](RunConfig& c, const std::string& v) {
      c.nu_schedule = to_list("sweep.nu_schedule", v);
    };
    t["sweep.threads"] = [](RunConfig& c, const std::string& v) { c.threads = to_int<int>("sweep.threads", v); };

    t["probe.h_factor"] = [](RunConfig& c, const std::string& v) {
      c.probe_h_factor = to_double("probe.h_factor", v);
    };
    t["probe.steps"] = [](RunConfig& c, const std::string& v) { c.probe_steps = to_int<int>("probe.steps", v); };
    return t;
  }();
  return table;
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw ConfigError(msg);
}

void validate(const RunConfig& c) {
  check(!(c.h && c.h_frac), "scheme: give at most one of h and h_frac");
  if (c.h) check(*c.h > 0.0, "scheme.h: must be positive");
  if (c.h_frac) check(*c.h_frac > 0.0 && *c.h_frac < 1.0, "scheme.h_frac: must lie in (0, 1)");
  check(c.nu >= 0.0, "scheme.nu: must be >= 0");
  check(c.n_steps >= 1, "scheme.n_steps: must be >= 1");
  check(c.record_every >= 1, "scheme.record_every: must be >= 1");
  check(c.outer_tol > 0.0 && c.inner_tol > 0.0 && c.gap_tol > 0.0, "scheme: tolerances must be positive");
  check(c.max_outer >= 1 && c.max_inner >= 1 && c.theta_max_iters >= 1, "scheme: iteration caps must be >= 1");
  check(c.amplitude >= 0.0, "init.amplitude: must be >= 0");
  check(c.grains >= 1, "init.grains: must be >= 1");
  check(c.write_csv || c.write_raw, "output.formats: at least one format required");
  check(c.threads >= 1, "sweep.threads: must be >= 1");
  check(c.probe_h_factor > 0.0, "probe.h_factor: must be positive");
  check(c.probe_steps >= 1, "probe.steps: must be >= 1");
  try {
    c.grid.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("grid: ") + e.what());
  }
  try {
    c.potential.validate();
    c.mobility.validate();
  } catch (const std::exception& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

}  // namespace

std::string to_string(InitKind k) {
  switch (k) {
    case InitKind::Wells: return "wells";
    case InitKind::Random: return "random";
    case InitKind::Grains: return "grains";
  }
  return "?";
}

RunConfig parse_config_text(const std::string& text) {
  std::stringstream filtered;
  {
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
      const auto first = line.find_first_not_of(" \t");
      if (first != std::string::npos && line[first] == '#') continue;
      filtered << line << '\n';
    }
  }
  boost::property_tree::ptree tree;
  try {
    boost::property_tree::read_ini(filtered, tree);
  } catch (const boost::property_tree::ini_parser_error& e) {
    throw ConfigError("config: " + e.message() + " at line " + std::to_string(e.line()));
  }
  RunConfig cfg;
  const auto& table = setters();
  for (const auto& [section, body] : tree) {
    if (body.empty() && !body.data().empty()) throw ConfigError(section + ": key outside any section");
    for (const auto& [key, node] : body) {
      const std::string path = section + "." + key;
      const auto it = table.find(path);
      if (it == table.end()) throw ConfigError(path + ": unknown key");
      it->second(cfg, unquote(node.data()));
    }
  }
  if (cfg.grid.dim == 1) cfg.grid.shape[1] = 1;
  validate(cfg);
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config_text(ss.str());
}

std::string RunConfig::canonical() const {
  std::ostringstream os;
  auto kv = [&](const char* k, const std::string& v) { os << k << '=' << v << '\n'; };
  auto d = [](double x) { return format_double(x); };
  kv("model.potential", pfgb::to_string(potential.setting));
  kv("model.c", d(potential.c));
  kv("model.u", d(potential.u));
  kv("model.o_star", d(potential.o_star));
  kv("model.iota_star", d(potential.iota_star));
  kv("model.mobility", pfgb::to_string(mobility.kind));
  kv("model.kappa", d(mobility.kappa));
  kv("model.a0", d(mobility.a0));
  kv("model.a", d(mobility.a));
  kv("model.b", d(mobility.b));
  kv("grid.dim", std::to_string(grid.dim));
  kv("grid.shape", grid.shape_string());
  kv("grid.dx", d(grid.dx));
  kv("scheme.h", h ? d(*h) : "-");
  kv("scheme.h_frac", h_frac ? d(*h_frac) : (h ? "-" : d(0.5)));
  kv("scheme.nu", d(nu));
  kv("scheme.n_steps", std::to_string(n_steps));
  kv("scheme.record_every", std::to_string(record_every));
  kv("scheme.outer_tol", d(outer_tol));
  kv("scheme.inner_tol", d(inner_tol));
  kv("scheme.max_outer", std::to_string(max_outer));
  kv("scheme.max_inner", std::to_string(max_inner));
  kv("scheme.gap_tol", d(gap_tol));
  kv("scheme.theta_max_iters", std::to_string(theta_max_iters));
  kv("init.kind", to_string(init_kind));
  kv("init.amplitude", d(amplitude));
  kv("init.grains", std::to_string(grains));
  kv("output.formats", std::string(write_csv ? "csv" : "") + (write_csv && write_raw ? "," : "") +
                           (write_raw ? "raw" : ""));
  kv("verify.oracle_instances", std::to_string(oracle_instances));
  kv("verify.tmono_pairs", std::to_string(tmono_pairs));
  kv("verify.perturbation_pairs", std::to_string(perturbation_pairs));
  kv("verify.sandwich_samples", std::to_string(sandwich_samples));
  kv("verify.derivative_points", std::to_string(derivative_points));
  std::string sched;
  for (double v : nu_schedule) sched += (sched.empty() ? "" : ",") + d(v);
  kv("sweep.nu_schedule", sched.empty() ? "-" : sched);
  kv("probe.h_factor", d(probe_h_factor));
  kv("probe.steps", std::to_string(probe_steps));
  return os.str();
}

std::string RunConfig::digest() const { return hex64(fnv1a64(canonical())); }

ModelSpec make_model(const RunConfig& cfg) { return ModelSpec::make(cfg.potential, cfg.mobility); }

double resolve_h(const RunConfig& cfg, const ModelSpec& model) {
  if (cfg.h) return *cfg.h;
  return cfg.h_frac.value_or(0.5) * h_star(model);
}

SchemeParams make_scheme_params(const RunConfig& cfg, const ModelSpec& model, bool override_h_gate) {
  SchemeParams p;
  p.h = resolve_h(cfg, model);
  p.nu = cfg.nu;
  p.n_steps = cfg.n_steps;
  p.record_every = cfg.record_every;
  p.override_h_gate = override_h_gate;
  p.vstep.outer_tol = cfg.outer_tol;
  p.vstep.inner_tol = cfg.inner_tol;
  p.vstep.max_outer = cfg.max_outer;
  p.vstep.max_inner = cfg.max_inner;
  p.thetastep.gap_tol = cfg.gap_tol;
  p.thetastep.max_iters = cfg.theta_max_iters;
  p.sync();
  return p;
}

}  // namespace pfgb::cli
