// Command-line front end: run, sweep, k0, estimate-c1.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "dkdv/dkdv.hpp"

namespace fs = std::filesystem;
using namespace dkdv;

namespace {

struct Globals {
  std::string out;
  std::optional<std::uint64_t> seed;
  bool quiet = false;
};

Json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("'" + path + "': " + e.what());
  }
}

void emit(const Globals& g, const Json& j, const std::string& file_name) {
  std::cout << j.dump(2) << "\n";
  if (!g.out.empty()) {
    fs::create_directories(g.out);
    write_json(fs::path(g.out) / file_name, j);
  }
}

int cmd_run(const Globals& g, const std::string& config_path) {
  Json j = load_json(config_path);
  if (g.seed) j["initial_data"]["seed"] = *g.seed;
  ScenarioConfig cfg = parse_scenario(j);
  if (!g.out.empty()) cfg.output_dir = g.out;
  RunOptions opt;
  opt.quiet = g.quiet;
  const auto res = run_scenario(cfg, opt);
  for (const auto& e : res.errors) std::cerr << "dkdv run: " << e << "\n";
  return static_cast<int>(res.status);
}

int cmd_sweep(const Globals& g, const std::string& config_path) {
  Json j = load_json(config_path);
  if (g.seed && j.contains("base")) j["base"]["initial_data"]["seed"] = *g.seed;
  const SweepConfig sw = parse_sweep(j);
  fs::path out = g.out;
  if (out.empty())
    out = sw.base.contains("output_dir") ? sw.base["output_dir"].get<std::string>() : "out";
  RunOptions opt;
  opt.quiet = g.quiet;
  run_sweep(sw, out, opt);
  return 0;
}

int cmd_k0(const Globals& g, std::size_t n, double box, std::size_t restarts) {
  K0Options opt;
  if (g.seed) opt.seed_offset = *g.seed;
  const auto c = estimate_k0(make_grid(box, n), restarts, opt);
  if (!g.quiet)
    for (const auto& line : c.method_log) std::cerr << line << "\n";
  Json j = {{"n", n},           {"box_length", box},       {"restarts", restarts},
            {"k0", c.k0},       {"xi1", c.xi1},            {"d", c.d},
            {"family_k0", c.family_k0}, {"family_width", c.family_width},
            {"edge_tail", c.edge_tail}};
  emit(g, j, "k0.json");
  return 0;
}

// Battery file: {"grid": {"box_length", "n"}, "n_time_samples": N,
//                "members": [initial_data objects]}
int cmd_estimate_c1(const Globals& g, double T, const std::string& battery_path) {
  const Json j = load_json(battery_path);
  if (!j.is_object() || !j.contains("members") || !j["members"].is_array())
    throw ConfigError("battery: expected an object with a 'members' array");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (it.key() != "grid" && it.key() != "members" && it.key() != "n_time_samples")
      throw ConfigError("battery: unknown key '" + it.key() + "'");
  GridConfig gc;
  if (j.contains("grid")) {
    const auto probe = parse_scenario({{"grid", j["grid"]}});
    gc = probe.grid;
  }
  std::size_t n_t = 256;
  if (j.contains("n_time_samples")) {
    if (!j["n_time_samples"].is_number_unsigned())
      throw ConfigError("battery.n_time_samples: expected a positive integer");
    n_t = j["n_time_samples"].get<std::size_t>();
  }
  std::vector<InitialDataSpec> specs;
  for (const auto& m : j["members"]) {
    auto idc = parse_initial_data(m, "battery.members[]");
    if (idc.kind == "supercritical")
      throw ConfigError("battery: supercritical data is not supported here");
    if (g.seed) idc.spec.seed += *g.seed;
    specs.push_back(idc.spec);
  }
  const auto grid = make_grid(gc.box_length, gc.n);
  const auto rep = verify_linear_estimates(grid, T, specs, n_t);
  Json out = {{"T", rep.t_horizon},
              {"battery_size", rep.battery_size},
              {"n_time_samples", rep.n_time_samples},
              {"strichartz_ratio", rep.strichartz_ratio},
              {"maximal_ratio", rep.maximal_ratio},
              {"smoothing_ratio", rep.smoothing_ratio},
              {"c1_empirical", rep.c1_empirical}};
  emit(g, out, "c1.json");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped KdV pseudospectral simulator and diagnostics"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  app.add_option("--out", g.out, "Output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "Seed for random data and restarts");
  app.add_flag("--quiet", g.quiet, "Suppress progress messages");

  std::string config_path;
  auto* run = app.add_subcommand("run", "Run one scenario");
  run->add_option("--config", config_path, "Scenario JSON")->required();
  auto* sweep = app.add_subcommand("sweep", "Run a parameter sweep");
  sweep->add_option("--config", config_path, "Sweep JSON")->required();

  std::size_t grid_n = 1024, restarts = 0;
  double box = 80.0;
  auto* k0 = app.add_subcommand("k0", "Estimate the sharp constant k0");
  k0->add_option("--grid-n", grid_n, "Grid points")->capture_default_str();
  k0->add_option("--box", box, "Box length")->capture_default_str();
  k0->add_option("--restarts", restarts, "Random restarts")->capture_default_str();

  double horizon = 1.0;
  std::string battery;
  auto* c1 = app.add_subcommand("estimate-c1", "Empirical linear-estimate constant");
  c1->add_option("--T", horizon, "Time horizon")->required();
  c1->add_option("--battery", battery, "Battery JSON")->required();

  for (auto* sub : {run, sweep, k0, c1}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : static_cast<int>(ExitStatus::config_error);
  }
  if (seed_opt->count() > 0) g.seed = seed;

  try {
    if (*run) return cmd_run(g, config_path);
    if (*sweep) return cmd_sweep(g, config_path);
    if (*k0) return cmd_k0(g, grid_n, box, restarts);
    if (*c1) return cmd_estimate_c1(g, horizon, battery);
  } catch (const ConfigError& e) {
    std::cerr << "dkdv: config error: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::config_error);
  } catch (const BlowUpError& e) {
    std::cerr << "dkdv: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::blow_up);
  } catch (const PreconditionError& e) {
    std::cerr << "dkdv: precondition unmet: " << e.what() << "\n";
    return static_cast<int>(ExitStatus::precondition_unmet);
  }
  return 0;
}
