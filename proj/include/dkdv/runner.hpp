#pragma once

// Batch execution of scenarios and sweeps with deterministic file output.
//
// A scenario directory holds:
//   energy.csv        one row per record, fixed column order
//   snapshot_NNN.csv  "# t=... box_length=... n=..." then x,u rows
//   analysis.json     residuals, fits and analysis reports
//   config_echo.json  canonical configuration (re-runnable)
//
// Floating-point values in CSV files are written with 17 significant digits.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <fmt/format.h>

#include "dkdv/config.hpp"
#include "dkdv/energy.hpp"
#include "dkdv/integrator.hpp"
#include "dkdv/mild.hpp"
#include "dkdv/potential_well.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

enum class ExitStatus : int {
  ok = 0,
  config_error = 2,
  blow_up = 3,
  precondition_unmet = 4,
};

inline const char* to_string(ExitStatus s) {
  switch (s) {
    case ExitStatus::ok: return "ok";
    case ExitStatus::config_error: return "config_error";
    case ExitStatus::blow_up: return "blow_up";
    case ExitStatus::precondition_unmet: return "precondition_unmet";
  }
  return "?";
}

struct RunOptions {
  bool quiet = true;
  std::ostream* log = &std::cerr;
};

/// Summary of a finished scenario, also used for sweep rows.
struct ScenarioOutcome {
  std::string scenario_id;
  ExitStatus status = ExitStatus::ok;
  std::optional<double> omega;
  std::optional<double> rms_residual;
  std::optional<double> observability;
  std::optional<std::string> vitillaro_verdict;
  std::optional<double> dissipation_residual;
  std::optional<double> hamiltonian_residual;
  std::vector<std::string> errors;
};

inline std::string fmt17(double v) { return fmt::format("{:.17g}", v); }

inline void write_energy_csv(const std::filesystem::path& path,
                             std::span<const EnergyRecord> records) {
  std::ofstream out(path, std::ios::binary);
  out << "t,l2_sq,e0,h1_sq,int_u3,l3_cubed,e_sec3,k_sec3,e1,j_val,diss_cum,"
         "res_dissipation,res_hamiltonian\n";
  for (const auto& r : records) {
    const double rd = dissipation_residual_at(records.front(), r);
    const double rh = hamiltonian_residual_at(records.front(), r);
    out << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},"
                       "{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                       r.t, r.l2_sq, r.e0, r.h1_sq, r.int_u3, r.l3_cubed, r.e_sec3,
                       r.k_sec3, r.e1, r.j_val, r.diss_cum, rd, rh);
  }
}

inline void write_field_csv(const std::filesystem::path& path, const Field& f) {
  std::ofstream out(path, std::ios::binary);
  const GridSpec& g = *f.grid;
  out << fmt::format("# t={:.17g} box_length={:.17g} n={}\n", f.time_tag, g.box_length(),
                     g.n());
  for (std::size_t j = 0; j < g.n(); ++j)
    out << fmt::format("{:.17g},{:.17g}\n", g.x(j), f[j]);
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << "\n";
}

namespace detail {

struct PreparedScenario {
  GridPtr grid;
  Field u0;
  DampingProfile damping;
  std::optional<PotentialWellConstants> well;
};

inline PreparedScenario prepare(const ScenarioConfig& cfg) {
  PreparedScenario p;
  p.grid = make_grid(cfg.grid.box_length, cfg.grid.n);
  p.damping = make_damping(p.grid, cfg.damping.kind, cfg.damping.alpha0, cfg.damping.r1,
                           cfg.damping.width);
  if (cfg.initial_data.kind == "supercritical") {
    if (!(cfg.initial_data.margin >= 0.0 && cfg.initial_data.margin < 1.0))
      throw ConfigError("initial_data.margin: must lie in [0, 1)");
    p.well = estimate_k0(p.grid, cfg.initial_data.restarts);
    p.u0 = construct_supercritical(*p.well, cfg.initial_data.margin);
  } else {
    p.u0 = make_initial_data(p.grid, cfg.initial_data.spec);
  }
  return p;
}

inline Json fit_json(const DecayFit& f) {
  return {{"t_a", f.t_a},           {"t_b", f.t_b},
          {"omega", f.omega},       {"c_pref", f.c_pref},
          {"rms_residual", f.rms_residual}, {"n_points", f.n_points}};
}

inline Json kpv_json(const KpvNorms& k) {
  return {{"gamma1", k.gamma1}, {"gamma2", k.gamma2}, {"gamma3", k.gamma3},
          {"gamma4", k.gamma4}, {"big_gamma", k.big_gamma}, {"T", k.T}};
}

inline Json vitillaro_json(const VitillaroReport& r) {
  Json j = {{"mu", r.mu},
            {"h1_initial", r.h1_initial},
            {"e_initial", r.e_initial},
            {"xi1", r.xi1},
            {"d", r.d},
            {"h1_above_xi1", r.h1_above_xi1},
            {"energy_below_d", r.energy_below_d},
            {"preconditions_met", r.preconditions_met},
            {"verdict", to_string(r.verdict)}};
  if (r.preconditions_met) {
    j["xi2"] = r.xi2;
    j["l3_floor"] = r.l3_floor;
    j["min_h1_over_run"] = r.min_h1_over_run;
    j["min_l3_over_run"] = r.min_l3_over_run;
    j["h1_bound_holds"] = r.h1_bound_holds;
    j["l3_bound_holds"] = r.l3_bound_holds;
    j["k_nonneg_throughout"] = r.k_nonneg_throughout;
    j["out_of_hypothesis"] = !r.k_nonneg_throughout;
    if (!r.k_nonneg_throughout) j["first_k_negative_time"] = r.first_k_negative_time;
    j["energy_monotone_while_k_nonneg"] = r.energy_monotone_while_k_nonneg;
  }
  return j;
}

inline void note(const RunOptions& opt, const std::string& msg) {
  if (!opt.quiet && opt.log) *opt.log << msg << "\n";
}

}  // namespace detail

/// Runs one scenario into `out_dir`. Invalid configurations are rejected
/// before any file is written.
inline ScenarioOutcome run_scenario(const ScenarioConfig& cfg,
                                    const std::filesystem::path& out_dir,
                                    const RunOptions& opt = {}) {
  ScenarioOutcome res;
  res.scenario_id = cfg.scenario_id;

  detail::PreparedScenario prep;
  try {
    cfg.solver.validate();
    prep = detail::prepare(cfg);
  } catch (const ConfigError& e) {
    res.status = ExitStatus::config_error;
    res.errors.push_back(e.what());
    return res;
  } catch (const SupercriticalSearchError& e) {
    res.status = ExitStatus::config_error;
    res.errors.push_back(e.what());
    return res;
  }

  std::filesystem::create_directories(out_dir);
  write_json(out_dir / "config_echo.json", to_json(cfg));

  Json analysis;
  analysis["scenario_id"] = cfg.scenario_id;
  auto unmet = [&](const std::string& what) {
    res.errors.push_back(what);
    if (res.status == ExitStatus::ok) res.status = ExitStatus::precondition_unmet;
  };

  detail::note(opt, fmt::format("[{}] simulating to t = {}", cfg.scenario_id, cfg.solver.t_end));
  TimeSeries series;
  try {
    series = simulate(prep.u0, prep.damping, cfg.solver);
  } catch (const BlowUpError& e) {
    res.status = ExitStatus::blow_up;
    res.errors.push_back(e.what());
    analysis["blow_up"] = {{"last_good_time", e.last_good_time()}};
    if (e.partial()) series = *e.partial();
  }
  series.initial_data = cfg.initial_data.spec;

  if (!series.records.empty()) {
    write_energy_csv(out_dir / "energy.csv", series.records);
    res.dissipation_residual = dissipation_residual(series.records);
    res.hamiltonian_residual = hamiltonian_residual(series.records);
    analysis["t_final"] = series.records.back().t;
    analysis["record_count"] = series.records.size();
    analysis["dissipation_residual"] = *res.dissipation_residual;
    analysis["hamiltonian_residual"] = *res.hamiltonian_residual;
    double max_rise = 0.0;
    for (std::size_t i = 1; i < series.records.size(); ++i)
      max_rise = std::max(max_rise, series.records[i].e0 - series.records[i - 1].e0);
    analysis["max_e0_increase"] = max_rise;
  }
  for (std::size_t i = 0; i < series.snapshots.size(); ++i)
    write_field_csv(out_dir / fmt::format("snapshot_{:03d}.csv", i), series.snapshots[i]);

  const bool have_run = res.status != ExitStatus::blow_up;

  if (!cfg.analyses.decay_fit.empty()) {
    Json fits = Json::array();
    for (const auto& w : cfg.analyses.decay_fit) {
      try {
        const DecayFit f = fit_decay(series.records, w.t_a, w.t_b);
        fits.push_back(detail::fit_json(f));
        if (!res.omega) {
          res.omega = f.omega;
          res.rms_residual = f.rms_residual;
        }
      } catch (const std::exception& e) {
        unmet(e.what());
        fits.push_back({{"t_a", w.t_a}, {"t_b", w.t_b}, {"error", e.what()}});
      }
    }
    analysis["decay_fit"] = fits.front();
    analysis["decay_fits"] = fits;
  }

  if (const auto& o = cfg.analyses.observability) {
    try {
      const auto rep = observability_ratio(series, prep.damping, o->r1, o->T, o->T0);
      res.observability = rep.ratio;
      analysis["observability"] = {{"r1", o->r1},
                                   {"T", rep.T},
                                   {"T0", o->T0},
                                   {"ratio", rep.ratio},
                                   {"numerator", rep.numerator},
                                   {"denominator", rep.denominator}};
    } catch (const std::exception& e) {
      unmet(e.what());
      analysis["observability"] = {{"error", e.what()}};
    }
  }

  if (const auto& p = cfg.analyses.picard; p && have_run) {
    Json pj;
    const auto u0n = norms(prep.u0);
    const auto rep = t_kappa(std::sqrt(u0n.h1_sq), prep.damping.w2inf_norm, p->c1);
    pj["contraction"] = {{"c1", rep.c1},           {"kappa", rep.kappa},
                         {"c2", rep.c2},           {"t_kappa", rep.t_kappa},
                         {"lhs_at_t", rep.lhs_at_t}};
    try {
      const auto sol = picard_solve(prep.u0, prep.damping, p->T, p->tol, p->max_iter, p->n_t,
                                    cfg.solver.rhs());
      SolverConfig ref = cfg.solver;
      ref.t_end = p->T;
      ref.snapshot_times = {p->T};
      ref.observe_r1.reset();
      const auto check = simulate(prep.u0, prep.damping, ref);
      pj["iterations"] = sol.iterations;
      pj["distances"] = sol.distances;
      pj["h1_disagreement_vs_integrator"] =
          h1_distance(sol.solution.slices.back(), check.snapshots.back());
      pj["kpv_norms"] = detail::kpv_json(kpv_norms(sol.solution));
    } catch (const PicardNonConvergence& e) {
      unmet(e.what());
      pj["error"] = e.what();
      pj["distances"] = e.log();
    } catch (const BlowUpError& e) {
      unmet(e.what());
      pj["error"] = e.what();
    }
    analysis["picard"] = pj;
  }

  if (const auto& v = cfg.analyses.vitillaro; v && have_run) {
    try {
      if (!prep.well) prep.well = estimate_k0(prep.grid, v->restarts);
      SolverConfig vc = cfg.solver;
      vc.snapshot_times.clear();
      vc.observe_r1.reset();
      const auto rep = vitillaro_experiment(prep.u0, v->mu, vc, *prep.well);
      res.vitillaro_verdict = to_string(rep.verdict);
      analysis["vitillaro"] = detail::vitillaro_json(rep);
      if (!rep.preconditions_met) unmet("vitillaro: initial data does not satisfy the hypotheses");
    } catch (const VitillaroBlowUp& e) {
      analysis["vitillaro"] = detail::vitillaro_json(e.partial());
      analysis["vitillaro"]["error"] = e.what();
      res.vitillaro_verdict = "blow_up";
      unmet(e.what());
    } catch (const ConfigError& e) {
      unmet(e.what());
      analysis["vitillaro"] = {{"error", e.what()}};
    }
  }

  if (prep.well) {
    analysis["potential_well"] = {{"k0", prep.well->k0},
                                  {"xi1", prep.well->xi1},
                                  {"d", prep.well->d},
                                  {"family_k0", prep.well->family_k0}};
  }

  analysis["status"] = to_string(res.status);
  analysis["exit_code"] = static_cast<int>(res.status);
  analysis["errors"] = res.errors;
  write_json(out_dir / "analysis.json", analysis);
  detail::note(opt, fmt::format("[{}] done: {}", cfg.scenario_id, to_string(res.status)));
  return res;
}

inline ScenarioOutcome run_scenario(const ScenarioConfig& cfg, const RunOptions& opt = {}) {
  return run_scenario(cfg, cfg.output_dir, opt);
}

// ---------------------------------------------------------------------------
// Sweeps

namespace detail {

inline std::string axis_path(const std::string& name) {
  static const std::vector<std::pair<std::string, std::string>> aliases = {
      {"mu", "damping.alpha0"},          {"alpha0", "damping.alpha0"},
      {"r1", "damping.r1"},              {"width", "damping.width"},
      {"seed", "initial_data.seed"},     {"target_h1", "initial_data.target_h1"},
      {"c", "initial_data.c"},           {"amplitude", "initial_data.amplitude"},
      {"sigma", "initial_data.sigma"},   {"band", "initial_data.band"},
      {"n", "grid.n"},                   {"box_length", "grid.box_length"},
      {"dt", "solver.dt"},               {"t_end", "solver.t_end"}};
  for (const auto& [alias, path] : aliases)
    if (name == alias) return path;
  return name;
}

inline void set_path(Json& j, const std::string& dotted, const Json& value) {
  Json* cur = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = dotted.find('.', start);
    const std::string key = dotted.substr(start, dot - start);
    if (key.empty()) throw ConfigError("sweep: bad axis path '" + dotted + "'");
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      return;
    }
    if (!cur->contains(key)) (*cur)[key] = Json::object();
    cur = &(*cur)[key];
    start = dot + 1;
  }
}

inline std::string axis_value_label(const Json& v) {
  if (v.is_string()) return v.get<std::string>();
  return v.dump();
}

}  // namespace detail

struct SweepPoint {
  std::string scenario_id;
  std::vector<Json> values;  // one per axis
  Json config;
};

/// Cartesian product of the axes in declaration order, the last axis
/// varying fastest.
inline std::vector<SweepPoint> expand_sweep(const SweepConfig& sw) {
  std::size_t total = 1;
  for (const auto& ax : sw.axes) total *= ax.values.size();
  if (total > sw.max_runs)
    throw ConfigError(fmt::format("sweep: {} runs exceed max_runs = {}", total, sw.max_runs));
  const std::string base_id = sw.base.contains("scenario_id") && sw.base["scenario_id"].is_string()
                                  ? sw.base["scenario_id"].get<std::string>()
                                  : std::string("scenario");
  std::vector<SweepPoint> points;
  points.reserve(total);
  std::vector<std::size_t> idx(sw.axes.size(), 0);
  for (std::size_t p = 0; p < total; ++p) {
    SweepPoint pt;
    pt.config = sw.base;
    pt.scenario_id = base_id;
    for (std::size_t a = 0; a < sw.axes.size(); ++a) {
      const Json& v = sw.axes[a].values[idx[a]];
      detail::set_path(pt.config, detail::axis_path(sw.axes[a].name), v);
      pt.values.push_back(v);
      pt.scenario_id += "__" + sw.axes[a].name + "=" + detail::axis_value_label(v);
    }
    pt.config["scenario_id"] = pt.scenario_id;
    points.push_back(std::move(pt));
    for (std::size_t a = sw.axes.size(); a-- > 0;) {
      if (++idx[a] < sw.axes[a].values.size()) break;
      idx[a] = 0;
    }
  }
  return points;
}

inline std::string opt_csv(const std::optional<double>& v) {
  return v ? fmt17(*v) : std::string();
}

/// Runs every sweep point (up to `parallelism` at once) and writes
/// summary.csv in cartesian order. Failed points are recorded, not fatal.
inline std::vector<ScenarioOutcome> run_sweep(const SweepConfig& sw,
                                              const std::filesystem::path& out_dir,
                                              const RunOptions& opt = {}) {
  const auto points = expand_sweep(sw);
  if (!opt.quiet && opt.log)
    *opt.log << fmt::format("sweep: {} scenario(s), parallelism {}\n", points.size(),
                            sw.parallelism);
  std::vector<ScenarioOutcome> outcomes(points.size());
  std::atomic<std::size_t> next{0};
  std::mutex log_mutex;
  std::ostringstream sink;

  auto worker = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= points.size()) return;
      ScenarioOutcome out;
      out.scenario_id = points[i].scenario_id;
      try {
        const ScenarioConfig cfg = parse_scenario(points[i].config);
        RunOptions quiet_opt = opt;
        quiet_opt.quiet = true;
        out = run_scenario(cfg, out_dir / cfg.scenario_id, quiet_opt);
      } catch (const ConfigError& e) {
        out.status = ExitStatus::config_error;
        out.errors.push_back(e.what());
      } catch (const std::exception& e) {
        out.status = ExitStatus::precondition_unmet;
        out.errors.push_back(e.what());
      }
      if (!opt.quiet && opt.log) {
        std::lock_guard lock(log_mutex);
        *opt.log << fmt::format("  [{}/{}] {}: {}\n", i + 1, points.size(), out.scenario_id,
                                to_string(out.status));
      }
      outcomes[i] = std::move(out);
    }
  };
  const std::size_t threads = std::min<std::size_t>(sw.parallelism, points.size());
  std::vector<std::thread> pool;
  for (std::size_t t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  std::filesystem::create_directories(out_dir);
  std::ofstream csv(out_dir / "summary.csv", std::ios::binary);
  csv << "scenario_id";
  for (const auto& ax : sw.axes) csv << "," << ax.name;
  csv << ",status,omega,rms_residual,observability_ratio,vitillaro_verdict,"
         "dissipation_residual,hamiltonian_residual,error\n";
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& o = outcomes[i];
    csv << o.scenario_id;
    for (const auto& v : points[i].values) csv << "," << detail::axis_value_label(v);
    std::string err = o.errors.empty() ? "" : o.errors.front();
    std::replace(err.begin(), err.end(), ',', ';');
    std::replace(err.begin(), err.end(), '\n', ' ');
    csv << "," << to_string(o.status) << "," << opt_csv(o.omega) << ","
        << opt_csv(o.rms_residual) << "," << opt_csv(o.observability) << ","
        << o.vitillaro_verdict.value_or("") << "," << opt_csv(o.dissipation_residual) << ","
        << opt_csv(o.hamiltonian_residual) << "," << err << "\n";
  }
  return outcomes;
}

}  // namespace dkdv
