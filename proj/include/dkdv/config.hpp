#pragma once

// Scenario and sweep configuration: strict JSON parsing (unknown keys are
// errors) and a canonical echo that parses back to the same configuration.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dkdv/error.hpp"
#include "dkdv/integrator.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

using Json = nlohmann::ordered_json;

struct GridConfig {
  double box_length = 80.0;
  std::size_t n = 512;
};

struct InitialDataConfig {
  // soliton | gaussian | random_h1 | supercritical
  std::string kind = "soliton";
  InitialDataSpec spec;
  // supercritical: data on the maximizer ray with E(0) < d (1 - margin).
  double margin = 0.1;
  std::size_t restarts = 0;
};

struct DampingConfig {
  DampingKind kind = DampingKind::none;
  double alpha0 = 0.0;
  double r1 = 0.0;
  double width = 1.0;
};

struct DecayWindow {
  double t_a = 0.0;
  double t_b = 0.0;
};

struct ObservabilityConfig {
  double r1 = 0.0;
  double T = 0.0;
  double T0 = 1.0;
};

struct VitillaroConfig {
  double mu = 0.01;
  std::size_t restarts = 0;
};

struct PicardConfig {
  double T = 0.05;
  double tol = 1e-8;
  double c1 = 2.0;
  std::size_t n_t = 64;
  std::size_t max_iter = 100;
};

struct AnalysesConfig {
  std::vector<DecayWindow> decay_fit;
  std::optional<ObservabilityConfig> observability;
  std::optional<VitillaroConfig> vitillaro;
  std::optional<PicardConfig> picard;
};

struct ScenarioConfig {
  std::string scenario_id = "scenario";
  std::string output_dir = "out";
  GridConfig grid;
  InitialDataConfig initial_data;
  DampingConfig damping;
  SolverConfig solver;
  AnalysesConfig analyses;
};

struct SweepAxis {
  std::string name;
  std::vector<Json> values;
};

struct SweepConfig {
  Json base;  // raw base scenario, re-parsed per point
  std::vector<SweepAxis> axes;
  std::size_t parallelism = 1;
  std::size_t max_runs = 1000;
};

namespace detail {

/// Reads keys from a JSON object, remembering which ones were consumed.
class ObjectReader {
 public:
  ObjectReader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json& raw(const std::string& key) {
    used_.insert(key);
    return j_.at(key);
  }

  double number(const std::string& key, double def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_number()) throw ConfigError(where(key) + ": expected a number");
    return v.get<double>();
  }

  std::uint64_t count(const std::string& key, std::uint64_t def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0)
      return static_cast<std::uint64_t>(v.get<std::int64_t>());
    throw ConfigError(where(key) + ": expected a nonnegative integer");
  }

  bool flag(const std::string& key, bool def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_boolean()) throw ConfigError(where(key) + ": expected true or false");
    return v.get<bool>();
  }

  std::string text(const std::string& key, std::string def) {
    if (!has(key)) return def;
    const Json& v = raw(key);
    if (!v.is_string()) throw ConfigError(where(key) + ": expected a string");
    return v.get<std::string>();
  }

  std::string where(const std::string& key) const { return path_ + "." + key; }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key()))
        throw ConfigError(path_ + ": unknown key '" + it.key() + "'");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

inline DampingKind parse_damping_kind(const std::string& s) {
  for (auto k : {DampingKind::none, DampingKind::constant, DampingKind::right_step,
                 DampingKind::left_step, DampingKind::sponge})
    if (s == to_string(k)) return k;
  throw ConfigError("damping.kind: unknown kind '" + s + "'");
}

inline InitialKind parse_initial_kind(const std::string& s) {
  if (s == "soliton" || s == "supercritical") return InitialKind::soliton;
  if (s == "gaussian") return InitialKind::gaussian;
  if (s == "random_h1") return InitialKind::random_h1;
  throw ConfigError("initial_data.kind: unknown kind '" + s + "'");
}

}  // namespace detail

inline InitialDataConfig parse_initial_data(const Json& j,
                                            const std::string& path = "initial_data") {
  InitialDataConfig c;
  detail::ObjectReader r(j, path);
  auto& s = c.spec;
  c.kind = r.text("kind", c.kind);
  s.kind = detail::parse_initial_kind(c.kind);
  s.c = r.number("c", s.c);
  s.amplitude = r.number("amplitude", s.amplitude);
  s.x0 = r.number("x0", s.x0);
  s.sigma = r.number("sigma", s.sigma);
  s.seed = r.count("seed", s.seed);
  s.target_h1 = r.number("target_h1", s.target_h1);
  s.band = r.count("band", s.band);
  c.margin = r.number("margin", c.margin);
  c.restarts = r.count("restarts", c.restarts);
  r.finish();
  return c;
}

inline ScenarioConfig parse_scenario(const Json& j) {
  ScenarioConfig c;
  detail::ObjectReader top(j, "config");
  c.scenario_id = top.text("scenario_id", c.scenario_id);
  c.output_dir = top.text("output_dir", c.output_dir);
  if (c.scenario_id.empty()) throw ConfigError("config.scenario_id: must not be empty");

  if (top.has("grid")) {
    detail::ObjectReader r(top.raw("grid"), "grid");
    c.grid.box_length = r.number("box_length", c.grid.box_length);
    c.grid.n = r.count("n", c.grid.n);
    r.finish();
  }
  if (top.has("initial_data")) c.initial_data = parse_initial_data(top.raw("initial_data"));
  if (top.has("damping")) {
    detail::ObjectReader r(top.raw("damping"), "damping");
    c.damping.kind = detail::parse_damping_kind(r.text("kind", "none"));
    c.damping.alpha0 = r.number("alpha0", c.damping.alpha0);
    c.damping.r1 = r.number("r1", c.damping.r1);
    c.damping.width = r.number("width", c.damping.width);
    r.finish();
  }
  if (top.has("solver")) {
    detail::ObjectReader r(top.raw("solver"), "solver");
    auto& s = c.solver;
    s.dt = r.number("dt", s.dt);
    s.t_end = r.number("t_end", s.t_end);
    s.record_stride = r.count("record_stride", s.record_stride);
    s.dealias_on = r.flag("dealias_on", s.dealias_on);
    s.nonlinear_on = r.flag("nonlinear_on", s.nonlinear_on);
    if (r.has("snapshot_times")) {
      const Json& arr = r.raw("snapshot_times");
      if (!arr.is_array()) throw ConfigError("solver.snapshot_times: expected an array");
      for (const auto& v : arr) {
        if (!v.is_number()) throw ConfigError("solver.snapshot_times: expected numbers");
        s.snapshot_times.push_back(v.get<double>());
      }
    }
    r.finish();
  }
  if (top.has("analyses")) {
    detail::ObjectReader r(top.raw("analyses"), "analyses");
    if (r.has("decay_fit")) {
      const Json& arr = r.raw("decay_fit");
      if (!arr.is_array()) throw ConfigError("analyses.decay_fit: expected an array");
      for (const auto& w : arr) {
        detail::ObjectReader wr(w, "analyses.decay_fit[]");
        DecayWindow win{wr.number("t_a", 0.0), wr.number("t_b", 0.0)};
        wr.finish();
        if (!(win.t_a < win.t_b))
          throw ConfigError("analyses.decay_fit: window needs t_a < t_b");
        c.analyses.decay_fit.push_back(win);
      }
    }
    if (r.has("observability")) {
      detail::ObjectReader o(r.raw("observability"), "analyses.observability");
      ObservabilityConfig oc;
      oc.r1 = o.number("r1", oc.r1);
      oc.T = o.number("T", oc.T);
      oc.T0 = o.number("T0", oc.T0);
      o.finish();
      c.analyses.observability = oc;
    }
    if (r.has("vitillaro")) {
      detail::ObjectReader o(r.raw("vitillaro"), "analyses.vitillaro");
      VitillaroConfig vc;
      vc.mu = o.number("mu", vc.mu);
      vc.restarts = o.count("restarts", vc.restarts);
      o.finish();
      if (!(vc.mu >= 0.0)) throw ConfigError("analyses.vitillaro.mu: must be >= 0");
      c.analyses.vitillaro = vc;
    }
    if (r.has("picard")) {
      detail::ObjectReader o(r.raw("picard"), "analyses.picard");
      PicardConfig pc;
      pc.T = o.number("T", pc.T);
      pc.tol = o.number("tol", pc.tol);
      pc.c1 = o.number("c1", pc.c1);
      pc.n_t = o.count("n_t", pc.n_t);
      pc.max_iter = o.count("max_iter", pc.max_iter);
      o.finish();
      if (!(pc.T > 0.0) || !(pc.tol > 0.0) || !(pc.c1 > 1.0) || pc.n_t < 2 ||
          pc.max_iter < 1)
        throw ConfigError("analyses.picard: need T > 0, tol > 0, c1 > 1, n_t >= 2, max_iter >= 1");
      c.analyses.picard = pc;
    }
    r.finish();
  }
  top.finish();

  c.solver.validate();
  if (c.analyses.observability) c.solver.observe_r1 = c.analyses.observability->r1;
  return c;
}

/// Canonical form of a configuration. The output directory is a location,
/// not a parameter of the computation, and is left out.
inline Json to_json(const ScenarioConfig& c) {
  Json j;
  j["scenario_id"] = c.scenario_id;
  j["grid"] = {{"box_length", c.grid.box_length}, {"n", c.grid.n}};
  const auto& s = c.initial_data.spec;
  j["initial_data"] = {{"kind", c.initial_data.kind}, {"c", s.c},
                       {"amplitude", s.amplitude},    {"x0", s.x0},
                       {"sigma", s.sigma},            {"seed", s.seed},
                       {"target_h1", s.target_h1},    {"band", s.band},
                       {"margin", c.initial_data.margin},
                       {"restarts", c.initial_data.restarts}};
  j["damping"] = {{"kind", std::string(to_string(c.damping.kind))},
                  {"alpha0", c.damping.alpha0},
                  {"r1", c.damping.r1},
                  {"width", c.damping.width}};
  j["solver"] = {{"dt", c.solver.dt},
                 {"t_end", c.solver.t_end},
                 {"record_stride", c.solver.record_stride},
                 {"dealias_on", c.solver.dealias_on},
                 {"nonlinear_on", c.solver.nonlinear_on},
                 {"snapshot_times", c.solver.snapshot_times}};
  Json an = Json::object();
  if (!c.analyses.decay_fit.empty()) {
    Json arr = Json::array();
    for (const auto& w : c.analyses.decay_fit) arr.push_back({{"t_a", w.t_a}, {"t_b", w.t_b}});
    an["decay_fit"] = arr;
  }
  if (const auto& o = c.analyses.observability)
    an["observability"] = {{"r1", o->r1}, {"T", o->T}, {"T0", o->T0}};
  if (const auto& v = c.analyses.vitillaro)
    an["vitillaro"] = {{"mu", v->mu}, {"restarts", v->restarts}};
  if (const auto& p = c.analyses.picard)
    an["picard"] = {{"T", p->T},     {"tol", p->tol},           {"c1", p->c1},
                    {"n_t", p->n_t}, {"max_iter", p->max_iter}};
  j["analyses"] = an;
  return j;
}

inline SweepConfig parse_sweep(const Json& j) {
  SweepConfig s;
  detail::ObjectReader top(j, "sweep");
  if (!top.has("base")) throw ConfigError("sweep: missing 'base'");
  s.base = top.raw("base");
  parse_scenario(s.base);  // validate early
  if (top.has("axes")) {
    const Json& axes = top.raw("axes");
    if (!axes.is_object()) throw ConfigError("sweep.axes: expected an object");
    for (auto it = axes.begin(); it != axes.end(); ++it) {
      if (!it.value().is_array() || it.value().empty())
        throw ConfigError("sweep.axes." + it.key() + ": expected a nonempty array");
      SweepAxis ax{it.key(), {}};
      for (const auto& v : it.value()) ax.values.push_back(v);
      s.axes.push_back(std::move(ax));
    }
  }
  s.parallelism = top.count("parallelism", s.parallelism);
  s.max_runs = top.count("max_runs", s.max_runs);
  top.finish();
  if (s.parallelism < 1) throw ConfigError("sweep.parallelism: must be >= 1");
  return s;
}

}  // namespace dkdv
