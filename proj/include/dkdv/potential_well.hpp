#pragma once

// Potential-well analysis for the fully damped equation u_t + u u_x + u_xxx + mu u = 0.
//
//   k0  = sup_{v != 0} (1/3)||v||_L3^3 / ||v||_H1^3
//   f(xi) = xi^2/2 - k0 xi^3,  xi1 = 1/(3 k0),  d = f(xi1) = xi1^2/6
//   E(t) = ||u||_H1^2 - (1/3) int u^3,  K(t) = 2||u||_H1^2 - int u^3
//
// If ||u0||_H1 > xi1 and E(0) < d, and E is non-increasing, then
// ||u(t)||_H1 >= xi2 > xi1 where f(xi2) = E(0).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/tools/minima.hpp>
#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>
#include <fmt/format.h>

#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/integrator.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

/// (1/3)||u||_L3^3 / ||u||_H1^3; invariant under u -> lambda u.
inline double sobolev_ratio(const Field& u) {
  const Norms nm = norms(u);
  if (!(nm.h1_sq > 0.0)) return 0.0;
  return nm.l3_cubed / 3.0 / std::pow(nm.h1_sq, 1.5);
}

/// Ratio of the dilated profile sech^2(x/s) centered in the box.
inline double sech2_family_ratio(GridPtr grid, double s) {
  return sobolev_ratio(sample(grid, [s](double x) {
    const double c = 1.0 / std::cosh(x / s);
    return c * c;
  }));
}

struct AscentResult {
  Field field;
  double value = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

namespace detail {

inline void normalize_h1(Field& u) {
  const double h = h1_norm(u);
  if (h > 0.0) u *= 1.0 / h;
}

/// Projected gradient ascent of log R on the dealiased band, using the H1
/// gradient and a backtracking step. Stops when one accepted step improves R
/// by less than tol (relative).
inline AscentResult ascend_ratio(Field u, double tol, std::size_t max_iter) {
  const GridSpec& g = *u.grid;
  u = dealias(u);
  normalize_h1(u);
  double value = sobolev_ratio(u);
  double eta = 0.5;
  const auto k = g.half_wavenumbers();
  std::vector<double> w(g.n());
  std::vector<Complex> wh(g.spectrum_size()), uh(g.spectrum_size());

  AscentResult res;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    res.iterations = it;
    const Norms nm = norms(u);
    for (std::size_t j = 0; j < g.n(); ++j) w[j] = std::abs(u[j]) * u[j];
    rfft(w, wh);
    rfft(u.samples, uh);
    // H1 gradient of log R: 3 (1 - d_xx)^{-1}(|u|u) / ||u||_3^3 - 3 u / ||u||_H1^2
    for (std::size_t m = 0; m < wh.size(); ++m) {
      if (!g.in_dealias_band(m)) {
        wh[m] = 0.0;
        continue;
      }
      wh[m] = 3.0 * wh[m] / (1.0 + k[m] * k[m]) / nm.l3_cubed - 3.0 * uh[m] / nm.h1_sq;
    }
    const Field grad = from_spectrum(u.grid, wh);

    bool accepted = false;
    double gain = 0.0;
    for (int tries = 0; tries < 60; ++tries) {
      Field trial = u + eta * grad;
      normalize_h1(trial);
      const double tv = sobolev_ratio(trial);
      if (tv > value) {
        gain = (tv - value) / value;
        u = std::move(trial);
        value = tv;
        accepted = true;
        eta = std::min(eta * 2.0, 1e3);
        break;
      }
      eta *= 0.5;
    }
    if (!accepted || gain < tol) {
      res.converged = true;
      break;
    }
  }
  if (u.samples.size() && norms(u).int_u3 < 0.0) u *= -1.0;
  res.field = std::move(u);
  res.value = value;
  return res;
}

}  // namespace detail

struct PotentialWellConstants {
  double k0 = 0.0;
  double xi1 = 0.0;
  double d = 0.0;
  double family_k0 = 0.0;     // best ratio over the sech^2(x/s) family
  double family_width = 0.0;  // its width s
  double edge_tail = 0.0;     // max |u*| at the box edges relative to max |u*|
  Field maximizer;            // positive, normalized to unit H1 norm
  std::vector<std::string> method_log;

  /// Lower bound for the Sobolev embedding constant, B1 >= (3 k0)^{1/3}.
  double sobolev_constant_lower_bound() const { return std::cbrt(3.0 * k0); }
};

inline PotentialWellConstants constants_from_k0(double k0) {
  if (!(k0 > 0.0)) throw ConfigError("potential well: k0 must be positive");
  PotentialWellConstants c;
  c.k0 = k0;
  c.xi1 = 1.0 / (3.0 * k0);
  c.d = c.xi1 * c.xi1 / 6.0;
  return c;
}

struct K0Options {
  double tol = 1e-12;
  std::size_t max_iter = 4000;
  std::size_t random_band = 24;
  std::uint64_t seed_offset = 0;  // restart r uses seed seed_offset + r
};

/// Two-stage estimate of k0: a scan plus Brent refinement over the width of
/// sech^2(x/s), then projected gradient ascent started from the best family
/// member and from `restarts` random fields (seeds seed_offset + 1..restarts, run
/// concurrently, ties resolved toward the lowest seed).
inline PotentialWellConstants estimate_k0(GridPtr grid, std::size_t restarts,
                                          K0Options opt = {}) {
  if (grid->n() < 256 || grid->box_length() < 40.0)
    throw ConfigError("estimate_k0: grid must have n >= 256 and box_length >= 40");

  std::vector<std::string> log;
  // Stage (i): scan widths, then refine by Brent's method on the best bracket.
  const double s_min = 4.0 * grid->dx(), s_max = grid->box_length() / 8.0;
  const int scan_points = 48;
  std::vector<double> widths, values;
  for (int i = 0; i < scan_points; ++i) {
    const double s = s_min * std::pow(s_max / s_min, double(i) / (scan_points - 1));
    widths.push_back(s);
    values.push_back(sech2_family_ratio(grid, s));
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(values.begin(), values.end()) - values.begin());
  const double lo = widths[best == 0 ? 0 : best - 1];
  const double hi = widths[std::min<std::size_t>(best + 1, widths.size() - 1)];
  const auto [s_star, neg_r] = boost::math::tools::brent_find_minima(
      [&](double s) { return -sech2_family_ratio(grid, s); }, lo, hi, 40);
  double family = -neg_r;
  double family_s = s_star;
  if (values[best] > family) {
    family = values[best];
    family_s = widths[best];
  }
  log.push_back(fmt::format("stage1: sech2 family best width s = {:.12g}, ratio = {:.15g}",
                            family_s, family));

  // Stage (ii): ascent from the family optimum and from random restarts.
  Field start = sample(grid, [family_s](double x) {
    const double c = 1.0 / std::cosh(x / family_s);
    return c * c;
  });
  std::vector<std::future<AscentResult>> jobs;
  jobs.push_back(std::async(std::launch::async, [&, start] {
    return detail::ascend_ratio(start, opt.tol, opt.max_iter);
  }));
  const std::size_t band = std::min<std::size_t>(opt.random_band, grid->n() / 3);
  for (std::size_t r = 1; r <= restarts; ++r) {
    jobs.push_back(std::async(std::launch::async, [&, r] {
      return detail::ascend_ratio(random_h1(grid, opt.seed_offset + r, 1.0, band), opt.tol, opt.max_iter);
    }));
  }
  std::vector<AscentResult> results;
  for (auto& j : jobs) results.push_back(j.get());

  std::size_t best_run = 0;
  for (std::size_t i = 0; i < results.size(); ++i) {
    log.push_back(fmt::format("stage2 start {} ({}): ratio = {:.15g}, iterations = {}, converged = {}",
                              i, i == 0 ? "family" : "seed " + std::to_string(opt.seed_offset + i),
                              results[i].value, results[i].iterations,
                              results[i].converged));
    if (results[i].value > results[best_run].value) best_run = i;
  }
  if (!results[0].converged)
    log.push_back("stage2: ascent from the family optimum hit max_iter");

  PotentialWellConstants c;
  double k0 = std::max(family, results[best_run].value);
  if (family >= results[best_run].value) {
    c.maximizer = start;
    detail::normalize_h1(c.maximizer);
  } else {
    c.maximizer = results[best_run].field;
  }
  const auto base = constants_from_k0(k0);
  c.k0 = base.k0;
  c.xi1 = base.xi1;
  c.d = base.d;
  c.family_k0 = family;
  c.family_width = family_s;

  double peak = 0.0;
  for (double v : c.maximizer.samples) peak = std::max(peak, std::abs(v));
  const double edge = std::max(std::abs(c.maximizer.samples.front()),
                               std::abs(c.maximizer.samples.back()));
  c.edge_tail = peak > 0.0 ? edge / peak : 0.0;
  log.push_back(fmt::format("maximizer edge tail relative to peak = {:.3e}{}", c.edge_tail,
                            c.edge_tail < 1e-10 ? "" : " (box may be too small)"));
  log.push_back(fmt::format("k0 = {:.15g}", c.k0));
  c.method_log = std::move(log);
  return c;
}

// ---------------------------------------------------------------------------
// The well function and its level sets

inline double f_eval(double xi, double k0) {
  if (!(xi >= 0.0)) throw ConfigError("f_eval: xi must be >= 0");
  return 0.5 * xi * xi - k0 * xi * xi * xi;
}

struct Xi2Roots {
  double upper = 0.0;  // xi2 in [xi1, inf)
  double lower = 0.0;  // xi2' in [0, xi1]
};

/// Roots of f(xi) = e_initial on either side of xi1, for 0 <= e_initial <= d.
inline Xi2Roots solve_xi2(double e_initial, double k0) {
  const auto c = constants_from_k0(k0);
  if (!(e_initial >= 0.0)) throw ConfigError("solve_xi2: e_initial must be >= 0");
  if (e_initial > c.d)
    throw ConfigError("solve_xi2: e_initial exceeds d, no root above xi1");
  if (e_initial == c.d) return {c.xi1, c.xi1};

  auto g = [&](double xi) { return f_eval(xi, k0) - e_initial; };
  auto solve = [&](double a, double b) {
    const double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    std::uintmax_t iters = 200;
    const auto [x0, x1] = boost::math::tools::toms748_solve(
        g, a, b, fa, fb, boost::math::tools::eps_tolerance<double>(52), iters);
    return 0.5 * (x0 + x1);
  };
  Xi2Roots r;
  if (e_initial == 0.0) {
    r.upper = 1.0 / (2.0 * k0);
    r.lower = 0.0;
    return r;
  }
  r.upper = solve(c.xi1, 1.0 / (2.0 * k0));
  r.lower = solve(0.0, c.xi1);
  return r;
}

class SupercriticalSearchError : public std::runtime_error {
 public:
  SupercriticalSearchError(const std::string& what, double min_energy)
      : std::runtime_error(what), min_energy_(min_energy) {}
  double min_energy() const { return min_energy_; }

 private:
  double min_energy_;
};

/// Scales the stored maximizer along the ray lambda u*/||u*||_H1 to the
/// smallest lambda > xi1 with E(0) < d (1 - margin).
inline Field construct_supercritical(const PotentialWellConstants& consts,
                                     double margin) {
  if (!(margin >= 0.0 && margin < 1.0))
    throw ConfigError("construct_supercritical: margin must lie in [0, 1)");
  if (!consts.maximizer.grid)
    throw ConfigError("construct_supercritical: constants carry no maximizer");
  Field unit = consts.maximizer;
  detail::normalize_h1(unit);
  const Norms nm = norms(unit);
  const double q = nm.int_u3 / 3.0;
  const double target = consts.d * (1.0 - margin);
  if (!(q > 0.0))
    throw SupercriticalSearchError(
        "construct_supercritical: maximizer has int u^3 <= 0; E(lambda) only grows",
        consts.xi1 * consts.xi1);

  auto energy = [&](double lam) { return lam * lam - q * lam * lam * lam; };
  // E rises to its peak at 2/(3q) >= 2 xi1 and then falls through zero at 1/q.
  const double peak = 2.0 / (3.0 * q);
  const double zero = 1.0 / q;
  std::uintmax_t iters = 200;
  auto g = [&](double lam) { return energy(lam) - target; };
  const auto [a, b] = boost::math::tools::toms748_solve(
      g, peak, zero, g(peak), g(zero), boost::math::tools::eps_tolerance<double>(52), iters);
  (void)a;
  double lam = b;
  while (energy(lam) >= target) lam = std::nextafter(lam, 2.0 * lam);

  Field u0 = lam * unit;
  const Norms check = norms(u0);
  const double e0 = check.h1_sq - check.int_u3 / 3.0;
  if (!(std::sqrt(check.h1_sq) > consts.xi1) || !(e0 < target)) {
    lam *= 1.0 + 1e-9;
    u0 = lam * unit;
    const Norms again = norms(u0);
    const double e1 = again.h1_sq - again.int_u3 / 3.0;
    if (!(std::sqrt(again.h1_sq) > consts.xi1) || !(e1 < target))
      throw SupercriticalSearchError("construct_supercritical: re-evaluated field misses "
                                     "the preconditions",
                                     std::min(e0, e1));
  }
  return u0;
}

// ---------------------------------------------------------------------------
// Non-decay experiment

enum class Verdict { not_applicable, pass, fail };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::not_applicable: return "not_applicable";
    case Verdict::pass: return "pass";
    case Verdict::fail: return "fail";
  }
  return "?";
}

struct VitillaroReport {
  double mu = 0.0;
  double h1_initial = 0.0;
  double e_initial = 0.0;
  double xi1 = 0.0;
  double d = 0.0;
  bool h1_above_xi1 = false;
  bool energy_below_d = false;
  bool preconditions_met = false;

  double xi2 = std::numeric_limits<double>::quiet_NaN();
  double l3_floor = std::numeric_limits<double>::quiet_NaN();
  double min_h1_over_run = std::numeric_limits<double>::quiet_NaN();
  double min_l3_over_run = std::numeric_limits<double>::quiet_NaN();
  bool h1_bound_holds = false;
  bool l3_bound_holds = false;

  // K(t) >= 0 is the hypothesis under which E is non-increasing.
  bool k_nonneg_throughout = true;
  double first_k_negative_time = std::numeric_limits<double>::quiet_NaN();
  bool energy_monotone_while_k_nonneg = true;

  Verdict verdict = Verdict::not_applicable;
  double slack = 0.02;
  TimeSeries series;
};

class VitillaroBlowUp : public std::runtime_error {
 public:
  VitillaroBlowUp(const std::string& what, VitillaroReport partial)
      : std::runtime_error(what), partial_(std::move(partial)) {}
  const VitillaroReport& partial() const { return partial_; }

 private:
  VitillaroReport partial_;
};

namespace detail {

inline void evaluate_vitillaro(VitillaroReport& rep, const PotentialWellConstants& c) {
  const auto& recs = rep.series.records;
  double min_h1 = std::numeric_limits<double>::infinity();
  double min_l3 = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    min_h1 = std::min(min_h1, std::sqrt(r.h1_sq));
    min_l3 = std::min(min_l3, std::cbrt(r.l3_cubed));
    if (r.k_sec3 < 0.0 && rep.k_nonneg_throughout) {
      rep.k_nonneg_throughout = false;
      rep.first_k_negative_time = r.t;
    }
    if (i > 0 && recs[i - 1].k_sec3 >= 0.0) {
      const double rise = r.e_sec3 - recs[i - 1].e_sec3;
      if (rise > 1e-8 * std::max(1.0, std::abs(recs[i - 1].e_sec3)))
        rep.energy_monotone_while_k_nonneg = false;
    }
  }
  rep.min_h1_over_run = min_h1;
  rep.min_l3_over_run = min_l3;
  rep.l3_floor = std::cbrt(c.k0) * rep.xi2;
  rep.h1_bound_holds = min_h1 >= (1.0 - rep.slack) * rep.xi2;
  rep.l3_bound_holds = min_l3 >= (1.0 - rep.slack) * rep.l3_floor;
  rep.verdict = rep.h1_bound_holds && rep.l3_bound_holds &&
                        rep.energy_monotone_while_k_nonneg
                    ? Verdict::pass
                    : Verdict::fail;
}

}  // namespace detail

/// Runs the constant-damping equation from u0 and checks the lower bounds
/// ||u(t)||_H1 >= xi2 and ||u(t)||_L3 >= k0^{1/3} xi2 with 2% slack. Times
/// where K(t) < 0 are reported, not treated as failures. When the hypotheses
/// on u0 fail no simulation is run and the verdict is not_applicable.
inline VitillaroReport vitillaro_experiment(const Field& u0, double mu,
                                            const SolverConfig& cfg,
                                            const PotentialWellConstants& consts) {
  if (!(mu >= 0.0)) throw ConfigError("vitillaro_experiment: mu must be >= 0");
  VitillaroReport rep;
  rep.mu = mu;
  const Norms nm = norms(u0);
  rep.h1_initial = std::sqrt(nm.h1_sq);
  rep.e_initial = nm.h1_sq - nm.int_u3 / 3.0;
  rep.xi1 = consts.xi1;
  rep.d = consts.d;
  rep.h1_above_xi1 = rep.h1_initial > consts.xi1;
  rep.energy_below_d = rep.e_initial < consts.d;
  rep.preconditions_met = rep.h1_above_xi1 && rep.energy_below_d && rep.e_initial >= 0.0;
  if (!rep.preconditions_met) return rep;

  rep.xi2 = solve_xi2(rep.e_initial, consts.k0).upper;
  const DampingProfile a = mu > 0.0
                               ? make_damping(u0.grid, DampingKind::constant, mu)
                               : zero_damping(u0.grid);
  try {
    rep.series = simulate(u0, a, cfg);
  } catch (const BlowUpError& e) {
    if (e.partial()) rep.series = *e.partial();
    detail::evaluate_vitillaro(rep, consts);
    rep.verdict = Verdict::fail;
    throw VitillaroBlowUp(e.what(), std::move(rep));
  }
  detail::evaluate_vitillaro(rep, consts);
  return rep;
}

}  // namespace dkdv
