#pragma once

// Energy functionals, identity residuals, decay fits and the observability
// ratio.
//
// Each EnergyRecord carries the instantaneous functionals of u(t) together
// with running trapezoid integrals of the damping terms, so the L2 balance
//
//   int u^2 (t) = int u0^2 - 2 int_0^t int a u^2
//
// and the Hamiltonian balance
//
//   H(t) - int_0^t int a u^3 - int_0^t int a_xx u^2 + 2 int_0^t int a u_x^2 = H(0),
//   H = int (u_x^2 - u^3/3),
//
// can be checked record by record. a_xx here is the spectral second
// derivative of the sampled coefficient, which is what the scheme evolves.

#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

struct EnergyRecord {
  double t = 0.0;
  double l2_sq = 0.0;
  double e0 = 0.0;        // l2_sq / 2
  double h1_sq = 0.0;
  double int_u3 = 0.0;
  double l3_cubed = 0.0;
  double e_sec3 = 0.0;    // h1_sq - int_u3/3
  double k_sec3 = 0.0;    // 2 h1_sq - int_u3
  double e1 = 0.0;        // h1_sq/2 - int_u3/3
  double j_val = 0.0;     // h1_sq/2 - l3_cubed/3
  double hamiltonian = 0.0;  // int u_x^2 - u^3/3

  // Instantaneous damping integrals.
  double a_u2 = 0.0;
  double a_u3 = 0.0;
  double axx_u2 = 0.0;
  double a_ux2 = 0.0;

  // Running time integrals of the above (trapezoid).
  double diss_cum = 0.0;  // int_0^t int a u^2, no factor 2
  double cum_a_u3 = 0.0;
  double cum_axx_u2 = 0.0;
  double cum_a_ux2 = 0.0;
  double hamiltonian_lhs = 0.0;

  // int_{x <= r_obs} u^2 and its running time integral, NaN when no
  // observation abscissa was configured.
  double l2_observed = std::numeric_limits<double>::quiet_NaN();
  double observed_cum = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline EnergyRecord make_record(const GridSpec& g, double t,
                                std::span<const double> u,
                                std::span<const double> ux,
                                const DampingProfile& a,
                                const EnergyRecord* prev,
                                std::optional<double> observe_r1) {
  EnergyRecord r;
  r.t = t;
  const Norms nm = norms_from(g, u, ux);
  r.l2_sq = nm.l2_sq;
  r.e0 = 0.5 * nm.l2_sq;
  r.h1_sq = nm.h1_sq;
  r.int_u3 = nm.int_u3;
  r.l3_cubed = nm.l3_cubed;
  r.e_sec3 = nm.h1_sq - nm.int_u3 / 3.0;
  r.k_sec3 = 2.0 * nm.h1_sq - nm.int_u3;
  r.e1 = 0.5 * nm.h1_sq - nm.int_u3 / 3.0;
  r.j_val = 0.5 * nm.h1_sq - nm.l3_cubed / 3.0;
  r.hamiltonian = (nm.h1_sq - nm.l2_sq) - nm.int_u3 / 3.0;

  if (!a.is_zero()) {
    double s_au2 = 0.0, s_au3 = 0.0, s_axx = 0.0, s_aux = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
      const double v2 = u[j] * u[j];
      s_au2 += a.a[j] * v2;
      s_au3 += a.a[j] * v2 * u[j];
      s_axx += a.a_xx_grid[j] * v2;
      s_aux += a.a[j] * ux[j] * ux[j];
    }
    r.a_u2 = g.dx() * s_au2;
    r.a_u3 = g.dx() * s_au3;
    r.axx_u2 = g.dx() * s_axx;
    r.a_ux2 = g.dx() * s_aux;
  }

  if (observe_r1) {
    double s = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j)
      if (g.x(j) <= *observe_r1) s += u[j] * u[j];
    r.l2_observed = g.dx() * s;
    r.observed_cum = 0.0;
  }

  if (prev) {
    const double h = 0.5 * (t - prev->t);
    r.diss_cum = prev->diss_cum + h * (prev->a_u2 + r.a_u2);
    r.cum_a_u3 = prev->cum_a_u3 + h * (prev->a_u3 + r.a_u3);
    r.cum_axx_u2 = prev->cum_axx_u2 + h * (prev->axx_u2 + r.axx_u2);
    r.cum_a_ux2 = prev->cum_a_ux2 + h * (prev->a_ux2 + r.a_ux2);
    if (observe_r1)
      r.observed_cum = prev->observed_cum + h * (prev->l2_observed + r.l2_observed);
  }
  r.hamiltonian_lhs =
      r.hamiltonian - r.cum_a_u3 - r.cum_axx_u2 + 2.0 * r.cum_a_ux2;
  return r;
}

}  // namespace detail

/// Computes every functional of `f`; the running integrals extend `prev`
/// (or start at zero when there is none).
inline EnergyRecord record(const Field& f, const DampingProfile& a,
                           const EnergyRecord* prev = nullptr,
                           std::optional<double> observe_r1 = std::nullopt) {
  require_same_grid(*f.grid, *a.grid, "record: field vs damping");
  const Field ux = spectral_derivative(f, 1);
  return detail::make_record(*f.grid, f.time_tag, f.samples, ux.samples, a, prev,
                             observe_r1);
}

// ---------------------------------------------------------------------------
// Identity residuals

/// |l2_sq(t) - l2_sq(0) + 2 diss_cum(t)| / l2_sq(0), maximized over records.
inline double dissipation_residual(std::span<const EnergyRecord> records) {
  if (records.empty()) throw PreconditionError("dissipation_residual: empty series");
  const double base = records.front().l2_sq;
  if (base == 0.0) return 0.0;
  double worst = 0.0;
  for (const auto& r : records)
    worst = std::max(worst, std::abs(r.l2_sq - base + 2.0 * r.diss_cum) / base);
  return worst;
}

inline double dissipation_residual_at(const EnergyRecord& first,
                                      const EnergyRecord& r) {
  if (first.l2_sq == 0.0) return 0.0;
  return std::abs(r.l2_sq - first.l2_sq + 2.0 * r.diss_cum) / first.l2_sq;
}

inline double hamiltonian_residual_at(const EnergyRecord& first,
                                      const EnergyRecord& r) {
  const double scale = std::max(1.0, std::abs(first.hamiltonian));
  return std::abs(r.hamiltonian_lhs - first.hamiltonian_lhs) / scale;
}

/// Residual of the damped Hamiltonian identity, normalized by
/// max(1, |H(0)|), maximized over records.
inline double hamiltonian_residual(std::span<const EnergyRecord> records) {
  if (records.empty()) throw PreconditionError("hamiltonian_residual: empty series");
  double worst = 0.0;
  for (const auto& r : records)
    worst = std::max(worst, hamiltonian_residual_at(records.front(), r));
  return worst;
}

// ---------------------------------------------------------------------------
// Decay fitting

struct DecayFit {
  double omega = 0.0;
  double c_pref = 0.0;
  double t_a = 0.0;
  double t_b = 0.0;
  double rms_residual = 0.0;
  std::size_t n_points = 0;
};

/// Least-squares fit of log e0(t) = log c - omega t over records with
/// t in [t_a, t_b].
inline DecayFit fit_decay(std::span<const EnergyRecord> records, double t_a,
                          double t_b) {
  if (!(t_a < t_b)) throw ConfigError("fit_decay: window needs t_a < t_b");
  double st = 0.0, sy = 0.0, stt = 0.0, sty = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (r.t < t_a || r.t > t_b) continue;
    if (!(r.e0 > 0.0))
      throw PreconditionError("fit_decay: nonpositive e0 inside the window");
    const double y = std::log(r.e0);
    st += r.t;
    sy += y;
    stt += r.t * r.t;
    sty += r.t * y;
    ++count;
  }
  if (count < 2) throw PreconditionError("fit_decay: fewer than two records in window");
  const double n = static_cast<double>(count);
  const double mt = st / n, my = sy / n;
  const double var_t = stt / n - mt * mt;
  if (!(var_t > 0.0)) throw PreconditionError("fit_decay: degenerate time window");
  const double slope = (sty / n - mt * my) / var_t;
  const double intercept = my - slope * mt;

  double ss = 0.0;
  for (const auto& r : records) {
    if (r.t < t_a || r.t > t_b) continue;
    const double d = std::log(r.e0) - (intercept + slope * r.t);
    ss += d * d;
  }
  DecayFit fit;
  fit.omega = -slope;
  fit.c_pref = std::exp(intercept);
  fit.t_a = t_a;
  fit.t_b = t_b;
  fit.rms_residual = std::sqrt(ss / n);
  fit.n_points = count;
  return fit;
}

// ---------------------------------------------------------------------------
// Observability

struct ObservabilityReport {
  double ratio = 0.0;        // empirical c5
  double numerator = 0.0;    // int_0^T int_{x <= r1} u^2
  double denominator = 0.0;  // int_0^T int a u^2
  double T = 0.0;
};

/// Ratio of undamped-side energy to dissipated energy over [0, T]. The
/// records must carry observed-region data (see SolverConfig::observe_r1);
/// values at T are interpolated linearly between bracketing records.
inline ObservabilityReport observability_ratio(std::span<const EnergyRecord> records,
                                               const DampingProfile& a, double T,
                                               double T0 = 1.0) {
  if (a.kind != DampingKind::right_step)
    throw PreconditionError("observability_ratio: needs right_step damping");
  if (records.empty()) throw PreconditionError("observability_ratio: empty series");
  if (!(T > T0))
    throw PreconditionError("observability_ratio: horizon must exceed T0");
  if (std::isnan(records.front().l2_observed))
    throw PreconditionError("observability_ratio: series has no observed-region data");
  if (T > records.back().t + 1e-12)
    throw PreconditionError("observability_ratio: series shorter than T");

  std::size_t hi = 0;
  while (hi + 1 < records.size() && records[hi].t < T) ++hi;
  double num = records[hi].observed_cum;
  double den = records[hi].diss_cum;
  if (hi > 0 && records[hi].t > T) {
    const auto& p = records[hi - 1];
    const auto& q = records[hi];
    const double w = (T - p.t) / (q.t - p.t);
    num = p.observed_cum + w * (q.observed_cum - p.observed_cum);
    den = p.diss_cum + w * (q.diss_cum - p.diss_cum);
  }
  if (!(den > 0.0))
    throw PreconditionError("observability_ratio: zero dissipation (u vanishes on the damped region)");
  return {num / den, num, den, T};
}

}  // namespace dkdv
