#pragma once

// Mild solutions: space-time norms, the Duhamel integral, the Picard map
//
//   Psi(u)(t) = S(t) u0 - int_0^t S(t - tau) (a u(tau) + (u(tau)^2/2)_x) dtau,
//
// its fixed-point iteration, and the contraction window T_kappa.
//
// Trajectories are sampled uniformly on [0, T]. All time integrals use the
// trapezoid rule on those samples.

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/math/tools/roots.hpp>
#include <boost/math/tools/toms748_solve.hpp>

#include "dkdv/airy.hpp"
#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/integrator.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

struct Trajectory {
  GridPtr grid;
  std::vector<double> times;
  std::vector<Field> slices;

  std::size_t size() const { return times.size(); }
  double horizon() const { return times.empty() ? 0.0 : times.back(); }

  /// n_t copies of `f` at uniform times on [0, T].
  static Trajectory constant(const Field& f, double T, std::size_t n_t) {
    if (n_t < 2) throw ConfigError("trajectory: need at least two time samples");
    Trajectory tr;
    tr.grid = f.grid;
    tr.times.resize(n_t);
    for (std::size_t i = 0; i < n_t; ++i) {
      tr.times[i] = T * static_cast<double>(i) / static_cast<double>(n_t - 1);
      Field s = f;
      s.time_tag = tr.times[i];
      tr.slices.push_back(std::move(s));
    }
    return tr;
  }

  void validate() const {
    if (times.empty() || slices.size() != times.size())
      throw ConfigError("trajectory: empty or inconsistent");
    if (times.front() != 0.0) throw ConfigError("trajectory: must start at t = 0");
    for (const auto& s : slices) require_same_grid(*grid, *s.grid, "trajectory slice");
    if (times.size() > 1) {
      const double h = times[1] - times[0];
      for (std::size_t i = 1; i < times.size(); ++i)
        if (std::abs((times[i] - times[i - 1]) - h) > 1e-9 * std::max(1.0, h))
          throw ConfigError("trajectory: times must be uniform");
    }
  }

  Trajectory& operator*=(double s) {
    for (auto& f : slices) f *= s;
    return *this;
  }
};

inline Trajectory operator+(Trajectory a, const Trajectory& b) {
  if (a.times != b.times) throw GridMismatch("trajectory times differ");
  for (std::size_t i = 0; i < a.slices.size(); ++i) a.slices[i] += b.slices[i];
  return a;
}

inline Trajectory operator-(Trajectory a, const Trajectory& b) {
  if (a.times != b.times) throw GridMismatch("trajectory times differ");
  for (std::size_t i = 0; i < a.slices.size(); ++i) a.slices[i] -= b.slices[i];
  return a;
}

/// max over time samples of the H1 distance between two trajectories.
inline double sup_h1_distance(const Trajectory& a, const Trajectory& b) {
  if (a.times.size() != b.times.size()) throw GridMismatch("trajectory lengths differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.slices.size(); ++i)
    d = std::max(d, h1_distance(a.slices[i], b.slices[i]));
  return d;
}

// ---------------------------------------------------------------------------
// Space-time norms

struct KpvNorms {
  double gamma1 = 0.0;  // sup_t ||u||_H1
  double gamma2 = 0.0;  // (int ||u_xx||_inf^2 dt)^{1/2}
  double gamma3 = 0.0;  // (int ||u_x||_inf^6 dt)^{1/6}
  double gamma4 = 0.0;  // (1/(1+T)) (int_x sup_t |u|^2 dx)^{1/2}
  double big_gamma = 0.0;
  double T = 0.0;
};

/// Discrete space-time norms over the window [0, T] covered by `traj`.
inline KpvNorms kpv_norms(const Trajectory& traj) {
  if (traj.times.empty()) throw PreconditionError("kpv_norms: empty trajectory");
  traj.validate();
  const GridSpec& g = *traj.grid;
  const double T = traj.horizon();
  const auto w = detail::trapezoid_weights(0.0, T, traj.size());

  KpvNorms out;
  out.T = T;
  std::vector<double> sup_sq(g.n(), 0.0);
  std::vector<Complex> s(g.spectrum_size()), d(g.spectrum_size());
  std::vector<double> ux(g.n()), uxx(g.n());
  double int2 = 0.0, int6 = 0.0;

  for (std::size_t i = 0; i < traj.size(); ++i) {
    const Field& f = traj.slices[i];
    rfft(f.samples, s);
    std::copy(s.begin(), s.end(), d.begin());
    apply_derivative(g, d, 1);
    irfft(d, ux);
    std::copy(s.begin(), s.end(), d.begin());
    apply_derivative(g, d, 2);
    irfft(d, uxx);

    const Norms nm = norms_from(g, f.samples, ux);
    out.gamma1 = std::max(out.gamma1, std::sqrt(nm.h1_sq));
    double ux_inf = 0.0, uxx_inf = 0.0;
    for (std::size_t j = 0; j < g.n(); ++j) {
      ux_inf = std::max(ux_inf, std::abs(ux[j]));
      uxx_inf = std::max(uxx_inf, std::abs(uxx[j]));
      sup_sq[j] = std::max(sup_sq[j], f.samples[j] * f.samples[j]);
    }
    int2 += w[i] * uxx_inf * uxx_inf;
    int6 += w[i] * std::pow(ux_inf, 6);
  }
  out.gamma2 = std::sqrt(int2);
  out.gamma3 = std::pow(int6, 1.0 / 6.0);
  out.gamma4 = std::sqrt(integrate(g, sup_sq)) / (1.0 + T);
  out.big_gamma = std::max({out.gamma1, out.gamma2, out.gamma3, out.gamma4});
  return out;
}

// ---------------------------------------------------------------------------
// Duhamel integral

namespace detail {

// phi(t_i) = S(t_i) * trapezoid_{tau_j <= t_i} S(-tau_j) g_j, computed as a
// running sum of the untwisted integrand. This is the same quadrature as
// applying the trapezoid rule to S(t_i - tau) g(tau) directly.
inline std::vector<std::vector<Complex>> duhamel_spectral(
    const GridSpec& g, std::span<const double> times,
    const std::vector<std::vector<Complex>>& g_hat) {
  const std::size_t nt = times.size();
  std::vector<std::vector<Complex>> out(nt, std::vector<Complex>(g.spectrum_size(), 0.0));
  std::vector<Complex> acc(g.spectrum_size(), 0.0);
  std::vector<Complex> prev = g_hat[0];
  apply_airy(g, prev, -times[0]);
  for (std::size_t i = 1; i < nt; ++i) {
    std::vector<Complex> cur = g_hat[i];
    apply_airy(g, cur, -times[i]);
    const double h = 0.5 * (times[i] - times[i - 1]);
    for (std::size_t m = 0; m < acc.size(); ++m) acc[m] += h * (prev[m] + cur[m]);
    out[i] = acc;
    apply_airy(g, out[i], times[i]);
    prev = std::move(cur);
  }
  return out;
}

}  // namespace detail

inline Trajectory duhamel(const Trajectory& g_traj) {
  g_traj.validate();
  const GridSpec& g = *g_traj.grid;
  std::vector<std::vector<Complex>> gh;
  gh.reserve(g_traj.size());
  for (const auto& f : g_traj.slices) gh.push_back(spectrum(f));
  const auto phi = detail::duhamel_spectral(g, g_traj.times, gh);
  Trajectory out;
  out.grid = g_traj.grid;
  out.times = g_traj.times;
  for (std::size_t i = 0; i < phi.size(); ++i)
    out.slices.push_back(from_spectrum(g_traj.grid, phi[i], g_traj.times[i]));
  return out;
}

// ---------------------------------------------------------------------------
// Picard map and solver

/// Psi(u)(t) = S(t) u0 + int_0^t S(t - tau) N(u(tau)) dtau with
/// N(u) = -dealias((u^2/2)_x) - a u, the same right-hand side the integrator
/// uses.
inline Trajectory picard_map(const Trajectory& u, const Field& u0,
                             const DampingProfile& a, RhsOptions opt = {}) {
  u.validate();
  require_same_grid(*u.grid, *u0.grid, "picard_map: trajectory vs u0");
  require_same_grid(*u.grid, *a.grid, "picard_map: trajectory vs damping");
  const GridSpec& g = *u.grid;

  detail::NonstiffRhs rhs(g, a, opt);
  std::vector<std::vector<Complex>> nh(u.size(), std::vector<Complex>(g.spectrum_size()));
  for (std::size_t i = 0; i < u.size(); ++i) rhs(spectrum(u.slices[i]), nh[i]);
  auto phi = detail::duhamel_spectral(g, u.times, nh);

  const auto s0 = spectrum(u0);
  Trajectory out;
  out.grid = u.grid;
  out.times = u.times;
  for (std::size_t i = 0; i < u.size(); ++i) {
    std::vector<Complex> free = s0;
    apply_airy(g, free, u.times[i]);
    for (std::size_t m = 0; m < free.size(); ++m) free[m] += phi[i][m];
    out.slices.push_back(from_spectrum(u.grid, free, u.times[i]));
  }
  return out;
}

struct PicardResult {
  Trajectory solution;
  std::vector<double> distances;  // sup_t H1 distance between successive iterates
  std::size_t iterations = 0;
};

class PicardNonConvergence : public std::runtime_error {
 public:
  explicit PicardNonConvergence(std::vector<double> log)
      : std::runtime_error("picard_solve: no convergence within max_iter"),
        log_(std::move(log)) {}
  const std::vector<double>& log() const { return log_; }

 private:
  std::vector<double> log_;
};

/// Iterates Psi from u(t) = u0 until successive iterates differ by less than
/// `tol` in sup_t H1.
inline PicardResult picard_solve(const Field& u0, const DampingProfile& a, double T,
                                 double tol, std::size_t max_iter, std::size_t n_t = 64,
                                 RhsOptions opt = {}) {
  if (!(T > 0.0)) throw ConfigError("picard_solve: T must be positive");
  if (!(tol > 0.0)) throw ConfigError("picard_solve: tol must be positive");
  if (max_iter < 1) throw ConfigError("picard_solve: max_iter must be >= 1");
  PicardResult res;
  res.solution = Trajectory::constant(u0, T, n_t);
  for (std::size_t k = 1; k <= max_iter; ++k) {
    Trajectory next = picard_map(res.solution, u0, a, opt);
    const double dist = sup_h1_distance(next, res.solution);
    res.distances.push_back(dist);
    res.solution = std::move(next);
    res.iterations = k;
    if (!std::isfinite(dist)) break;
    if (dist < tol) return res;
  }
  throw PicardNonConvergence(res.distances);
}

// ---------------------------------------------------------------------------
// Contraction window

struct ContractionReport {
  double c1 = 2.0;
  double kappa = 0.0;  // 2 c1 ||u0||_H1
  double c2 = 0.0;     // 4 (1 + sqrt 2) c1
  double t_kappa = 0.0;
  double lhs_at_t = 0.0;
};

/// 4 sqrt2 c1 ||a||_{W2,inf} T + 2 c1 c2 T^{1/2} (1 + T) ||u0||_H1.
inline double contraction_lhs(double T, double u0_h1, double a_w2inf, double c1) {
  const double c2 = 4.0 * (1.0 + std::numbers::sqrt2) * c1;
  return 4.0 * std::numbers::sqrt2 * c1 * a_w2inf * T +
         2.0 * c1 * c2 * std::sqrt(T) * (1.0 + T) * u0_h1;
}

/// Largest T in (0, 1) whose contraction expression stays at or below
/// 1 - 1e-6. When both norms vanish the window is all of (0, 1) and the
/// largest double below 1 is returned.
inline ContractionReport t_kappa(double u0_h1, double a_w2inf, double c1 = 2.0) {
  if (!(c1 > 1.0)) throw ConfigError("t_kappa: c1 must exceed 1");
  if (!(u0_h1 >= 0.0) || !(a_w2inf >= 0.0))
    throw ConfigError("t_kappa: norms must be nonnegative");
  ContractionReport rep;
  rep.c1 = c1;
  rep.kappa = 2.0 * c1 * u0_h1;
  rep.c2 = 4.0 * (1.0 + std::numbers::sqrt2) * c1;

  constexpr double target = 1.0 - 1e-6;
  const double below_one = std::nextafter(1.0, 0.0);
  auto f = [&](double T) { return contraction_lhs(T, u0_h1, a_w2inf, c1) - target; };
  if (f(below_one) <= 0.0) {
    rep.t_kappa = below_one;
  } else {
    std::uintmax_t iters = 200;
    const auto [lo, hi] = boost::math::tools::toms748_solve(
        f, 0.0, below_one, f(0.0), f(below_one),
        boost::math::tools::eps_tolerance<double>(52), iters);
    (void)hi;
    rep.t_kappa = lo;
  }
  rep.lhs_at_t = contraction_lhs(rep.t_kappa, u0_h1, a_w2inf, c1);
  return rep;
}

}  // namespace dkdv
