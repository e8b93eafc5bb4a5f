#pragma once

// Linear KdV group S(t): the solution operator of v_t + v_xxx = 0.
//
// In Fourier space S(t) multiplies mode k by exp(i k^3 t), so that
// S(t) cos(kx) = cos(kx + k^3 t). The Nyquist mode is left untouched, which
// matches the zeroed Nyquist coefficient of odd spectral derivatives: the
// group stays unitary, satisfies S(s)S(t) = S(s+t), and commutes with
// spectral_derivative.

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

inline void apply_airy(const GridSpec& g, std::span<Complex> s, double t) {
  const auto k = g.half_wavenumbers();
  for (std::size_t m = 0; m < g.nyquist_index(); ++m) {
    const double phase = k[m] * k[m] * k[m] * t;
    s[m] *= Complex(std::cos(phase), std::sin(phase));
  }
}

/// Multipliers exp(i k^3 t) for repeated use at a fixed t.
inline std::vector<Complex> airy_multiplier(const GridSpec& g, double t) {
  std::vector<Complex> e(g.spectrum_size(), Complex(1.0, 0.0));
  apply_airy(g, e, t);
  return e;
}

inline Field airy_propagate(const Field& f, double t) {
  auto s = spectrum(f);
  apply_airy(*f.grid, s, t);
  return from_spectrum(f.grid, s, f.time_tag + t);
}

// ---------------------------------------------------------------------------
// Empirical check of the linear smoothing/maximal estimates on the box.

struct LinearEstimateReport {
  double t_horizon = 0.0;
  // Per-estimate maxima over the battery:
  //   strichartz: (int_{-T}^{T} ||S(t)v||_inf^6 dt)^{1/6} / ||v||_L2
  //   maximal:    (1/(1+T)) (int_x sup_t |S(t)v(x)|^2 dx)^{1/2} / ||v||_H1
  //   smoothing:  (sup_x int_{-T}^{T} |d_x S(t)v(x)|^2 dt)^{1/2} / ||v||_L2
  double strichartz_ratio = 0.0;
  double maximal_ratio = 0.0;
  double smoothing_ratio = 0.0;
  double c1_empirical = 0.0;
  std::size_t battery_size = 0;
  std::size_t n_time_samples = 0;
};

namespace detail {

// Trapezoid weights on a uniform grid of `count` points over [lo, hi].
inline std::vector<double> trapezoid_weights(double lo, double hi,
                                             std::size_t count) {
  std::vector<double> w(count, 0.0);
  if (count < 2) return w;
  const double h = (hi - lo) / static_cast<double>(count - 1);
  std::fill(w.begin(), w.end(), h);
  w.front() = w.back() = 0.5 * h;
  return w;
}

}  // namespace detail

/// Evaluates the three linear estimates for each battery member on a uniform
/// time grid over [-T, T] and records ratios to the right-hand norms.
inline LinearEstimateReport verify_linear_estimates(std::span<const Field> battery,
                                                    double T,
                                                    std::size_t n_time_samples) {
  if (battery.empty()) throw ConfigError("verify_linear_estimates: empty battery");
  if (n_time_samples < 64)
    throw ConfigError("verify_linear_estimates: need at least 64 time samples");
  if (!(T > 0.0)) throw ConfigError("verify_linear_estimates: T must be positive");

  LinearEstimateReport rep;
  rep.t_horizon = T;
  rep.battery_size = battery.size();
  rep.n_time_samples = n_time_samples;
  const auto w = detail::trapezoid_weights(-T, T, n_time_samples);
  const double dt = 2.0 * T / static_cast<double>(n_time_samples - 1);

  for (const Field& v0 : battery) {
    const GridSpec& g = *v0.grid;
    const Norms nv = norms(v0);
    if (!(nv.l2_sq > 0.0))
      throw ConfigError("verify_linear_estimates: zero-norm battery member");

    const auto s0 = spectrum(v0);
    std::vector<Complex> s(s0.size()), sx(s0.size());
    std::vector<double> u(g.n()), ux(g.n());
    std::vector<double> sup_sq(g.n(), 0.0);      // sup_t |S(t)v|^2 per node
    std::vector<double> time_l2_dx(g.n(), 0.0);  // int_t |d_x S(t)v|^2 per node
    double strichartz_pow6 = 0.0;

    for (std::size_t i = 0; i < n_time_samples; ++i) {
      const double t = -T + static_cast<double>(i) * dt;
      std::copy(s0.begin(), s0.end(), s.begin());
      apply_airy(g, s, t);
      std::copy(s.begin(), s.end(), sx.begin());
      apply_derivative(g, sx, 1);
      irfft(s, u);
      irfft(sx, ux);
      double linf = 0.0;
      for (std::size_t j = 0; j < g.n(); ++j) {
        linf = std::max(linf, std::abs(u[j]));
        sup_sq[j] = std::max(sup_sq[j], u[j] * u[j]);
        time_l2_dx[j] += w[i] * ux[j] * ux[j];
      }
      strichartz_pow6 += w[i] * std::pow(linf, 6);
    }

    const double l2 = std::sqrt(nv.l2_sq);
    const double h1 = std::sqrt(nv.h1_sq);
    const double strichartz = std::pow(strichartz_pow6, 1.0 / 6.0) / l2;
    const double maximal =
        std::sqrt(integrate(g, sup_sq)) / (1.0 + T) / h1;
    const double smoothing =
        std::sqrt(*std::max_element(time_l2_dx.begin(), time_l2_dx.end())) / l2;

    rep.strichartz_ratio = std::max(rep.strichartz_ratio, strichartz);
    rep.maximal_ratio = std::max(rep.maximal_ratio, maximal);
    rep.smoothing_ratio = std::max(rep.smoothing_ratio, smoothing);
  }
  rep.c1_empirical =
      std::max({rep.strichartz_ratio, rep.maximal_ratio, rep.smoothing_ratio});
  return rep;
}

inline LinearEstimateReport verify_linear_estimates(
    GridPtr grid, double T, std::span<const InitialDataSpec> battery,
    std::size_t n_time_samples) {
  std::vector<Field> fields;
  fields.reserve(battery.size());
  for (const auto& spec : battery) fields.push_back(make_initial_data(grid, spec));
  return verify_linear_estimates(fields, T, n_time_samples);
}

}  // namespace dkdv
