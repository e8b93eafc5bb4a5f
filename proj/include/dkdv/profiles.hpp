#pragma once

// Initial data and damping coefficients a(x).
//
// Damping profiles are nonnegative, bounded with two bounded derivatives, and
// carry the analytic a_x and a_xx alongside the samples. Step-type profiles
// use the quintic smoothstep Q(y) = 6y^5 - 15y^4 + 10y^3 on [0, 1], clamped
// to 0 below and 1 above, which is C^2.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"

namespace dkdv {

// ---------------------------------------------------------------------------
// Initial data

/// 3c sech^2(sqrt(c)(x - x0)/2): the KdV solitary wave of speed c.
inline Field soliton(GridPtr grid, double c, double x0 = 0.0) {
  if (!(c > 0.0)) throw ConfigError("soliton: speed c must be positive");
  const double half_root = 0.5 * std::sqrt(c);
  return sample(grid, [&](double x) {
    const double s = 1.0 / std::cosh(half_root * (x - x0));
    return 3.0 * c * s * s;
  });
}

inline Field gaussian(GridPtr grid, double amplitude, double sigma,
                      double x0 = 0.0) {
  if (!(sigma > 0.0)) throw ConfigError("gaussian: sigma must be positive");
  return sample(grid, [&](double x) {
    const double y = (x - x0) / sigma;
    return amplitude * std::exp(-0.5 * y * y);
  });
}

/// Random real field on modes 1..band with coefficients weighted by
/// 1/(1 + k^2), rescaled to the requested H1 norm.
inline Field random_h1(GridPtr grid, std::uint64_t seed, double target_h1,
                       std::size_t band) {
  if (band < 1 || !grid->in_dealias_band(band))
    throw ConfigError("random_h1: band must lie in 1..n/3");
  if (!(target_h1 > 0.0))
    throw ConfigError("random_h1: target_h1 must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Complex> s(grid->spectrum_size(), 0.0);
  const auto k = grid->half_wavenumbers();
  for (std::size_t m = 1; m <= band; ++m) {
    const double re = normal(rng);
    const double im = normal(rng);
    s[m] = Complex(re, im) / (1.0 + k[m] * k[m]);
  }
  Field f = from_spectrum(grid, s);
  const double h1 = h1_norm(f);
  f *= target_h1 / h1;
  return f;
}

enum class InitialKind { soliton, gaussian, random_h1 };

struct InitialDataSpec {
  InitialKind kind = InitialKind::soliton;
  double c = 1.0;          // soliton speed
  double amplitude = 1.0;  // gaussian amplitude
  double x0 = 0.0;
  double sigma = 1.0;
  std::uint64_t seed = 1;
  double target_h1 = 1.0;
  std::size_t band = 16;
};

inline Field make_initial_data(GridPtr grid, const InitialDataSpec& spec) {
  switch (spec.kind) {
    case InitialKind::soliton: return soliton(grid, spec.c, spec.x0);
    case InitialKind::gaussian:
      return gaussian(grid, spec.amplitude, spec.sigma, spec.x0);
    case InitialKind::random_h1:
      return random_h1(grid, spec.seed, spec.target_h1, spec.band);
  }
  throw ConfigError("unknown initial data kind");
}

// ---------------------------------------------------------------------------
// Damping

namespace smoothstep {

inline double value(double y) {
  if (y <= 0.0) return 0.0;
  if (y >= 1.0) return 1.0;
  return y * y * y * (10.0 + y * (-15.0 + 6.0 * y));
}

inline double first(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  return 30.0 * y * y * (1.0 - y) * (1.0 - y);
}

inline double second(double y) {
  if (y <= 0.0 || y >= 1.0) return 0.0;
  return 60.0 * y * (1.0 - y) * (1.0 - 2.0 * y);
}

inline constexpr double max_first = 15.0 / 8.0;
inline const double max_second = 10.0 / std::sqrt(3.0);

}  // namespace smoothstep

// `none` (a = 0) and `custom` (user samples) sit alongside the four
// parametric kinds.
enum class DampingKind { none, constant, right_step, left_step, sponge, custom };

inline std::string_view to_string(DampingKind k) {
  switch (k) {
    case DampingKind::none: return "none";
    case DampingKind::constant: return "constant";
    case DampingKind::right_step: return "right_step";
    case DampingKind::left_step: return "left_step";
    case DampingKind::sponge: return "sponge";
    case DampingKind::custom: return "custom";
  }
  return "?";
}

struct DampingParams {
  double alpha0 = 0.0;
  double r1 = 0.0;
  double width = 1.0;
};

struct DampingProfile {
  GridPtr grid;
  DampingKind kind = DampingKind::none;
  DampingParams params;
  std::vector<double> a;
  std::vector<double> a_x;
  std::vector<double> a_xx;
  // Second spectral derivative of the samples: the coefficient the solver
  // actually sees, including any jump across the periodic seam.
  std::vector<double> a_xx_grid;
  double w2inf_norm = 0.0;

  bool is_zero() const { return kind == DampingKind::none; }
};

inline DampingProfile zero_damping(GridPtr grid) {
  DampingProfile p;
  p.grid = grid;
  p.kind = DampingKind::none;
  p.a.assign(grid->n(), 0.0);
  p.a_x.assign(grid->n(), 0.0);
  p.a_xx.assign(grid->n(), 0.0);
  p.a_xx_grid.assign(grid->n(), 0.0);
  return p;
}

namespace detail {

inline DampingProfile& with_grid_curvature(DampingProfile& p) {
  Field f(p.grid);
  f.samples = p.a;
  p.a_xx_grid = spectral_derivative(f, 2).samples;
  return p;
}

}  // namespace detail

/// Builds a(x) of the requested kind.
///
/// constant:   a = alpha0.
/// right_step: a = alpha0 Q((x - (r1 - width))/width); equals alpha0 for
///             x >= r1 and 0 for x <= r1 - width. On the periodic box the
///             profile jumps back to 0 across x = +-L/2.
/// left_step:  mirror image, a = alpha0 for x <= -r1.
/// sponge:     left_step + right_step, zero on |x| <= r1 - width and
///             periodic-smooth across the box edge.
inline DampingProfile make_damping(GridPtr grid, DampingKind kind, double alpha0,
                                   double r1 = 0.0, double width = 1.0) {
  if (kind == DampingKind::none) return zero_damping(grid);
  if (kind == DampingKind::custom)
    throw ConfigError("make_damping: use damping_from_samples for custom profiles");
  if (!(alpha0 > 0.0)) throw ConfigError("make_damping: alpha0 must be positive");

  DampingProfile p = zero_damping(grid);
  p.kind = kind;
  p.params = {alpha0, r1, width};

  const double half = 0.5 * grid->box_length();
  if (kind == DampingKind::constant) {
    p.a.assign(grid->n(), alpha0);
    p.w2inf_norm = alpha0;
    return detail::with_grid_curvature(p);
  }

  if (!(width > 0.0)) throw ConfigError("make_damping: width must be positive");
  const double start = r1 - width;
  switch (kind) {
    case DampingKind::right_step:
    case DampingKind::left_step:
      if (!(r1 < half) || !(start > -half))
        throw ConfigError("make_damping: step transition [r1 - width, r1] "
                          "must lie inside the box");
      break;
    case DampingKind::sponge:
      if (!(r1 < half) || start < 0.0)
        throw ConfigError("make_damping: sponge needs 0 <= r1 - width and "
                          "r1 < L/2");
      break;
    default: break;
  }

  const bool right = kind == DampingKind::right_step || kind == DampingKind::sponge;
  const bool left = kind == DampingKind::left_step || kind == DampingKind::sponge;
  for (std::size_t j = 0; j < grid->n(); ++j) {
    const double x = grid->x(j);
    if (right) {
      const double y = (x - start) / width;
      p.a[j] += alpha0 * smoothstep::value(y);
      p.a_x[j] += alpha0 * smoothstep::first(y) / width;
      p.a_xx[j] += alpha0 * smoothstep::second(y) / (width * width);
    }
    if (left) {
      const double y = (-x - start) / width;
      p.a[j] += alpha0 * smoothstep::value(y);
      p.a_x[j] -= alpha0 * smoothstep::first(y) / width;
      p.a_xx[j] += alpha0 * smoothstep::second(y) / (width * width);
    }
  }
  p.w2inf_norm = alpha0 * std::max({1.0, smoothstep::max_first / width,
                                    smoothstep::max_second / (width * width)});
  return detail::with_grid_curvature(p);
}

/// User-supplied nonnegative samples. Derivatives are centered periodic
/// finite differences; no smoothness check is attempted.
inline DampingProfile damping_from_samples(GridPtr grid, std::vector<double> a) {
  if (a.size() != grid->n())
    throw ConfigError("damping_from_samples: sample count does not match grid");
  DampingProfile p = zero_damping(grid);
  p.kind = DampingKind::custom;
  const std::size_t n = grid->n();
  const double h = grid->dx();
  for (std::size_t j = 0; j < n; ++j) {
    if (!(a[j] >= 0.0) || !std::isfinite(a[j]))
      throw ConfigError("damping_from_samples: samples must be finite and >= 0");
  }
  double sup = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double am = a[(j + n - 1) % n], ap = a[(j + 1) % n];
    p.a_x[j] = (ap - am) / (2.0 * h);
    p.a_xx[j] = (ap - 2.0 * a[j] + am) / (h * h);
    sup = std::max({sup, a[j], std::abs(p.a_x[j]), std::abs(p.a_xx[j])});
  }
  p.a = std::move(a);
  p.w2inf_norm = sup;
  return detail::with_grid_curvature(p);
}

}  // namespace dkdv
