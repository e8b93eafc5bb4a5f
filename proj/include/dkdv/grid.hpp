#pragma once

// Periodic grid, fields sampled on it, and the spectral toolkit shared by the
// rest of the library: derivatives, two-thirds dealiasing, and quadrature.
//
// The real line is modeled by the box [-L/2, L/2) with n equispaced nodes.
// Quadrature is the plain sum dx * sum_j, which is exact for band-limited
// periodic integrands.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <numbers>
#include <span>
#include <string>
#include <vector>

#include "dkdv/error.hpp"
#include "dkdv/fft.hpp"

namespace dkdv {

class GridSpec {
 public:
  GridSpec(double box_length, std::size_t n) : box_length_(box_length), n_(n) {
    if (!(box_length > 0.0) || !std::isfinite(box_length))
      throw ConfigError("grid: box_length must be positive and finite");
    if (n < 16 || n % 2 != 0)
      throw ConfigError("grid: n must be even and at least 16 (got " +
                        std::to_string(n) + ")");
    dx_ = box_length_ / static_cast<double>(n_);
    const double k0 = 2.0 * std::numbers::pi / box_length_;
    half_k_.resize(n_ / 2 + 1);
    for (std::size_t m = 0; m <= n_ / 2; ++m)
      half_k_[m] = k0 * static_cast<double>(m);
    const auto half = static_cast<long>(n_ / 2);
    wavenumbers_.reserve(n_);
    for (long m = -half; m < half; ++m)
      wavenumbers_.push_back(k0 * static_cast<double>(m));
  }

  double box_length() const { return box_length_; }
  std::size_t n() const { return n_; }
  double dx() const { return dx_; }
  std::size_t spectrum_size() const { return n_ / 2 + 1; }

  /// Node abscissa x_j = -L/2 + j dx.
  double x(std::size_t j) const {
    return -0.5 * box_length_ + static_cast<double>(j) * dx_;
  }

  std::vector<double> nodes() const {
    std::vector<double> xs(n_);
    for (std::size_t j = 0; j < n_; ++j) xs[j] = x(j);
    return xs;
  }

  /// Signed wavenumbers 2 pi m / L for m = -n/2 .. n/2-1.
  const std::vector<double>& wavenumbers() const { return wavenumbers_; }

  /// Non-negative wavenumbers of the half spectrum, m = 0..n/2.
  std::span<const double> half_wavenumbers() const { return half_k_; }

  std::size_t nyquist_index() const { return n_ / 2; }

  /// Two-thirds rule: modes with 3|m| > n are discarded.
  bool in_dealias_band(std::size_t m) const { return 3 * m <= n_; }

  bool same_as(const GridSpec& other) const {
    return n_ == other.n_ && box_length_ == other.box_length_;
  }

 private:
  double box_length_;
  std::size_t n_;
  double dx_ = 0.0;
  std::vector<double> half_k_;
  std::vector<double> wavenumbers_;
};

using GridPtr = std::shared_ptr<const GridSpec>;

inline GridPtr make_grid(double box_length, std::size_t n) {
  return std::make_shared<const GridSpec>(box_length, n);
}

inline void require_same_grid(const GridSpec& a, const GridSpec& b,
                              const char* where) {
  if (!a.same_as(b)) throw GridMismatch(where);
}

/// One time slice u(., t) sampled on a grid.
struct Field {
  GridPtr grid;
  std::vector<double> samples;
  double time_tag = 0.0;

  Field() = default;
  Field(GridPtr g, double t = 0.0)
      : grid(std::move(g)), samples(grid->n(), 0.0), time_tag(t) {}
  Field(GridPtr g, std::vector<double> s, double t = 0.0)
      : grid(std::move(g)), samples(std::move(s)), time_tag(t) {
    if (samples.size() != grid->n())
      throw ConfigError("field: sample count does not match grid");
  }

  std::size_t size() const { return samples.size(); }
  double& operator[](std::size_t j) { return samples[j]; }
  double operator[](std::size_t j) const { return samples[j]; }

  bool all_finite() const {
    return std::all_of(samples.begin(), samples.end(),
                       [](double v) { return std::isfinite(v); });
  }

  Field& operator+=(const Field& o) {
    require_same_grid(*grid, *o.grid, "field addition");
    for (std::size_t j = 0; j < samples.size(); ++j) samples[j] += o.samples[j];
    return *this;
  }
  Field& operator-=(const Field& o) {
    require_same_grid(*grid, *o.grid, "field subtraction");
    for (std::size_t j = 0; j < samples.size(); ++j) samples[j] -= o.samples[j];
    return *this;
  }
  Field& operator*=(double s) {
    for (auto& v : samples) v *= s;
    return *this;
  }
};

inline Field operator+(Field a, const Field& b) { return a += b; }
inline Field operator-(Field a, const Field& b) { return a -= b; }
inline Field operator*(double s, Field a) { return a *= s; }

inline Field sample(GridPtr grid, auto&& fn, double t = 0.0) {
  Field f(grid, t);
  for (std::size_t j = 0; j < f.size(); ++j) f[j] = fn(grid->x(j));
  return f;
}

// ---------------------------------------------------------------------------
// Spectral views

inline std::vector<Complex> spectrum(const Field& f) {
  std::vector<Complex> s(f.grid->spectrum_size());
  rfft(f.samples, s);
  return s;
}

inline Field from_spectrum(GridPtr grid, std::span<const Complex> s,
                           double t = 0.0) {
  Field f(grid, t);
  irfft(s, f.samples);
  return f;
}

/// Multiplies a half spectrum by (ik)^order in place. Odd orders zero the
/// Nyquist coefficient so the result stays the transform of a real field.
inline void apply_derivative(const GridSpec& g, std::span<Complex> s, int order) {
  if (order < 1 || order > 3)
    throw ConfigError("spectral_derivative: order must be 1, 2 or 3");
  const auto k = g.half_wavenumbers();
  for (std::size_t m = 0; m < s.size(); ++m) {
    const double km = k[m];
    switch (order) {
      case 1: s[m] *= Complex(0.0, km); break;
      case 2: s[m] *= -km * km; break;
      case 3: s[m] *= Complex(0.0, -km * km * km); break;
    }
  }
  if (order % 2 == 1) s[g.nyquist_index()] = 0.0;
}

inline void apply_dealias(const GridSpec& g, std::span<Complex> s) {
  for (std::size_t m = 0; m < s.size(); ++m)
    if (!g.in_dealias_band(m)) s[m] = 0.0;
}

inline Field spectral_derivative(const Field& f, int order) {
  auto s = spectrum(f);
  apply_derivative(*f.grid, s, order);
  return from_spectrum(f.grid, s, f.time_tag);
}

inline Field dealias(const Field& f) {
  auto s = spectrum(f);
  apply_dealias(*f.grid, s);
  return from_spectrum(f.grid, s, f.time_tag);
}

// ---------------------------------------------------------------------------
// Quadrature and norms

inline double integrate(const GridSpec& g, std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return g.dx() * sum;
}

struct Norms {
  double l2_sq = 0.0;
  double h1_sq = 0.0;
  double int_u3 = 0.0;
  double l3_cubed = 0.0;
  double linf = 0.0;
};

/// Norms from samples of u and u_x.
inline Norms norms_from(const GridSpec& g, std::span<const double> u,
                        std::span<const double> ux) {
  Norms r;
  double s2 = 0.0, sx2 = 0.0, s3 = 0.0, sa3 = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    const double v = u[j];
    s2 += v * v;
    sx2 += ux[j] * ux[j];
    s3 += v * v * v;
    sa3 += std::abs(v) * v * v;
    r.linf = std::max(r.linf, std::abs(v));
  }
  r.l2_sq = g.dx() * s2;
  r.h1_sq = r.l2_sq + g.dx() * sx2;
  r.int_u3 = g.dx() * s3;
  r.l3_cubed = g.dx() * sa3;
  return r;
}

inline Norms norms(const Field& f) {
  const Field ux = spectral_derivative(f, 1);
  return norms_from(*f.grid, f.samples, ux.samples);
}

inline double h1_norm(const Field& f) { return std::sqrt(norms(f).h1_sq); }

/// H1 distance between two fields on the same grid.
inline double h1_distance(const Field& a, const Field& b) {
  return h1_norm(a - b);
}

}  // namespace dkdv
