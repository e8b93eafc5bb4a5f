#pragma once

// Reference computations used by the tests. They avoid the library's spectral
// machinery: plain DFT sums, adaptive quadrature and closed forms.

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "dkdv/grid.hpp"

namespace oracle {

using cplx = std::complex<double>;

/// Direct O(n^2) DFT, c_m = sum_j u_j e^{-2 pi i m j / n} for m = 0..n-1.
inline std::vector<cplx> dft(const std::vector<double>& u) {
  const std::size_t n = u.size();
  std::vector<cplx> c(n);
  for (std::size_t m = 0; m < n; ++m) {
    cplx s = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double th = -2.0 * std::numbers::pi * double((m * j) % n) / double(n);
      s += u[j] * cplx(std::cos(th), std::sin(th));
    }
    c[m] = s;
  }
  return c;
}

/// Spectral derivative of periodic samples on [-L/2, L/2) by direct DFT,
/// Nyquist dropped for odd orders.
inline std::vector<double> dft_derivative(const std::vector<double>& u, double L, int order) {
  const std::size_t n = u.size();
  auto c = dft(u);
  std::vector<double> out(n, 0.0);
  for (std::size_t m = 0; m < n; ++m) {
    long sm = m < n / 2 ? long(m) : long(m) - long(n);
    if (m == n / 2 && order % 2 == 1) continue;
    if (m == n / 2) sm = long(n / 2);
    const double k = 2.0 * std::numbers::pi * double(sm) / L;
    const cplx f = std::pow(cplx(0.0, k), order);
    for (std::size_t j = 0; j < n; ++j) {
      const double th = 2.0 * std::numbers::pi * double((m * j) % n) / double(n);
      out[j] += (f * c[m] * cplx(std::cos(th), std::sin(th))).real() / double(n);
    }
  }
  return out;
}

template <class F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, 1e-14);
}

inline double sech(double x) { return 1.0 / std::cosh(x); }

/// Band-limited random samples with modes 1..band.
inline dkdv::Field random_band_field(dkdv::GridPtr g, unsigned seed, std::size_t band) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> nd;
  std::vector<double> amp(band + 1), ph(band + 1);
  for (std::size_t m = 1; m <= band; ++m) {
    amp[m] = nd(rng) / double(m);
    ph[m] = 2.0 * std::numbers::pi * std::uniform_real_distribution<double>()(rng);
  }
  return dkdv::sample(g, [&](double x) {
    double v = 0.0;
    for (std::size_t m = 1; m <= band; ++m)
      v += amp[m] * std::cos(2.0 * std::numbers::pi * double(m) * x / g->box_length() + ph[m]);
    return v;
  });
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double e = 0.0;
  for (std::size_t j = 0; j < a.size(); ++j) e = std::max(e, std::abs(a[j] - b[j]));
  return e;
}

}  // namespace oracle
