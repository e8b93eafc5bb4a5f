#pragma once

// Integrating-factor RK4 for u_t + u u_x + u_xxx + a(x) u = 0.
//
// With w = S(-t) u the dispersive term drops out exactly and the remaining
// system w_t = S(-t) N(S(t) w), N(u) = -(u^2/2)_x - a u, is advanced with the
// classical fourth-order Runge-Kutta scheme. The quadratic term is written in
// conservative form and dealiased by the two-thirds rule; a u is formed
// pointwise.

#include <algorithm>
#include <cmath>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dkdv/airy.hpp"
#include "dkdv/energy.hpp"
#include "dkdv/error.hpp"
#include "dkdv/grid.hpp"
#include "dkdv/profiles.hpp"

namespace dkdv {

struct RhsOptions {
  bool dealias_on = true;
  bool nonlinear_on = true;
};

struct SolverConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::size_t record_stride = 1;
  bool dealias_on = true;
  bool nonlinear_on = true;
  std::vector<double> snapshot_times;
  // Abscissa for the observed-region integral int_{x <= r} u^2 kept in each
  // record; required by observability_ratio.
  std::optional<double> observe_r1;

  RhsOptions rhs() const { return {dealias_on, nonlinear_on}; }

  void validate() const {
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("solver: dt must be positive");
    if (!(t_end >= 0.0) || !std::isfinite(t_end))
      throw ConfigError("solver: t_end must be >= 0");
    if (record_stride < 1) throw ConfigError("solver: record_stride must be >= 1");
  }
};

struct TimeSeries {
  std::vector<EnergyRecord> records;
  std::vector<Field> snapshots;
  SolverConfig config;
  DampingKind damping_kind = DampingKind::none;
  DampingParams damping_params;
  double box_length = 0.0;
  std::size_t n = 0;
  std::optional<InitialDataSpec> initial_data;
};

/// Non-finite values appeared. Carries the last finite time and everything
/// recorded up to it.
class BlowUpError : public std::runtime_error {
 public:
  BlowUpError(double last_good_time, std::shared_ptr<const TimeSeries> partial)
      : std::runtime_error("blow-up: non-finite values after t = " +
                           std::to_string(last_good_time)),
        last_good_time_(last_good_time),
        partial_(std::move(partial)) {}

  double last_good_time() const { return last_good_time_; }
  const TimeSeries* partial() const { return partial_.get(); }

 private:
  double last_good_time_;
  std::shared_ptr<const TimeSeries> partial_;
};

namespace detail {

/// Evaluates N(u) = -dealias((u^2/2)_x) - a u on half spectra with private
/// scratch space.
class NonstiffRhs {
 public:
  NonstiffRhs(const GridSpec& g, const DampingProfile& a, RhsOptions opt)
      : g_(g), a_(a), opt_(opt), u_(g.n()), w_(g.n()), tmp_(g.spectrum_size()) {}

  void operator()(std::span<const Complex> uh, std::span<Complex> out) {
    irfft(uh, u_);
    std::fill(out.begin(), out.end(), Complex(0.0));
    if (opt_.nonlinear_on) {
      for (std::size_t j = 0; j < u_.size(); ++j) w_[j] = u_[j] * u_[j];
      rfft(w_, out);
      const auto k = g_.half_wavenumbers();
      for (std::size_t m = 0; m < out.size(); ++m) {
        if (opt_.dealias_on && !g_.in_dealias_band(m))
          out[m] = 0.0;
        else
          out[m] *= Complex(0.0, -0.5 * k[m]);
      }
      out[g_.nyquist_index()] = 0.0;
    }
    if (!a_.is_zero()) {
      for (std::size_t j = 0; j < u_.size(); ++j) w_[j] = a_.a[j] * u_[j];
      rfft(w_, tmp_);
      for (std::size_t m = 0; m < out.size(); ++m) out[m] -= tmp_[m];
    }
  }

 private:
  const GridSpec& g_;
  const DampingProfile& a_;
  RhsOptions opt_;
  std::vector<double> u_, w_;
  std::vector<Complex> tmp_;
};

/// One IF-RK4 step of fixed size on a half spectrum.
class IfRk4Stepper {
 public:
  IfRk4Stepper(const GridSpec& g, const DampingProfile& a, double dt, RhsOptions opt)
      : dt_(dt),
        rhs_(g, a, opt),
        full_(airy_multiplier(g, dt)),
        half_(airy_multiplier(g, 0.5 * dt)),
        k1_(g.spectrum_size()),
        k2_(g.spectrum_size()),
        k3_(g.spectrum_size()),
        k4_(g.spectrum_size()),
        stage_(g.spectrum_size()) {}

  void advance(std::span<Complex> uh) {
    const double h = dt_;
    const std::size_t m_end = uh.size();
    rhs_(uh, k1_);
    for (std::size_t m = 0; m < m_end; ++m)
      stage_[m] = half_[m] * (uh[m] + 0.5 * h * k1_[m]);
    rhs_(stage_, k2_);
    for (std::size_t m = 0; m < m_end; ++m)
      stage_[m] = half_[m] * uh[m] + 0.5 * h * k2_[m];
    rhs_(stage_, k3_);
    for (std::size_t m = 0; m < m_end; ++m)
      stage_[m] = full_[m] * uh[m] + h * half_[m] * k3_[m];
    rhs_(stage_, k4_);
    for (std::size_t m = 0; m < m_end; ++m)
      uh[m] = full_[m] * uh[m] +
              (h / 6.0) * (full_[m] * k1_[m] + 2.0 * half_[m] * (k2_[m] + k3_[m]) + k4_[m]);
  }

  double dt() const { return dt_; }

 private:
  double dt_;
  NonstiffRhs rhs_;
  std::vector<Complex> full_, half_;
  std::vector<Complex> k1_, k2_, k3_, k4_, stage_;
};

inline bool all_finite(std::span<const Complex> s) {
  return std::all_of(s.begin(), s.end(), [](const Complex& c) {
    return std::isfinite(c.real()) && std::isfinite(c.imag());
  });
}

}  // namespace detail

/// -dealias((u^2/2)_x) - a u as a field.
inline Field rhs_nonstiff(const Field& f, const DampingProfile& a,
                          RhsOptions opt = {}) {
  require_same_grid(*f.grid, *a.grid, "rhs_nonstiff: field vs damping");
  detail::NonstiffRhs rhs(*f.grid, a, opt);
  const auto s = spectrum(f);
  std::vector<Complex> out(s.size());
  rhs(s, out);
  return from_spectrum(f.grid, out, f.time_tag);
}

/// Single IF-RK4 step of size dt.
inline Field step(const Field& f, const DampingProfile& a, double dt,
                  RhsOptions opt = {}) {
  require_same_grid(*f.grid, *a.grid, "step: field vs damping");
  detail::IfRk4Stepper stepper(*f.grid, a, dt, opt);
  auto s = spectrum(f);
  stepper.advance(s);
  if (!detail::all_finite(s))
    throw BlowUpError(f.time_tag, std::make_shared<TimeSeries>());
  return from_spectrum(f.grid, s, f.time_tag + dt);
}

/// Advective step bound dt = safety * dx / max(max|u0|, 1); dispersion is
/// integrated exactly and imposes no restriction.
inline double cfl_suggest(const Field& u0, double safety = 0.5) {
  double umax = 1.0;
  for (double v : u0.samples) umax = std::max(umax, std::abs(v));
  return safety * u0.grid->dx() / umax;
}

/// Marches u0 to cfg.t_end. Records are taken at t = 0, every
/// record_stride steps, and at t_end; the running damping integrals are
/// accumulated at every step regardless of stride. When t_end is not a
/// multiple of dt the last step is shortened to land on t_end. Snapshots are
/// taken at the first step time >= each requested time.
inline TimeSeries simulate(const Field& u0, const DampingProfile& a,
                           const SolverConfig& cfg) {
  cfg.validate();
  require_same_grid(*u0.grid, *a.grid, "simulate: field vs damping");
  if (!u0.all_finite()) throw ConfigError("simulate: initial data not finite");
  const GridSpec& g = *u0.grid;

  auto series = std::make_shared<TimeSeries>();
  series->config = cfg;
  series->damping_kind = a.kind;
  series->damping_params = a.params;
  series->box_length = g.box_length();
  series->n = g.n();

  std::vector<double> snap_times = cfg.snapshot_times;
  std::sort(snap_times.begin(), snap_times.end());
  std::size_t next_snap = 0;

  auto uh = spectrum(u0);
  std::vector<Complex> uxh(uh.size());
  std::vector<double> u(g.n()), ux(g.n());

  auto measure = [&](double t, const EnergyRecord* prev) {
    std::copy(uh.begin(), uh.end(), uxh.begin());
    apply_derivative(g, uxh, 1);
    irfft(uh, u);
    irfft(uxh, ux);
    return detail::make_record(g, t, u, ux, a, prev, cfg.observe_r1);
  };
  auto take_snapshots = [&](double t) {
    while (next_snap < snap_times.size() && snap_times[next_snap] <= t + 1e-12) {
      series->snapshots.emplace_back(u0.grid, u, t);
      ++next_snap;
    }
  };

  EnergyRecord current = measure(0.0, nullptr);
  series->records.push_back(current);
  take_snapshots(0.0);

  const double ratio = cfg.t_end / cfg.dt;
  std::size_t full_steps = static_cast<std::size_t>(std::floor(ratio + 1e-9));
  double tail = cfg.t_end - static_cast<double>(full_steps) * cfg.dt;
  if (tail <= 1e-9 * cfg.dt) tail = 0.0;
  const std::size_t total = full_steps + (tail > 0.0 ? 1 : 0);

  detail::IfRk4Stepper stepper(g, a, cfg.dt, cfg.rhs());
  std::optional<detail::IfRk4Stepper> tail_stepper;
  if (tail > 0.0) tail_stepper.emplace(g, a, tail, cfg.rhs());

  for (std::size_t i = 1; i <= total; ++i) {
    const bool last = i == total;
    const double t = last ? cfg.t_end : static_cast<double>(i) * cfg.dt;
    if (i > full_steps)
      tail_stepper->advance(uh);
    else
      stepper.advance(uh);
    if (!detail::all_finite(uh)) {
      std::shared_ptr<const TimeSeries> partial = series;
      throw BlowUpError(current.t, partial);
    }
    current = measure(t, &current);
    if (i % cfg.record_stride == 0 || last) series->records.push_back(current);
    take_snapshots(t);
  }
  return std::move(*series);
}

inline ObservabilityReport observability_ratio(const TimeSeries& series,
                                               const DampingProfile& a, double r1,
                                               double T, double T0 = 1.0) {
  if (!series.config.observe_r1 || *series.config.observe_r1 != r1)
    throw PreconditionError("observability_ratio: series was not recorded with "
                            "observation abscissa r1");
  return observability_ratio(series.records, a, T, T0);
}

}  // namespace dkdv
