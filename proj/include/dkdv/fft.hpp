#pragma once

// Thin FFTW wrapper for real periodic data.
//
// Plans are cached per (thread, size). FFTW's planner is not thread-safe, so
// plan creation and destruction go through a process-wide mutex; execution on
// a thread-private plan and buffer pair is safe. Data is always copied into
// the plan's own aligned buffers, so the same plan (and therefore the same
// arithmetic) is used no matter where the caller's memory lives.

#include <fftw3.h>

#include <algorithm>
#include <complex>
#include <cstddef>
#include <memory>
#include <mutex>
#include <span>
#include <unordered_map>

namespace dkdv {

using Complex = std::complex<double>;

namespace detail {

inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

class RealFft {
 public:
  explicit RealFft(std::size_t n) : n_(n) {
    std::lock_guard lock(fftw_planner_mutex());
    real_ = fftw_alloc_real(n_);
    spec_ = fftw_alloc_complex(n_ / 2 + 1);
    const int ni = static_cast<int>(n_);
    forward_ = fftw_plan_dft_r2c_1d(ni, real_, spec_, FFTW_ESTIMATE);
    inverse_ = fftw_plan_dft_c2r_1d(ni, spec_, real_, FFTW_ESTIMATE);
  }

  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  ~RealFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(inverse_);
    fftw_free(real_);
    fftw_free(spec_);
  }

  /// Unnormalized forward transform: out[m] = sum_j in[j] exp(-2 pi i j m / n),
  /// m = 0..n/2.
  void forward(std::span<const double> in, std::span<Complex> out) {
    std::copy(in.begin(), in.end(), real_);
    fftw_execute(forward_);
    const auto* s = reinterpret_cast<const Complex*>(spec_);
    std::copy(s, s + n_ / 2 + 1, out.begin());
  }

  /// Inverse transform including the 1/n normalization.
  void inverse(std::span<const Complex> in, std::span<double> out) {
    auto* s = reinterpret_cast<Complex*>(spec_);
    std::copy(in.begin(), in.end(), s);
    fftw_execute(inverse_);
    const double scale = 1.0 / static_cast<double>(n_);
    for (std::size_t j = 0; j < n_; ++j) out[j] = real_[j] * scale;
  }

 private:
  std::size_t n_;
  double* real_ = nullptr;
  fftw_complex* spec_ = nullptr;
  fftw_plan forward_ = nullptr;
  fftw_plan inverse_ = nullptr;
};

inline RealFft& fft_for(std::size_t n) {
  thread_local std::unordered_map<std::size_t, std::unique_ptr<RealFft>> cache;
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<RealFft>(n);
  return *slot;
}

}  // namespace detail

/// Half spectrum (n/2 + 1 coefficients) of a real sequence.
inline void rfft(std::span<const double> in, std::span<Complex> out) {
  detail::fft_for(in.size()).forward(in, out);
}

/// Real sequence of length `out.size()` from its half spectrum.
inline void irfft(std::span<const Complex> in, std::span<double> out) {
  detail::fft_for(out.size()).inverse(in, out);
}

}  // namespace dkdv
