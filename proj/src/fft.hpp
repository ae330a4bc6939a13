#pragma once

// Thin RAII layer over FFTW for cubic 3-D transforms. Plans are created with
// FFTW_ESTIMATE so that the chosen algorithm (and hence the rounding) is
// identical across runs.

#include <fftw3.h>

#include <complex>
#include <span>

namespace gph::detail {

class Fft3 {
 public:
  explicit Fft3(int points);
  ~Fft3();
  Fft3(const Fft3&) = delete;
  Fft3& operator=(const Fft3&) = delete;

  int points() const noexcept { return points_; }
  /// In place: a_k <- sum_j a_j e^{-2 pi i j k / n}.
  void forward(std::span<std::complex<double>> data) const;
  /// In place: a_j <- sum_k a_k e^{+2 pi i j k / n}.
  void backward(std::span<std::complex<double>> data) const;

 private:
  int points_;
  fftw_plan forward_{};
  fftw_plan backward_{};
};

/// Cached plan for a given grid size. Plans live for the whole process.
const Fft3& fft3(int points);

/// Non-negative residue of n modulo m.
inline int wrap(int n, int m) noexcept {
  const int r = n % m;
  return r < 0 ? r + m : r;
}

}  // namespace gph::detail
