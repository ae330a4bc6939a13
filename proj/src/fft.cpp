#include "fft.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <vector>

#include "gph/errors.hpp"

namespace gph::detail {

namespace {
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

Fft3::Fft3(int points) : points_(points) {
  if (points < 1) throw ConfigError("FFT grid must have at least one point");
  const std::size_t n = static_cast<std::size_t>(points) * points * points;
  std::vector<std::complex<double>> scratch(n);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft_3d(points, points, points, buf, buf, FFTW_FORWARD,
                              FFTW_ESTIMATE | FFTW_UNALIGNED);
  backward_ = fftw_plan_dft_3d(points, points, points, buf, buf, FFTW_BACKWARD,
                               FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (forward_ == nullptr || backward_ == nullptr) throw Error("FFTW planning failed");
}

Fft3::~Fft3() {
  std::lock_guard lock(planner_mutex());
  fftw_destroy_plan(forward_);
  fftw_destroy_plan(backward_);
}

void Fft3::forward(std::span<std::complex<double>> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(forward_, p, p);
}

void Fft3::backward(std::span<std::complex<double>> data) const {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(backward_, p, p);
}

const Fft3& fft3(int points) {
  static std::mutex cache_mutex;
  static std::map<int, std::unique_ptr<Fft3>> cache;
  std::lock_guard lock(cache_mutex);
  auto& slot = cache[points];
  if (!slot) slot = std::make_unique<Fft3>(points);
  return *slot;
}

}  // namespace gph::detail
