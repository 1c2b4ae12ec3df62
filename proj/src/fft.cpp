#include "fft.hpp"

#include <fftw3.h>

#include <mutex>

namespace uvac::detail {

namespace {
// FFTW's planner is not thread-safe; execution is.
std::mutex planner_mutex;
}  // namespace

void fft(std::vector<std::complex<double>>& data, FftDirection direction) {
  if (data.empty()) return;
  auto* buffer = reinterpret_cast<fftw_complex*>(data.data());
  const int n = static_cast<int>(data.size());
  const int sign = direction == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD;

  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex);
    plan = fftw_plan_dft_1d(n, buffer, buffer, sign, FFTW_ESTIMATE);
  }
  fftw_execute(plan);
  {
    std::lock_guard lock(planner_mutex);
    fftw_destroy_plan(plan);
  }

  if (direction == FftDirection::Inverse) {
    const double scale = 1.0 / static_cast<double>(n);
    for (auto& v : data) v *= scale;
  }
}

}  // namespace uvac::detail
