#pragma once

#include <complex>
#include <vector>

namespace uvac::detail {

enum class FftDirection { Forward, Inverse };

// Unnormalised in-place DFT. Forward uses exp(-2 pi i jk/N); the inverse is
// scaled by 1/N so that Inverse(Forward(x)) == x.
void fft(std::vector<std::complex<double>>& data, FftDirection direction);

// Baseband frequency of FFT bin k for length n and sample spacing dt.
inline double fft_frequency(std::size_t k, std::size_t n, double dt) {
  const auto ik = static_cast<long long>(k);
  const auto in = static_cast<long long>(n);
  const long long signed_k = (ik < (in + 1) / 2) ? ik : ik - in;
  return static_cast<double>(signed_k) / (static_cast<double>(n) * dt);
}

}  // namespace uvac::detail
