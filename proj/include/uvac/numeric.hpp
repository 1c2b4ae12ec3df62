#pragma once

#include <cmath>
#include <cstddef>
#include <span>

#include "uvac/error.hpp"

namespace uvac::numeric {

struct Crossings {
  double left = 0.0;
  double right = 0.0;
  double width() const { return right - left; }
};

// Half-height crossings of the global maximum of y(x) measured from
// `baseline`: the level is (baseline + peak) / 2. Linear interpolation between
// the bracketing samples. Throws NoPeak when the maximum does not exceed the
// baseline and FlankNotBracketed when a flank never drops below the level.
Crossings half_height_crossings(std::span<const double> x, std::span<const double> y,
                                double baseline);

// Root of f on [lo, hi] by bisection; f(lo) and f(hi) must differ in sign.
template <class F>
double bisect(F&& f, double lo, double hi, double abs_tol, int max_iter = 400) {
  double f_lo = f(lo);
  const double f_hi = f(hi);
  if (f_lo == 0.0) return lo;
  if (f_hi == 0.0) return hi;
  if (std::signbit(f_lo) == std::signbit(f_hi)) {
    throw NonConvergence("bisect: root not bracketed");
  }
  for (int i = 0; i < max_iter && hi - lo > abs_tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (f_mid == 0.0) return mid;
    if (std::signbit(f_mid) == std::signbit(f_lo)) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

std::size_t next_pow2(std::size_t n);

// True when successive spacings agree with their mean to rel_tol.
bool is_uniform_grid(std::span<const double> x, double rel_tol = 1e-6);

}  // namespace uvac::numeric
