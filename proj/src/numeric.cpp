#include "uvac/numeric.hpp"

#include <algorithm>

namespace uvac::numeric {

Crossings half_height_crossings(std::span<const double> x, std::span<const double> y,
                                double baseline) {
  if (x.size() != y.size() || x.size() < 3) {
    throw ValidationError("half_height_crossings: need >= 3 paired samples");
  }
  const auto peak_it = std::max_element(y.begin(), y.end());
  const std::size_t peak = static_cast<std::size_t>(peak_it - y.begin());
  if (!(*peak_it > baseline)) {
    throw NoPeak("no peak above the background level");
  }
  const double level = 0.5 * (baseline + *peak_it);

  auto interpolate = [&](std::size_t below, std::size_t above) {
    const double t = (level - y[below]) / (y[above] - y[below]);
    return x[below] + t * (x[above] - x[below]);
  };

  Crossings c;
  std::size_t i = peak;
  while (i > 0 && y[i - 1] >= level) --i;
  if (i == 0) throw FlankNotBracketed("left flank does not fall to half height within the scan");
  c.left = interpolate(i - 1, i);

  std::size_t j = peak;
  while (j + 1 < y.size() && y[j + 1] >= level) ++j;
  if (j + 1 == y.size()) {
    throw FlankNotBracketed("right flank does not fall to half height within the scan");
  }
  c.right = interpolate(j + 1, j);
  return c;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

bool is_uniform_grid(std::span<const double> x, double rel_tol) {
  if (x.size() < 2) return false;
  const double mean = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
  if (!(mean > 0.0)) return false;
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (std::abs((x[k] - x[k - 1]) - mean) > rel_tol * mean) return false;
  }
  return true;
}

}  // namespace uvac::numeric
