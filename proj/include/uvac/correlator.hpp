#pragma once

#include <cmath>
#include <complex>
#include <optional>
#include <span>
#include <vector>

#include "uvac/pulse.hpp"

namespace uvac {

/// Two delayed copies of the pump, a*E(t) and b*E(t - tau). a = 1 by
/// convention; b absorbs mode mismatch and reduced coupling of the delayed arm.
struct InterferencePair {
  PulseModel pulse;
  double a = 1.0;
  double b = 1.0;

  void validate() const;
};

enum class TraceKind { EnvelopeUpper, FringeResolved };

struct CorrelationTrace {
  int order = 1;
  std::vector<double> delays_fs;
  std::vector<double> values;
  TraceKind kind = TraceKind::EnvelopeUpper;
  std::optional<std::vector<double>> errors;  // one sigma per point
  std::optional<double> exposure_s;

  /// Checks order >= 1, matching lengths, strictly increasing delays,
  /// non-negative values and positive errors.
  void validate() const;
};

/// Closed-form envelopes in the reduced delay x = tau / delta_t. Templated so
/// that the fitter can differentiate them with a complex step; branches test
/// the real part only.
namespace envelope {

inline constexpr double kSeriesCutoff = 1e-3;
inline constexpr double kDecayCutoff = 300.0;
inline constexpr double kTaylorCutoff = 1.0;

namespace detail {

/// x cosh x - sinh x = sum_k 2k x^(2k+1) / (2k+1)!, free of cancellation.
template <class T>
T cosh_minus_sinh_series(T x) {
  const T x2 = x * x;
  T term = x;
  T sum = T(0.0);
  for (int k = 1; k <= 12; ++k) {
    term = term * x2 / double((2 * k) * (2 * k + 1));
    sum = sum + double(2 * k) * term;
  }
  return sum;
}

/// sinh y - y = sum_k y^(2k+1) / (2k+1)!
template <class T>
T sinh_minus_arg_series(T y) {
  const T y2 = y * y;
  T term = y;
  T sum = T(0.0);
  for (int k = 1; k <= 14; ++k) {
    term = term * y2 / double((2 * k) * (2 * k + 1));
    sum = sum + term;
  }
  return sum;
}

}  // namespace detail

/// x / sinh x, with its removable singularity at 0.
template <class T>
T x_over_sinh(T x) {
  using std::real;
  using std::sinh;
  const double xr = std::abs(real(x));
  if (xr < kSeriesCutoff) {
    const T x2 = x * x;
    return T(1.0) - x2 / 6.0 + 7.0 * x2 * x2 / 360.0;
  }
  if (xr > kDecayCutoff) return T(0.0);
  return x / sinh(x);
}

/// (x cosh x - sinh x) / sinh^3 x, tends to 1/3 at x = 0.
template <class T>
T cross_ratio(T x) {
  using std::cosh;
  using std::real;
  using std::sinh;
  const double xr = std::abs(real(x));
  if (xr < kSeriesCutoff) {
    const T x2 = x * x;
    return T(1.0 / 3.0) - 2.0 * x2 / 15.0 + 2.0 * x2 * x2 / 63.0;
  }
  if (xr > kDecayCutoff) return T(0.0);
  const T s = sinh(x);
  if (xr < kTaylorCutoff) return detail::cosh_minus_sinh_series(x) / (s * s * s);
  return (x * cosh(x) - s) / (s * s * s);
}

/// (sinh 2x - 2x) / sinh^3 x, tends to 4/3 at x = 0.
template <class T>
T mixed_ratio(T x) {
  using std::real;
  using std::sinh;
  const double xr = std::abs(real(x));
  if (xr < kSeriesCutoff) {
    const T x2 = x * x;
    return T(4.0 / 3.0) - 2.0 * x2 / 5.0 + 17.0 * x2 * x2 / 210.0;
  }
  if (xr > kDecayCutoff) return T(0.0);
  const T s = sinh(x);
  if (xr < kTaylorCutoff) return detail::sinh_minus_arg_series(2.0 * x) / (s * s * s);
  return (sinh(2.0 * x) - 2.0 * x) / (s * s * s);
}

template <class T>
T g1(T x, T a, T b) {
  return T(1.0) + (2.0 * a * b / (a * a + b * b)) * x_over_sinh(x);
}

template <class T>
T g2(T x, T a, T b) {
  const T a2 = a * a;
  const T b2 = b * b;
  const T quartic = a2 * a2 + b2 * b2;
  return T(1.0) + (18.0 * a2 * b2 / quartic) * cross_ratio(x) +
         (3.0 * (a * b2 * b + a2 * a * b) / quartic) * mixed_ratio(x);
}

}  // namespace envelope

/// Upper envelope of the first-order interferometric correlation.
double g1_envelope(const InterferencePair& pair, double tau_fs);
/// Upper envelope of the second-order interferometric correlation.
double g2_envelope(const InterferencePair& pair, double tau_fs);

/// Quadrature control for the defining integral. Steps and half-width are in
/// units of delta_t. The integral is evaluated at step/2 and checked against
/// the result at step.
struct QuadratureOptions {
  double step = 0.25;
  double half_width = 30.0;
  double tolerance = 1e-6;
};

/// Raw integrals in units of delta_t:
///   numerator  = int |(a E(t) + b e^{i phase} E(t - tau))^n|^2 dt
///   single_arm = int |E(t)^n|^2 dt
struct CorrelationIntegrals {
  double numerator = 0.0;
  double single_arm = 0.0;
};

/// Requires a >= 0, b >= 0, not both zero. Throws GridTooCoarse when the
/// halved-step check fails.
CorrelationIntegrals correlation_integrals(const InterferencePair& pair, int order,
                                           double tau_fs, double phase_rad,
                                           const QuadratureOptions& options = {});

/// numerator / ((a^2n + b^2n) * single_arm). Works for any order and for
/// chirped pulses.
double gn_numeric(const InterferencePair& pair, int order, double tau_fs, double phase_rad,
                  const QuadratureOptions& options = {});

/// Fringe-resolved trace with phase = omega0 * tau. threads = 0 picks the
/// hardware concurrency; output is identical for any thread count.
CorrelationTrace fringe_trace(const InterferencePair& pair, int order,
                              std::span<const double> delays_fs, unsigned threads = 1,
                              const QuadratureOptions& options = {});

/// Upper envelope (phase 0): closed forms for orders 1 and 2, quadrature above.
CorrelationTrace envelope_trace(const InterferencePair& pair, int order,
                                std::span<const double> delays_fs);

/// 2ab / (a^2 + b^2).
double visibility(double a, double b);

/// Smaller root b in (0, 1] of 2b / (1 + b^2) = v (a = 1).
double b_from_visibility(double v);

/// FWHM of the closed-form envelope (order 1 or 2, a = 1) above the unit
/// background, with half height at (peak + 1) / 2.
double analytic_envelope_fwhm(int order, double b, double delta_t_fs);

/// Intensity FWHM over the FWHM of the g2 envelope, at the given visibility.
double gamma_factor(double visibility);

/// 0.4048 * delta_tau_g1.
double ft_limited_duration(double delta_tau_g1_fs);

/// Width between the half-height crossings of (peak + 1) / 2.
double envelope_fwhm(const CorrelationTrace& trace);

}  // namespace uvac
