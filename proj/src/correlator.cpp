#include "uvac/correlator.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "uvac/constants.hpp"
#include "uvac/error.hpp"
#include "uvac/numeric.hpp"

namespace uvac {

void InterferencePair::validate() const {
  pulse.validate();
  if (!(a > 0.0)) throw ValidationError("interference pair: a must be positive");
  if (!(b >= 0.0)) throw ValidationError("interference pair: b must be non-negative");
}

void CorrelationTrace::validate() const {
  if (order < 1) throw ValidationError("trace: order must be >= 1");
  if (delays_fs.size() != values.size()) {
    throw ValidationError("trace: delays and values differ in length");
  }
  for (std::size_t k = 1; k < delays_fs.size(); ++k) {
    if (!(delays_fs[k] > delays_fs[k - 1])) {
      throw ValidationError("trace: delays must be strictly increasing");
    }
  }
  for (double v : values) {
    if (!(v >= 0.0)) throw ValidationError("trace: values must be non-negative");
  }
  if (errors) {
    if (errors->size() != values.size()) {
      throw ValidationError("trace: errors and values differ in length");
    }
    for (double s : *errors) {
      if (!(s > 0.0)) throw ValidationError("trace: errors must be positive");
    }
  }
  if (exposure_s && !(*exposure_s > 0.0)) {
    throw ValidationError("trace: exposure must be positive");
  }
}

double g1_envelope(const InterferencePair& pair, double tau_fs) {
  pair.validate();
  return envelope::g1(tau_fs / pair.pulse.delta_t_fs, pair.a, pair.b);
}

double g2_envelope(const InterferencePair& pair, double tau_fs) {
  pair.validate();
  return envelope::g2(tau_fs / pair.pulse.delta_t_fs, pair.a, pair.b);
}

namespace {

struct Sums {
  double numerator_fine = 0.0;
  double numerator_coarse = 0.0;
  double single_fine = 0.0;
  double single_coarse = 0.0;
};

// Accumulates |z|^{2n} over the two arms for the fine grid and its even
// subgrid. Tails are negligible, so the plain sum is the trapezoid rule.
template <class ArmAt>
Sums accumulate(std::size_t count, int order, double a, std::complex<double> b_phased,
                ArmAt arm_at) {
  Sums s;
  for (std::size_t j = 0; j < count; ++j) {
    const auto [e1, e2] = arm_at(j);
    const std::complex<double> z = a * e1 + b_phased * e2;
    const double num = std::pow(std::norm(z), order);
    const double single = std::pow(std::norm(e1), order);
    s.numerator_fine += num;
    s.single_fine += single;
    if (j % 2 == 0) {
      s.numerator_coarse += num;
      s.single_coarse += single;
    }
  }
  return s;
}

CorrelationIntegrals finish(const Sums& s, double fine_step, double weight_scale,
                            const QuadratureOptions& options) {
  CorrelationIntegrals out{s.numerator_fine * fine_step, s.single_fine * fine_step};
  const double coarse_num = s.numerator_coarse * 2.0 * fine_step;
  const double coarse_single = s.single_coarse * 2.0 * fine_step;
  const double scale = out.numerator + weight_scale * out.single_arm;
  if (std::abs(out.numerator - coarse_num) > options.tolerance * scale ||
      std::abs(out.single_arm - coarse_single) > options.tolerance * out.single_arm) {
    throw GridTooCoarse("correlation quadrature: halved-step check exceeds tolerance");
  }
  return out;
}

}  // namespace

CorrelationIntegrals correlation_integrals(const InterferencePair& pair, int order,
                                           double tau_fs, double phase_rad,
                                           const QuadratureOptions& options) {
  pair.pulse.validate();
  if (order < 1) throw ValidationError("correlation: order must be >= 1");
  if (!(pair.a >= 0.0) || !(pair.b >= 0.0) || (pair.a == 0.0 && pair.b == 0.0)) {
    throw ValidationError("correlation: amplitudes must be non-negative and not both zero");
  }
  if (!(options.step > 0.0) || !(options.half_width > 0.0)) {
    throw ValidationError("correlation: quadrature step and half width must be positive");
  }

  const double dt = pair.pulse.delta_t_fs;
  const std::complex<double> b_phased = std::polar(pair.b, phase_rad);
  const double weight_scale = std::pow(pair.a, 2 * order) + std::pow(pair.b, 2 * order);
  const double fine = 0.5 * options.step;  // in units of delta_t

  if (pair.pulse.gdd_fs2 == 0.0) {
    const double x_tau = tau_fs / dt;
    const double lo = std::min(0.0, x_tau) - options.half_width;
    const double hi = std::max(0.0, x_tau) + options.half_width;
    auto count = static_cast<std::size_t>(std::ceil((hi - lo) / fine)) + 1;
    if (count % 2 == 0) ++count;
    const double amp = pair.pulse.amplitude;
    const Sums s = accumulate(count, order, pair.a, b_phased, [&](std::size_t j) {
      const double x = lo + static_cast<double>(j) * fine;
      return std::pair{std::complex<double>(amp / std::cosh(x)),
                       std::complex<double>(amp / std::cosh(x - x_tau))};
    });
    return finish(s, fine, weight_scale, options);
  }

  // Chirped pulse: sample both arms transform-limited (the shift is exact on
  // the analytic sech) and disperse each on the same grid.
  const double margin = options.half_width * dt + 10.0 * std::abs(pair.pulse.gdd_fs2) / dt;
  const double lo = std::min(0.0, tau_fs) - margin;
  const double hi = std::max(0.0, tau_fs) + margin;
  const double fine_fs = fine * dt;
  const std::size_t count =
      numeric::next_pow2(static_cast<std::size_t>(std::ceil((hi - lo) / fine_fs)) + 1);

  PulseModel unchirped = pair.pulse;
  unchirped.gdd_fs2 = 0.0;
  SampledField arm1{lo, fine_fs, std::vector<std::complex<double>>(count)};
  SampledField arm2 = arm1;
  for (std::size_t j = 0; j < count; ++j) {
    const double t = arm1.time_at(j);
    arm1.samples[j] = field_envelope(unchirped, t);
    arm2.samples[j] = field_envelope(unchirped, t - tau_fs);
  }
  arm1 = apply_spectral_phase(arm1, pair.pulse.gdd_fs2);
  arm2 = apply_spectral_phase(arm2, pair.pulse.gdd_fs2);

  auto tail_ok = [](const SampledField& f) {
    double peak = 0.0;
    for (const auto& e : f.samples) peak = std::max(peak, std::norm(e));
    return std::norm(f.samples.front()) < 1e-6 * peak && std::norm(f.samples.back()) < 1e-6 * peak;
  };
  if (!tail_ok(arm1) || !tail_ok(arm2)) {
    throw GridTooCoarse("correlation quadrature: dispersed pulse reaches the grid edge");
  }

  const Sums s = accumulate(count, order, pair.a, b_phased, [&](std::size_t j) {
    return std::pair{arm1.samples[j], arm2.samples[j]};
  });
  return finish(s, fine, weight_scale, options);
}

double gn_numeric(const InterferencePair& pair, int order, double tau_fs, double phase_rad,
                  const QuadratureOptions& options) {
  pair.validate();
  const auto in = correlation_integrals(pair, order, tau_fs, phase_rad, options);
  const double weight = std::pow(pair.a, 2 * order) + std::pow(pair.b, 2 * order);
  return in.numerator / (weight * in.single_arm);
}

CorrelationTrace fringe_trace(const InterferencePair& pair, int order,
                              std::span<const double> delays_fs, unsigned threads,
                              const QuadratureOptions& options) {
  pair.validate();
  const double omega0 = 2.0 * kPi * kSpeedOfLight / pair.pulse.center_wavelength_nm;

  CorrelationTrace trace;
  trace.order = order;
  trace.kind = TraceKind::FringeResolved;
  trace.delays_fs.assign(delays_fs.begin(), delays_fs.end());
  trace.values.resize(delays_fs.size());

  const std::size_t n = delays_fs.size();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(n, 1)));

  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t k = begin; k < end; ++k) {
      trace.values[k] = gn_numeric(pair, order, delays_fs[k], omega0 * delays_fs[k], options);
    }
  };
  if (threads <= 1) {
    work(0, n);
  } else {
    std::vector<std::jthread> pool;
    std::vector<std::exception_ptr> failures(threads);
    const std::size_t chunk = (n + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(std::min(n, w * chunk), std::min(n, (w + 1) * chunk));
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
    pool.clear();
    for (auto& f : failures) {
      if (f) std::rethrow_exception(f);
    }
  }
  trace.validate();
  return trace;
}

CorrelationTrace envelope_trace(const InterferencePair& pair, int order,
                                std::span<const double> delays_fs) {
  pair.validate();
  CorrelationTrace trace;
  trace.order = order;
  trace.kind = TraceKind::EnvelopeUpper;
  trace.delays_fs.assign(delays_fs.begin(), delays_fs.end());
  trace.values.reserve(delays_fs.size());
  for (double tau : delays_fs) {
    double v = 0.0;
    if (order == 1 && pair.pulse.gdd_fs2 == 0.0) {
      v = g1_envelope(pair, tau);
    } else if (order == 2 && pair.pulse.gdd_fs2 == 0.0) {
      v = g2_envelope(pair, tau);
    } else {
      v = gn_numeric(pair, order, tau, 0.0);
    }
    trace.values.push_back(v);
  }
  trace.validate();
  return trace;
}

double visibility(double a, double b) {
  if (!(a > 0.0) || !(b >= 0.0)) {
    throw ValidationError("visibility: requires a > 0 and b >= 0");
  }
  return 2.0 * a * b / (a * a + b * b);
}

double b_from_visibility(double v) {
  if (!(v > 0.0) || v > 1.0) throw ValidationError("visibility must lie in (0, 1]");
  // Smaller root of v b^2 - 2 b + v = 0, written to avoid cancellation.
  return v / (1.0 + std::sqrt(1.0 - v * v));
}

double analytic_envelope_fwhm(int order, double b, double delta_t_fs) {
  if (order != 1 && order != 2) {
    throw ValidationError("analytic_envelope_fwhm: closed forms exist for orders 1 and 2 only");
  }
  if (!(b >= 0.0) || !(delta_t_fs > 0.0)) {
    throw ValidationError("analytic_envelope_fwhm: requires b >= 0 and delta_t > 0");
  }
  auto g = [order, b](double x) {
    return order == 1 ? envelope::g1(x, 1.0, b) : envelope::g2(x, 1.0, b);
  };
  const double peak = g(0.0);
  if (!(peak > 1.0)) throw NoPeak("envelope has no peak above the background (b = 0)");
  const double level = 0.5 * (peak + 1.0);
  // Both envelopes decrease monotonically on x > 0.
  const double x_half = numeric::bisect([&](double x) { return g(x) - level; }, 0.0, 60.0, 1e-12);
  return 2.0 * x_half * delta_t_fs;
}

double gamma_factor(double v) {
  if (!(v > 0.0) || v > 1.0) throw ValidationError("gamma_factor: visibility must lie in (0, 1]");
  return kSechFwhmFactor / analytic_envelope_fwhm(2, b_from_visibility(v), 1.0);
}

double ft_limited_duration(double delta_tau_g1_fs) {
  if (!(delta_tau_g1_fs > 0.0)) {
    throw ValidationError("ft_limited_duration: FWHM must be positive");
  }
  return kFtLimitFactor * delta_tau_g1_fs;
}

double envelope_fwhm(const CorrelationTrace& trace) {
  trace.validate();
  return numeric::half_height_crossings(trace.delays_fs, trace.values, 1.0).width();
}

}  // namespace uvac
