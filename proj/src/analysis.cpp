#include "uvac/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>

#include "fft.hpp"
#include "levenberg_marquardt.hpp"
#include "uvac/constants.hpp"
#include "uvac/error.hpp"
#include "uvac/numeric.hpp"

namespace uvac {

namespace {

using cplx = std::complex<double>;
constexpr double kComplexStep = 1e-20;
const double kHalfMaxArgument = std::asinh(1.0);  // sech^2(u) = 1/2

template <class T>
T shape(int order, T x, T b) {
  return order == 1 ? envelope::g1(x, T(1.0), b) : envelope::g2(x, T(1.0), b);
}

void check_order(int order) {
  if (order != 1 && order != 2) throw ValidationError("envelope model: order must be 1 or 2");
}

// Peak height of the closed form at tau = 0 as a function of b.
double peak_height(int order, double b) { return shape(order, 0.0, b); }

EnvelopeParams initial_guess(const CorrelationTrace& trace, int order) {
  const auto& tau = trace.delays_fs;
  const auto& y = trace.values;
  const std::size_t m = y.size();

  const std::size_t peak_index =
      static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());

  // Background from the points farthest from the peak.
  std::vector<std::size_t> order_by_distance(m);
  std::iota(order_by_distance.begin(), order_by_distance.end(), 0);
  std::sort(order_by_distance.begin(), order_by_distance.end(), [&](std::size_t l, std::size_t r) {
    return std::abs(tau[l] - tau[peak_index]) > std::abs(tau[r] - tau[peak_index]);
  });
  const std::size_t n_bg = std::max<std::size_t>(2, m / 10);
  double background = 0.0;
  for (std::size_t i = 0; i < n_bg; ++i) background += y[order_by_distance[i]];
  background /= static_cast<double>(n_bg);
  if (!(background > 0.0)) background = *std::max_element(y.begin(), y.end()) / 2.0;

  std::vector<double> normalised(m);
  for (std::size_t k = 0; k < m; ++k) normalised[k] = y[k] / background;

  // Three-point running mean tames single noisy maxima.
  double ratio = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    const std::size_t lo = k == 0 ? 0 : k - 1;
    const std::size_t hi = std::min(m - 1, k + 1);
    double sum = 0.0;
    for (std::size_t j = lo; j <= hi; ++j) sum += normalised[j];
    ratio = std::max(ratio, sum / static_cast<double>(hi - lo + 1));
  }

  double b0 = 0.5;
  const double lo_peak = peak_height(order, 0.02);
  const double hi_peak = peak_height(order, 0.98);
  if (ratio <= lo_peak) {
    b0 = 0.02;
  } else if (ratio >= hi_peak) {
    b0 = 0.98;
  } else {
    b0 = numeric::bisect([&](double b) { return peak_height(order, b) - ratio; }, 0.02, 0.98,
                         1e-6);
  }

  const double width_per_dt = analytic_envelope_fwhm(order, 1.0, 1.0);
  double dt0 = (tau.back() - tau.front()) / 12.0;
  try {
    const double width = numeric::half_height_crossings(tau, normalised, 1.0).width();
    if (width > 0.0) dt0 = width / width_per_dt;
  } catch (const NumericalError&) {
    // fall back to the span-based guess
  }
  return {dt0, b0, background};
}

using Matrix3 = std::array<std::array<double, 3>, 3>;

// Standard error of f(delta_t, b) by first-order propagation through the
// (delta_t, b) block of the covariance.
template <class F>
double propagate(F&& f, const EnvelopeParams& p, const Matrix3& cov) {
  const double h_dt = 1e-6 * p.delta_t_fs;
  const double h_b = 1e-6 * std::max(p.b, 1e-3);
  const double d_dt = (f(p.delta_t_fs + h_dt, p.b) - f(p.delta_t_fs - h_dt, p.b)) / (2.0 * h_dt);
  const double b_lo = std::max(p.b - h_b, 0.0);
  const double d_b = (f(p.delta_t_fs, p.b + h_b) - f(p.delta_t_fs, b_lo)) / (p.b + h_b - b_lo);
  const double var =
      d_dt * d_dt * cov[0][0] + 2.0 * d_dt * d_b * cov[0][1] + d_b * d_b * cov[1][1];
  return std::sqrt(std::max(var, 0.0));
}

}  // namespace

double envelope_model(int order, double tau_fs, const EnvelopeParams& p) {
  check_order(order);
  return p.scale * shape(order, tau_fs / p.delta_t_fs, p.b);
}

std::array<double, 3> envelope_model_gradient(int order, double tau_fs, const EnvelopeParams& p) {
  check_order(order);
  const double x = tau_fs / p.delta_t_fs;
  const double g = shape(order, x, p.b);
  const double dg_dx = shape(order, cplx(x, kComplexStep), cplx(p.b)).imag() / kComplexStep;
  const double dg_db = shape(order, cplx(x), cplx(p.b, kComplexStep)).imag() / kComplexStep;
  return {p.scale * dg_dx * (-x / p.delta_t_fs), p.scale * dg_db, g};
}

FitResult fit_envelope(const CorrelationTrace& trace, int order, const FitOptions& options) {
  check_order(order);
  trace.validate();
  const std::size_t m = trace.values.size();
  if (m < 8) throw ValidationError("fit: need at least 8 points");
  if (!trace.errors) throw ValidationError("fit: per-point errors are required");

  const auto [min_it, max_it] = std::minmax_element(trace.values.begin(), trace.values.end());
  if (!(*max_it > 0.0) || (*min_it > 0.0 && *max_it / *min_it < 1.05)) {
    throw DegenerateData("fit: trace shows no contrast (max/min < 1.05)");
  }

  const EnvelopeParams guess = initial_guess(trace, order);
  const auto& sigma = *trace.errors;

  auto evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const EnvelopeParams params{p[0], p[1], p[2]};
    for (std::size_t k = 0; k < m; ++k) {
      const auto i = static_cast<Eigen::Index>(k);
      const double tau = trace.delays_fs[k];
      const auto grad = envelope_model_gradient(order, tau, params);
      r[i] = (trace.values[k] - params.scale * grad[2]) / sigma[k];
      for (int c = 0; c < 3; ++c) jac(i, c) = -grad[static_cast<std::size_t>(c)] / sigma[k];
    }
  };
  auto project = [](Eigen::VectorXd& p) {
    if (!(p[0] > 0.0) || !(p[2] > 0.0)) return false;
    if (p[1] < 0.0) p[1] = 0.0;
    if (p[1] > 1.0) p[1] = 1.0 / p[1];  // b and 1/b give the same envelope for a = 1
    return std::isfinite(p[1]);
  };

  Eigen::VectorXd start(3);
  start << guess.delta_t_fs, guess.b, guess.scale;
  const auto lm = detail::levenberg_marquardt(
      start, static_cast<Eigen::Index>(m), evaluate, project,
      {options.max_iterations, options.relative_step_tol});
  if (!lm.converged) {
    throw NonConvergence("fit: no convergence after " + std::to_string(lm.iterations) +
                         " iterations");
  }

  FitResult fit;
  fit.order = order;
  fit.iterations = lm.iterations;
  fit.chi2 = lm.chi2;
  fit.dof = static_cast<int>(m) - 3;
  fit.chi2_reduced = fit.dof > 0 ? fit.chi2 / fit.dof : 0.0;

  Eigen::Matrix3d cov;
  Eigen::LDLT<Eigen::Matrix3d> ldlt(lm.jtj);
  if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
      (ldlt.vectorD().array() > 1e-14 * ldlt.vectorD().maxCoeff()).all()) {
    cov = ldlt.solve(Eigen::Matrix3d::Identity());
  } else {
    cov = Eigen::Matrix3d(lm.jtj).completeOrthogonalDecomposition().pseudoInverse();
  }
  if (fit.chi2_reduced > 1.0) cov *= fit.chi2_reduced;
  cov = 0.5 * (cov + cov.transpose()).eval();
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) fit.covariance[i][j] = cov(i, j);
  }

  auto err = [&](int i) { return std::sqrt(std::max(cov(i, i), 0.0)); };
  fit.delta_t_fs = {lm.params[0], err(0)};
  fit.b = {lm.params[1], err(1)};
  fit.scale = {lm.params[2], err(2)};

  const EnvelopeParams p = fit.params();
  if (!(p.b > 0.0)) throw DegenerateData("fit: fitted interference amplitude b is zero");

  auto d = &fit.derived;
  const double v = visibility(1.0, p.b);
  const double dv_db = 2.0 * (1.0 - p.b * p.b) / ((1.0 + p.b * p.b) * (1.0 + p.b * p.b));
  d->visibility = {v, std::abs(dv_db) * fit.b.error};
  d->peak_to_background = peak_height(order, p.b);

  auto trace_width = [order](double dt, double b) {
    return analytic_envelope_fwhm(order, std::min(b, 1.0), dt);
  };
  auto pulse_width = [order](double dt, double b) {
    const double width = analytic_envelope_fwhm(order, std::min(b, 1.0), dt);
    return order == 1 ? ft_limited_duration(width)
                      : gamma_factor(visibility(1.0, std::min(b, 1.0))) * width;
  };
  d->trace_fwhm_fs = {trace_width(p.delta_t_fs, p.b), propagate(trace_width, p, fit.covariance)};
  d->pulse_fwhm_fs = {pulse_width(p.delta_t_fs, p.b), propagate(pulse_width, p, fit.covariance)};
  d->gamma = order == 1 ? kFtLimitFactor : gamma_factor(v);
  d->conversion = order == 1 ? "ft_limit_0.4048" : "gamma_of_visibility";
  return fit;
}

FitResult fit_g1(const CorrelationTrace& trace, const FitOptions& options) {
  if (trace.order != 1) throw ValidationError("fit_g1: trace order must be 1");
  return fit_envelope(trace, 1, options);
}

FitResult fit_g2(const CorrelationTrace& trace, const FitOptions& options) {
  if (trace.order != 2) throw ValidationError("fit_g2: trace order must be 2");
  return fit_envelope(trace, 2, options);
}

CorrelationTrace predict_g3(const FitResult& fit, std::span<const double> delays_fs) {
  InterferencePair pair;
  pair.pulse.delta_t_fs = fit.delta_t_fs.value;
  pair.a = 1.0;
  pair.b = fit.b.value;
  pair.validate();

  CorrelationTrace trace;
  trace.order = 3;
  trace.kind = TraceKind::EnvelopeUpper;
  trace.delays_fs.assign(delays_fs.begin(), delays_fs.end());
  for (double tau : delays_fs) trace.values.push_back(gn_numeric(pair, 3, tau, 0.0));
  trace.validate();
  return trace;
}

RecoveredSpectrum spectrum_from_g1(const CorrelationTrace& trace, double center_wavelength_nm) {
  trace.validate();
  if (trace.order != 1) throw ValidationError("spectrum_from_g1: trace order must be 1");
  if (!(center_wavelength_nm > 0.0)) {
    throw ValidationError("spectrum_from_g1: center wavelength must be positive");
  }
  if (!numeric::is_uniform_grid(trace.delays_fs)) {
    throw NonUniformGrid("spectrum_from_g1: delay grid is not uniform");
  }

  const std::size_t m = trace.values.size();
  const double step =
      (trace.delays_fs.back() - trace.delays_fs.front()) / static_cast<double>(m - 1);

  std::vector<double> excess(m);
  double peak_excess = 0.0;
  for (std::size_t k = 0; k < m; ++k) {
    excess[k] = trace.values[k] - 1.0;
    peak_excess = std::max(peak_excess, std::abs(excess[k]));
  }

  RecoveredSpectrum out;
  out.is_zero = !(peak_excess > 0.0);
  out.edge_fraction =
      out.is_zero ? 0.0 : std::max(std::abs(excess.front()), std::abs(excess.back())) / peak_excess;
  out.edges_decayed = out.edge_fraction < 0.01;

  const std::size_t n = numeric::next_pow2(std::max<std::size_t>(16 * m, 16384));
  std::vector<cplx> buffer(n);
  std::copy(excess.begin(), excess.end(), buffer.begin());
  detail::fft(buffer, detail::FftDirection::Forward);

  double peak = 0.0;
  for (const auto& v : buffer) peak = std::max(peak, std::abs(v));

  const std::size_t half = n / 2;
  // Walk from the highest frequency down so that wavelengths increase.
  for (std::size_t i = n; i-- > 0;) {
    const std::size_t k = (i + half) % n;
    const double f = detail::fft_frequency(k, n, step);
    const double inv = 1.0 / center_wavelength_nm + f / kSpeedOfLight;
    if (!(inv > 0.0)) continue;
    out.spectrum.wavelengths_nm.push_back(1.0 / inv);
    out.spectrum.density.push_back(out.is_zero || !(peak > 0.0) ? 0.0 : std::abs(buffer[k]) / peak);
  }
  return out;
}

double sech_spectrum_fwhm_nm(double delta_t_fs, double center_wavelength_nm) {
  const double df = kHalfMaxArgument / (delta_t_fs * kPi * kPi * kSpeedOfLight);
  const double inv = 1.0 / center_wavelength_nm;
  return 1.0 / (inv - df) - 1.0 / (inv + df);
}

SechSpectrumFit fit_spectrum_sech(const Spectrum& spectrum, double center_wavelength_nm) {
  const auto& lambda = spectrum.wavelengths_nm;
  const auto& y = spectrum.density;
  if (lambda.size() != y.size() || lambda.size() < 3) {
    throw ValidationError("fit_spectrum_sech: need >= 3 paired samples");
  }
  if (!(center_wavelength_nm > 0.0)) {
    throw ValidationError("fit_spectrum_sech: center wavelength must be positive");
  }

  const std::size_t peak =
      static_cast<std::size_t>(std::max_element(y.begin(), y.end()) - y.begin());
  if (!(y[peak] > 0.0)) throw NoPeak("fit_spectrum_sech: spectrum is zero");

  // Main lobe: contiguous samples above 1e-3 of the peak.
  std::size_t lo = peak;
  while (lo > 0 && y[lo - 1] > 1e-3 * y[peak]) --lo;
  std::size_t hi = peak;
  while (hi + 1 < y.size() && y[hi + 1] > 1e-3 * y[peak]) ++hi;
  const std::size_t m = hi - lo + 1;
  if (m < 3) throw NoPeak("fit_spectrum_sech: peak is not resolved");

  const auto [edge_lo, edge_hi] = spectrum_half_max_edges(spectrum);
  const double df0 = kSpeedOfLight * (1.0 / edge_lo - 1.0 / edge_hi);
  const double dt0 = 2.0 * kHalfMaxArgument / (kPi * kPi * df0);

  auto evaluate = [&](const Eigen::VectorXd& p, Eigen::VectorXd& r, Eigen::MatrixXd& jac) {
    const double dt = p[0];
    const double lc = p[1];
    for (std::size_t j = 0; j < m; ++j) {
      const auto i = static_cast<Eigen::Index>(j);
      const double l = lambda[lo + j];
      const double u = dt * kPi * kPi * kSpeedOfLight * (1.0 / l - 1.0 / lc);
      const double sech = 1.0 / std::cosh(u);
      const double s = sech * sech;
      const double ds_du = -2.0 * s * std::tanh(u);
      r[i] = y[lo + j] - s;
      jac(i, 0) = -ds_du * (u / dt);
      jac(i, 1) = -ds_du * (dt * kPi * kPi * kSpeedOfLight / (lc * lc));
    }
  };
  auto project = [](Eigen::VectorXd& p) { return p[0] > 0.0 && p[1] > 0.0; };

  Eigen::VectorXd start(2);
  start << dt0, lambda[peak];
  const auto lm = detail::levenberg_marquardt(start, static_cast<Eigen::Index>(m), evaluate,
                                              project, {200, 1e-10});
  if (!lm.converged) throw NonConvergence("fit_spectrum_sech: no convergence");

  SechSpectrumFit out;
  out.delta_t_fs = lm.params[0];
  out.center_wavelength_nm = lm.params[1];
  out.fwhm_nm = sech_spectrum_fwhm_nm(out.delta_t_fs, out.center_wavelength_nm);
  out.iterations = lm.iterations;
  return out;
}

}  // namespace uvac
