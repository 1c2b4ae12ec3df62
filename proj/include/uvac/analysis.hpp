#pragma once

#include <array>
#include <span>
#include <string>

#include "uvac/correlator.hpp"
#include "uvac/pulse.hpp"

namespace uvac {

struct Estimate {
  double value = 0.0;
  double error = 0.0;
};

/// Parameters of the envelope model scale * g_n(tau / delta_t; a = 1, b).
struct EnvelopeParams {
  double delta_t_fs = 100.0;
  double b = 1.0;
  double scale = 1.0;
};

/// Model value and its gradient with respect to (delta_t, b, scale). The
/// gradient is exact to rounding (complex-step differentiation).
double envelope_model(int order, double tau_fs, const EnvelopeParams& params);
std::array<double, 3> envelope_model_gradient(int order, double tau_fs,
                                              const EnvelopeParams& params);

struct FitOptions {
  int max_iterations = 200;
  double relative_step_tol = 1e-8;
};

struct FitResult {
  int order = 1;
  Estimate delta_t_fs;
  Estimate b;
  Estimate scale;
  std::array<std::array<double, 3>, 3> covariance{};  // (delta_t, b, scale)
  double chi2 = 0.0;
  int dof = 0;
  double chi2_reduced = 0.0;
  int iterations = 0;

  struct Derived {
    Estimate visibility;
    Estimate trace_fwhm_fs;
    /// FT-limited duration for order 1, gamma(V) * trace FWHM for order 2.
    Estimate pulse_fwhm_fs;
    double gamma = 0.0;  // conversion factor applied to trace_fwhm
    double peak_to_background = 0.0;
    std::string conversion;
  } derived;

  EnvelopeParams params() const { return {delta_t_fs.value, b.value, scale.value}; }
};

/// Poisson- or sigma-weighted fit of an order-1 trace. Needs >= 8 points and
/// per-point errors. Throws DegenerateData when max/min < 1.05 and
/// NonConvergence when the iteration limit is hit.
FitResult fit_g1(const CorrelationTrace& trace, const FitOptions& options = {});

/// Same for an order-2 trace, with the pulse FWHM converted through gamma(V).
FitResult fit_g2(const CorrelationTrace& trace, const FitOptions& options = {});

/// Dispatches on `order` (1 or 2); the trace's own order tag is not checked.
FitResult fit_envelope(const CorrelationTrace& trace, int order, const FitOptions& options = {});

/// Third-order envelope implied by a second-order fit, unit background.
CorrelationTrace predict_g3(const FitResult& fit, std::span<const double> delays_fs);

struct RecoveredSpectrum {
  Spectrum spectrum;
  bool is_zero = false;       // trace carried no signal above the background
  bool edges_decayed = true;  // scan edges below 1% of the peak excess
  double edge_fraction = 0.0;
};

/// Magnitude of the Fourier transform of (values - 1) over a uniform delay
/// grid, mapped to wavelength around center_wavelength. The trace must be
/// normalised to a unit background. Throws NonUniformGrid.
RecoveredSpectrum spectrum_from_g1(const CorrelationTrace& trace, double center_wavelength_nm);

struct SechSpectrumFit {
  double delta_t_fs = 0.0;
  double center_wavelength_nm = 0.0;
  double fwhm_nm = 0.0;
  int iterations = 0;
};

/// Least squares fit of sech^2(delta_t pi^2 c (1/lambda - 1/lambda_c)) over
/// (delta_t, lambda_c) on the main lobe of a peak-normalised spectrum.
SechSpectrumFit fit_spectrum_sech(const Spectrum& spectrum, double center_wavelength_nm);

/// FWHM in nm of sech^2(delta_t pi^2 c (1/lambda - 1/lambda_c)).
double sech_spectrum_fwhm_nm(double delta_t_fs, double center_wavelength_nm);

}  // namespace uvac
