#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

namespace uvac {

/// Parametric sech pump pulse, E(t) = amplitude * sech(t / delta_t), with an
/// optional quadratic spectral phase. Fields are carrier-free baseband
/// envelopes; the carrier only enters through the interferometer phase.
struct PulseModel {
  double delta_t_fs = 100.0;           ///< sech scale parameter
  double center_wavelength_nm = 390.0;
  double amplitude = 1.0;
  double gdd_fs2 = 0.0;

  /// Build from the transform-limited intensity FWHM.
  static PulseModel from_fwhm(double fwhm_fs, double center_wavelength_nm = 390.0,
                              double amplitude = 1.0, double gdd_fs2 = 0.0);

  /// Throws ValidationError unless delta_t > 0, wavelength > 0, amplitude >= 0.
  void validate() const;
};

/// Complex envelope on a uniform time grid.
struct SampledField {
  double t0_fs = 0.0;
  double dt_fs = 1.0;
  std::vector<std::complex<double>> samples;

  double time_at(std::size_t k) const { return t0_fs + static_cast<double>(k) * dt_fs; }
  std::size_t size() const { return samples.size(); }
  /// Sum |E|^2 dt.
  double energy() const;
  void validate() const;
};

/// Peak-normalised spectral density on a strictly increasing wavelength axis.
struct Spectrum {
  std::vector<double> wavelengths_nm;
  std::vector<double> density;
};

/// Power spectral density over baseband frequency (1/fs), normalised so that
/// sum(density) * df equals the field energy sum(|E|^2) dt.
struct PowerSpectrum {
  std::vector<double> frequency_per_fs;  // increasing, centred on 0
  std::vector<double> density;
  double df = 0.0;
};

/// Transform-limited envelope amplitude * sech(t / delta_t). The dispersion
/// term is not applied here; use sample_field for chirped pulses.
std::complex<double> field_envelope(const PulseModel& pulse, double t_fs);

/// 2 ln(1 + sqrt 2) * delta_t. Rejects gdd != 0.
double intensity_fwhm(const PulseModel& pulse);

/// Samples the envelope at t0 + k*dt, k < n, applying the pulse's GDD.
/// Throws WindowTooNarrow when either end carries more than 1e-6 of the peak
/// intensity.
SampledField sample_field(const PulseModel& pulse, double t0_fs, double dt_fs,
                          std::size_t n_samples);

/// Symmetric window [-half_window, +half_window] with step dt.
SampledField sample_field_centered(const PulseModel& pulse, double half_window_fs,
                                   double dt_fs);

/// Multiplies the spectrum by exp(i gdd/2 w^2). Energy preserving.
SampledField apply_spectral_phase(const SampledField& field, double gdd_fs2);

/// Zero-padded power spectrum; padded length is a power of two of at least
/// min_length and 16 times the field length.
PowerSpectrum baseband_power(const SampledField& field, std::size_t min_length = 0);

/// |FT|^2 mapped to wavelength with 1/lambda = 1/lambda0 + f/c.
Spectrum field_spectrum(const SampledField& field, double center_wavelength_nm);

/// Intensity FWHM of a sampled field, linear interpolation on both flanks.
double sampled_intensity_fwhm(const SampledField& field);

/// Half-maximum crossing wavelengths (low, high) of a peak-normalised spectrum.
std::pair<double, double> spectrum_half_max_edges(const Spectrum& spectrum);
double spectrum_fwhm_nm(const Spectrum& spectrum);

double wavelength_from_detuning(double center_wavelength_nm, double frequency_per_fs);
double detuning_from_wavelength(double center_wavelength_nm, double wavelength_nm);

}  // namespace uvac
