#include "uvac/pulse.hpp"

#include <algorithm>
#include <cmath>

#include "fft.hpp"
#include "uvac/constants.hpp"
#include "uvac/error.hpp"
#include "uvac/numeric.hpp"

namespace uvac {

namespace {

constexpr double kTailFraction = 1e-6;

std::vector<double> intensities(const SampledField& field) {
  std::vector<double> out(field.size());
  std::transform(field.samples.begin(), field.samples.end(), out.begin(),
                 [](std::complex<double> e) { return std::norm(e); });
  return out;
}

}  // namespace

PulseModel PulseModel::from_fwhm(double fwhm_fs, double center_wavelength_nm, double amplitude,
                                 double gdd_fs2) {
  PulseModel p{fwhm_fs / kSechFwhmFactor, center_wavelength_nm, amplitude, gdd_fs2};
  p.validate();
  return p;
}

void PulseModel::validate() const {
  if (!(delta_t_fs > 0.0) || !std::isfinite(delta_t_fs)) {
    throw ValidationError("pulse: delta_t must be positive");
  }
  if (!(center_wavelength_nm > 0.0)) {
    throw ValidationError("pulse: center wavelength must be positive");
  }
  if (!(amplitude >= 0.0)) throw ValidationError("pulse: amplitude must be non-negative");
  if (!std::isfinite(gdd_fs2)) throw ValidationError("pulse: gdd must be finite");
}

double SampledField::energy() const {
  double sum = 0.0;
  for (const auto& e : samples) sum += std::norm(e);
  return sum * dt_fs;
}

void SampledField::validate() const {
  if (!(dt_fs > 0.0)) throw ValidationError("sampled field: dt must be positive");
  if (samples.empty()) throw ValidationError("sampled field: no samples");
}

std::complex<double> field_envelope(const PulseModel& pulse, double t_fs) {
  const double x = t_fs / pulse.delta_t_fs;
  // 1/cosh underflows cleanly to 0 for large |x|.
  return {pulse.amplitude / std::cosh(x), 0.0};
}

double intensity_fwhm(const PulseModel& pulse) {
  pulse.validate();
  if (pulse.gdd_fs2 != 0.0) {
    throw ValidationError("intensity_fwhm: closed form holds only for gdd = 0; "
                          "use sampled_intensity_fwhm on a sampled field");
  }
  return kSechFwhmFactor * pulse.delta_t_fs;
}

SampledField sample_field(const PulseModel& pulse, double t0_fs, double dt_fs,
                          std::size_t n_samples) {
  pulse.validate();
  if (!(dt_fs > 0.0)) throw ValidationError("sample_field: dt must be positive");
  if (n_samples < 2) throw ValidationError("sample_field: need at least two samples");

  SampledField field{t0_fs, dt_fs, std::vector<std::complex<double>>(n_samples)};
  for (std::size_t k = 0; k < n_samples; ++k) {
    field.samples[k] = field_envelope(pulse, field.time_at(k));
  }
  if (pulse.gdd_fs2 != 0.0) field = apply_spectral_phase(field, pulse.gdd_fs2);

  const auto intensity = intensities(field);
  const double peak = *std::max_element(intensity.begin(), intensity.end());
  if (intensity.front() >= kTailFraction * peak || intensity.back() >= kTailFraction * peak) {
    throw WindowTooNarrow("sample_field: window too narrow, pulse tails exceed 1e-6 of peak "
                          "intensity at the grid edges");
  }
  return field;
}

SampledField sample_field_centered(const PulseModel& pulse, double half_window_fs,
                                   double dt_fs) {
  if (!(half_window_fs > 0.0) || !(dt_fs > 0.0)) {
    throw ValidationError("sample_field_centered: window and step must be positive");
  }
  const auto half = static_cast<std::size_t>(std::llround(half_window_fs / dt_fs));
  return sample_field(pulse, -static_cast<double>(half) * dt_fs, dt_fs, 2 * half + 1);
}

SampledField apply_spectral_phase(const SampledField& field, double gdd_fs2) {
  field.validate();
  SampledField out = field;
  auto& data = out.samples;
  const std::size_t n = data.size();
  detail::fft(data, detail::FftDirection::Forward);
  for (std::size_t k = 0; k < n; ++k) {
    const double omega = 2.0 * kPi * detail::fft_frequency(k, n, field.dt_fs);
    data[k] *= std::polar(1.0, 0.5 * gdd_fs2 * omega * omega);
  }
  detail::fft(data, detail::FftDirection::Inverse);
  return out;
}

PowerSpectrum baseband_power(const SampledField& field, std::size_t min_length) {
  field.validate();
  const std::size_t n = numeric::next_pow2(std::max(min_length, 16 * field.size()));
  std::vector<std::complex<double>> buffer(n);
  std::copy(field.samples.begin(), field.samples.end(), buffer.begin());
  detail::fft(buffer, detail::FftDirection::Forward);

  PowerSpectrum ps;
  ps.df = 1.0 / (static_cast<double>(n) * field.dt_fs);
  ps.frequency_per_fs.resize(n);
  ps.density.resize(n);
  // fftshift: negative frequencies first.
  const std::size_t half = n / 2;
  const double dt2 = field.dt_fs * field.dt_fs;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = (i + half) % n;
    ps.frequency_per_fs[i] = detail::fft_frequency(k, n, field.dt_fs);
    ps.density[i] = std::norm(buffer[k]) * dt2;
  }
  return ps;
}

double wavelength_from_detuning(double center_wavelength_nm, double frequency_per_fs) {
  return 1.0 / (1.0 / center_wavelength_nm + frequency_per_fs / kSpeedOfLight);
}

double detuning_from_wavelength(double center_wavelength_nm, double wavelength_nm) {
  return kSpeedOfLight * (1.0 / wavelength_nm - 1.0 / center_wavelength_nm);
}

Spectrum field_spectrum(const SampledField& field, double center_wavelength_nm) {
  if (!(center_wavelength_nm > 0.0)) {
    throw ValidationError("field_spectrum: center wavelength must be positive");
  }
  const PowerSpectrum ps = baseband_power(field);
  const double peak = *std::max_element(ps.density.begin(), ps.density.end());

  Spectrum s;
  // Increasing frequency maps to decreasing wavelength, so walk backwards.
  for (std::size_t i = ps.density.size(); i-- > 0;) {
    const double inv = 1.0 / center_wavelength_nm + ps.frequency_per_fs[i] / kSpeedOfLight;
    if (!(inv > 0.0)) continue;
    s.wavelengths_nm.push_back(1.0 / inv);
    s.density.push_back(peak > 0.0 ? ps.density[i] / peak : 0.0);
  }
  return s;
}

double sampled_intensity_fwhm(const SampledField& field) {
  field.validate();
  std::vector<double> t(field.size());
  for (std::size_t k = 0; k < t.size(); ++k) t[k] = field.time_at(k);
  return numeric::half_height_crossings(t, intensities(field), 0.0).width();
}

std::pair<double, double> spectrum_half_max_edges(const Spectrum& spectrum) {
  const auto c = numeric::half_height_crossings(spectrum.wavelengths_nm, spectrum.density, 0.0);
  return {c.left, c.right};
}

double spectrum_fwhm_nm(const Spectrum& spectrum) {
  const auto [lo, hi] = spectrum_half_max_edges(spectrum);
  return hi - lo;
}

}  // namespace uvac
