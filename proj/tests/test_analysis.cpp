#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "uvac/analysis.hpp"
#include "uvac/constants.hpp"
#include "uvac/error.hpp"
#include "uvac/numeric.hpp"
#include "uvac/spdc.hpp"

using namespace uvac;

namespace {

std::vector<double> grid(double lo, double hi, int points) {
  std::vector<double> out(points);
  for (int k = 0; k < points; ++k) out[k] = lo + (hi - lo) * k / (points - 1);
  return out;
}

// Exact model values with sigma = sqrt(value).
CorrelationTrace noiseless(int order, const EnvelopeParams& p, const std::vector<double>& delays) {
  CorrelationTrace t{order, delays, {}};
  std::vector<double> errors;
  for (double tau : delays) {
    const double v = envelope_model(order, tau, p);
    t.values.push_back(v);
    errors.push_back(std::sqrt(v));
  }
  t.errors = errors;
  return t;
}

CorrelationTrace poisson_trace(int order, const EnvelopeParams& p, const std::vector<double>& delays,
                               std::uint64_t seed) {
  CorrelationTrace t{order, delays, {}};
  std::vector<double> errors;
  for (std::size_t k = 0; k < delays.size(); ++k) {
    const double c = static_cast<double>(poisson_draw(seed, k, order, envelope_model(order, delays[k], p)));
    t.values.push_back(c);
    errors.push_back(std::max(1.0, std::sqrt(c)));
  }
  t.errors = errors;
  return t;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

Spectrum sech_spectrum(double delta_t, double center, double lo, double hi, int points) {
  Spectrum s;
  for (double l : grid(lo, hi, points)) {
    const double arg = delta_t * kPi * kPi * kSpeedOfLight * (1.0 / l - 1.0 / center);
    s.wavelengths_nm.push_back(l);
    s.density.push_back(1.0 / std::pow(std::cosh(arg), 2));
  }
  return s;
}

}  // namespace

TEST_CASE("model gradient matches finite differences") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> dt(40.0, 300.0);
  std::uniform_real_distribution<double> b(0.05, 1.0);
  std::uniform_real_distribution<double> x(-5.0, 5.0);
  for (int i = 0; i < 40; ++i) {
    const EnvelopeParams p{dt(rng), b(rng), 50.0};
    const double tau = x(rng) * p.delta_t_fs;
    for (int order : {1, 2}) {
      const auto grad = envelope_model_gradient(order, tau, p);
      const double h_dt = 1e-5 * p.delta_t_fs;
      const double h_b = 1e-6;
      const double fd_dt = (envelope_model(order, tau, {p.delta_t_fs + h_dt, p.b, p.scale}) -
                            envelope_model(order, tau, {p.delta_t_fs - h_dt, p.b, p.scale})) /
                           (2 * h_dt);
      const double fd_b = (envelope_model(order, tau, {p.delta_t_fs, p.b + h_b, p.scale}) -
                           envelope_model(order, tau, {p.delta_t_fs, p.b - h_b, p.scale})) /
                          (2 * h_b);
      CHECK(grad[0] == doctest::Approx(fd_dt).epsilon(1e-6).scale(1.0));
      CHECK(grad[1] == doctest::Approx(fd_b).epsilon(1e-6).scale(1.0));
      CHECK(grad[2] == doctest::Approx(envelope_model(order, tau, p) / p.scale).epsilon(1e-14));
    }
  }
}

TEST_CASE("noiseless first-order fit") {
  const EnvelopeParams truth{100.0, 0.7, 1000.0};
  const auto trace = noiseless(1, truth, grid(-600.0, 600.0, 121));
  const auto fit = fit_g1(trace);
  CHECK(fit.delta_t_fs.value == doctest::Approx(100.0).epsilon(1e-6));
  CHECK(fit.b.value == doctest::Approx(0.7).epsilon(1e-6));
  CHECK(fit.scale.value == doctest::Approx(1000.0).epsilon(1e-6));
  CHECK(fit.chi2 < 1e-12);
  CHECK(fit.dof == 118);
  CHECK(fit.derived.conversion == "ft_limit_0.4048");
  CHECK(fit.derived.trace_fwhm_fs.value == doctest::Approx(analytic_envelope_fwhm(1, 0.7, 100.0)).epsilon(1e-6));
  CHECK(fit.derived.pulse_fwhm_fs.value ==
        doctest::Approx(kFtLimitFactor * fit.derived.trace_fwhm_fs.value).epsilon(1e-12));
  CHECK(fit.derived.visibility.value == doctest::Approx(visibility(1.0, 0.7)).epsilon(1e-6));
}

TEST_CASE("noiseless second-order fit") {
  const double b = b_from_visibility(0.75);
  const auto trace = noiseless(2, {99.85, b, 300.0}, grid(-600.0, 600.0, 121));
  const auto fit = fit_g2(trace);
  CHECK(fit.delta_t_fs.value == doctest::Approx(99.85).epsilon(1e-6));
  CHECK(fit.derived.visibility.value == doctest::Approx(0.75).epsilon(1e-6));
  CHECK(fit.derived.peak_to_background == doctest::Approx(4.26087).epsilon(1e-5));
  CHECK(fit.derived.pulse_fwhm_fs.value == doctest::Approx(176.0).epsilon(1e-4));
  CHECK(fit.derived.gamma == doctest::Approx(gamma_factor(0.75)).epsilon(1e-6));
  CHECK(fit.derived.conversion == "gamma_of_visibility");
}

TEST_CASE("fit input checks") {
  const auto g2 = noiseless(2, {100.0, 0.5, 100.0}, grid(-600.0, 600.0, 61));
  CHECK_THROWS_AS(fit_g1(g2), ValidationError);
  auto as_g1 = g2;
  as_g1.order = 1;
  CHECK_THROWS_AS(fit_g2(as_g1), ValidationError);

  auto few = noiseless(1, {100.0, 0.5, 100.0}, grid(-600.0, 600.0, 7));
  CHECK_THROWS_AS(fit_g1(few), ValidationError);

  auto bare = noiseless(1, {100.0, 0.5, 100.0}, grid(-600.0, 600.0, 40));
  bare.errors.reset();
  CHECK_THROWS_AS(fit_g1(bare), ValidationError);

  const auto flat = noiseless(2, {100.0, 0.0, 500.0}, grid(-600.0, 600.0, 61));
  CHECK_THROWS_AS(fit_g2(flat), DegenerateData);
}

TEST_CASE("fits of Poisson data") {
  const EnvelopeParams truth{100.0, 0.5, 400.0};
  const auto delays = grid(-600.0, 600.0, 100);

  SUBCASE("error bars cover the truth and chi2 is sensible") {
    const int runs = 200;
    int covered = 0;
    std::vector<double> chi2;
    for (int s = 0; s < runs; ++s) {
      const auto fit = fit_g2(poisson_trace(2, truth, delays, 1000 + s));
      covered += std::abs(fit.delta_t_fs.value - truth.delta_t_fs) <= fit.delta_t_fs.error;
      chi2.push_back(fit.chi2_reduced);
    }
    const double fraction = static_cast<double>(covered) / runs;
    const double spread = 2.0 * std::sqrt(0.683 * 0.317 / runs);
    CHECK(fraction > 0.683 - spread);
    CHECK(fraction < 0.683 + spread);
    CHECK(median(chi2) > 0.7);
    CHECK(median(chi2) < 1.3);
  }

  SUBCASE("errors shrink as the square root of the rate") {
    const auto low = fit_g2(poisson_trace(2, truth, delays, 7));
    EnvelopeParams bright = truth;
    bright.scale *= 100.0;
    const auto high = fit_g2(poisson_trace(2, bright, delays, 7));
    const double ratio = low.delta_t_fs.error / high.delta_t_fs.error;
    CHECK(ratio > 10.0 / 1.3);
    CHECK(ratio < 10.0 * 1.3);
  }

  SUBCASE("covariance is symmetric positive semi-definite") {
    const auto fit = fit_g1(poisson_trace(1, {100.0, 0.8, 900.0}, delays, 3));
    Eigen::Matrix3d c;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) c(i, j) = fit.covariance[i][j];
    }
    CHECK((c - c.transpose()).norm() < 1e-12 * c.norm());
    const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> eig(c);
    CHECK(eig.eigenvalues().minCoeff() >= -1e-12 * eig.eigenvalues().maxCoeff());
    CHECK(fit.delta_t_fs.error == doctest::Approx(std::sqrt(c(0, 0))));
  }
}

TEST_CASE("simulated first-order scan of a 126 fs pulse") {
  SpdcSource source;
  source.gain = 0.12;
  source.efficiency = 0.3;
  const PulseModel pulse = PulseModel::from_fwhm(126.0);
  const InterferencePair pair{pulse, 1.0, b_from_visibility(0.77)};
  const auto delays = grid(-6.0 * pulse.delta_t_fs, 6.0 * pulse.delta_t_fs, 120);
  const std::vector<int> orders{1};
  const auto records = simulate_scan(source, pair, delays, orders, 8.0, 2024);
  const auto fit = fit_g1(counts_to_trace(records, 1));
  const auto& pulse_fwhm = fit.derived.pulse_fwhm_fs;
  CHECK(pulse_fwhm.error < 11.0);
  CHECK(std::abs(pulse_fwhm.value - 126.0) < std::max(3.0 * pulse_fwhm.error, 0.5));
  CHECK(std::abs(fit.derived.visibility.value - 0.77) < 0.02);
}

TEST_CASE("third-order prediction") {
  const auto delays = grid(-500.0, 500.0, 101);

  SUBCASE("perfect overlap peaks at 32") {
    const auto fit = fit_g2(noiseless(2, {100.0, 1.0, 50.0}, delays));
    const auto g3 = predict_g3(fit, delays);
    CHECK(g3.order == 3);
    CHECK(g3.values[50] == doctest::Approx(32.0).epsilon(1e-6));
    const std::vector<double> far{1500.0};
    CHECK(predict_g3(fit, far).values[0] == doctest::Approx(1.0).epsilon(1e-3));
    for (std::size_t k = 0; k < delays.size(); ++k) {
      CHECK(g3.values[k] == doctest::Approx(g3.values[delays.size() - 1 - k]).epsilon(1e-12));
    }
  }

  SUBCASE("prediction matches quadrature at the fitted parameters") {
    const auto fit = fit_g2(noiseless(2, {100.0, 0.45, 50.0}, delays));
    const auto g3 = predict_g3(fit, delays);
    const InterferencePair pair{PulseModel{fit.delta_t_fs.value}, 1.0, fit.b.value};
    for (std::size_t k = 0; k < delays.size(); k += 10) {
      CHECK(g3.values[k] == doctest::Approx(gn_numeric(pair, 3, delays[k], 0.0)).epsilon(1e-6));
    }
  }
}

TEST_CASE("spectrum from the first-order envelope") {
  SUBCASE("matches the field spectrum") {
    for (double fwhm : {80.0, 126.0, 150.0}) {
      const PulseModel p = PulseModel::from_fwhm(fwhm);
      const double half = 16.0 * p.delta_t_fs;
      const auto trace = envelope_trace(InterferencePair{p, 1.0, 1.0}, 1,
                                        grid(-half, half, static_cast<int>(2 * half) + 1));
      const auto recovered = spectrum_from_g1(trace, 390.0);
      CHECK_FALSE(recovered.is_zero);
      CHECK(recovered.edges_decayed);
      const double direct = spectrum_fwhm_nm(field_spectrum(sample_field_centered(p, 40.0 * p.delta_t_fs, 1.0), 390.0));
      CHECK(spectrum_fwhm_nm(recovered.spectrum) == doctest::Approx(direct).epsilon(0.02));
    }
  }

  SUBCASE("126 fs gives about 1.27 nm") {
    const PulseModel p = PulseModel::from_fwhm(126.0);
    const auto trace = envelope_trace(InterferencePair{p, 1.0, b_from_visibility(0.77)}, 1,
                                      grid(-12.0 * p.delta_t_fs, 12.0 * p.delta_t_fs, 241));
    const auto recovered = spectrum_from_g1(trace, 390.0);
    // numpy: 1.2675 nm for a 126 fs sech at 390 nm
    CHECK(spectrum_fwhm_nm(recovered.spectrum) == doctest::Approx(1.2675).epsilon(0.01));
  }

  SUBCASE("constant trace has no spectrum") {
    CorrelationTrace flat{1, grid(-500.0, 500.0, 101), std::vector<double>(101, 1.0)};
    const auto recovered = spectrum_from_g1(flat, 390.0);
    CHECK(recovered.is_zero);
    for (double d : recovered.spectrum.density) CHECK(d == 0.0);
  }

  SUBCASE("short scan is flagged") {
    const auto trace = envelope_trace(InterferencePair{PulseModel{100.0}, 1.0, 1.0}, 1,
                                      grid(-300.0, 300.0, 121));
    const auto recovered = spectrum_from_g1(trace, 390.0);
    CHECK_FALSE(recovered.edges_decayed);
    CHECK(recovered.edge_fraction > 0.01);
  }

  SUBCASE("non-uniform grid is rejected") {
    auto delays = grid(-500.0, 500.0, 101);
    delays[40] += 3.0;
    const auto trace = envelope_trace(InterferencePair{PulseModel{100.0}, 1.0, 1.0}, 1, delays);
    CHECK_THROWS_AS(spectrum_from_g1(trace, 390.0), NonUniformGrid);
  }
}

TEST_CASE("sech fit of a spectrum") {
  SUBCASE("recovers duration and centre") {
    const auto s = sech_spectrum(100.0, 390.05, 384.0, 396.0, 2401);
    const auto fit = fit_spectrum_sech(s, 390.0);
    CHECK(fit.delta_t_fs == doctest::Approx(100.0).epsilon(1e-6));
    CHECK(fit.center_wavelength_nm == doctest::Approx(390.05).epsilon(1e-9));
    CHECK(fit.fwhm_nm == doctest::Approx(sech_spectrum_fwhm_nm(100.0, 390.05)).epsilon(1e-6));
  }

  SUBCASE("1.06 nm wide spectrum") {
    const double dt = numeric::bisect([](double d) { return sech_spectrum_fwhm_nm(d, 390.0) - 1.06; },
                                      10.0, 1000.0, 1e-12);
    const auto fit = fit_spectrum_sech(sech_spectrum(dt, 390.0, 385.0, 395.0, 2001), 390.0);
    CHECK(fit.fwhm_nm == doctest::Approx(1.06).epsilon(1e-6));
    CHECK(kSechFwhmFactor * fit.delta_t_fs == doctest::Approx(150.6).epsilon(0.01));
  }

  SUBCASE("width relation with the time-bandwidth product") {
    for (double dt : {50.0, 85.1, 200.0}) {
      const double fwhm = sech_spectrum_fwhm_nm(dt, 390.0);
      const double tbp = fwhm * kSpeedOfLight / (390.0 * 390.0) * kSechFwhmFactor * dt;
      CHECK(tbp == doctest::Approx(0.3148).epsilon(1e-3));
    }
    // numpy: 150 fs FWHM at 390 nm -> 1.0648 nm
    CHECK(sech_spectrum_fwhm_nm(150.0 / kSechFwhmFactor, 390.0) == doctest::Approx(1.0648).epsilon(5e-4));
  }
}
