#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "uvac/constants.hpp"
#include "uvac/correlator.hpp"
#include "uvac/error.hpp"

using namespace uvac;

namespace {

InterferencePair pair_with(double b, double delta_t = 100.0, double a = 1.0) {
  return InterferencePair{PulseModel{delta_t}, a, b};
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> out;
  for (double t = lo; t <= hi + 1e-9; t += step) out.push_back(t);
  return out;
}

// mpmath, 30 digits: root of x / sinh x = 1/2
constexpr double kG1HalfX = 2.17731898496530675;
// mpmath: b_from_visibility(0.75) = (1 - sqrt(1 - 0.75^2)) / 0.75
constexpr double kB75 = 0.451416229645136;

}  // namespace

TEST_CASE("g1 envelope examples") {
  CHECK(g1_envelope(pair_with(1.0), 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  for (double tau : {0.0, 50.0, 400.0}) CHECK(g1_envelope(pair_with(0.0), tau) == 1.0);
  CHECK(g1_envelope(pair_with(1.0), 217.73) == doctest::Approx(1.5).epsilon(1e-5));
  CHECK(g1_envelope(pair_with(1.0), kG1HalfX * 100.0) == doctest::Approx(1.5).epsilon(1e-14));
  // Oracle for the constant itself, straight from the definition.
  CHECK(kG1HalfX / std::sinh(kG1HalfX) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("g2 envelope examples") {
  CHECK(g2_envelope(pair_with(1.0), 0.0) == doctest::Approx(8.0).epsilon(1e-15));
  for (double tau : {0.0, 70.0, 900.0}) CHECK(g2_envelope(pair_with(0.0), tau) == 1.0);
  // 1 + (6 a^2 b^2 + 4 a b^3 + 4 a^3 b) / (a^4 + b^4) at tau = 0, mpmath 4.26087
  const double b = kB75;
  const double peak = 1.0 + (6 * b * b + 4 * b * b * b + 4 * b) / (1 + b * b * b * b);
  CHECK(g2_envelope(pair_with(b), 0.0) == doctest::Approx(peak).epsilon(1e-14));
  CHECK(g2_envelope(pair_with(0.4514), 0.0) == doctest::Approx(4.26087).epsilon(1e-4));
}

TEST_CASE("envelope forms are smooth through the series cutoff and decay") {
  using namespace envelope;
  for (double sign : {-1.0, 1.0}) {
    const double lo = sign * (kSeriesCutoff * (1 - 1e-9));
    const double hi = sign * (kSeriesCutoff * (1 + 1e-9));
    CHECK(std::abs(x_over_sinh(lo) - x_over_sinh(hi)) < 1e-13);
    CHECK(std::abs(cross_ratio(lo) - cross_ratio(hi)) < 1e-12);
    CHECK(std::abs(mixed_ratio(lo) - mixed_ratio(hi)) < 1e-12);
  }
  for (double sign : {-1.0, 1.0}) {
    const double lo = sign * std::nextafter(kTaylorCutoff, 0.0);
    const double hi = sign * kTaylorCutoff;
    CHECK(std::abs(cross_ratio(lo) - cross_ratio(hi)) < 1e-12);
    CHECK(std::abs(mixed_ratio(lo) - mixed_ratio(hi)) < 1e-12);
  }
  // mpmath, 40 digits
  CHECK(std::abs(cross_ratio(0.01) - 0.33332000031745439163) < 2e-15);
  CHECK(std::abs(mixed_ratio(0.01) - 1.33329333414284333355) < 2e-15);
  CHECK(std::abs(cross_ratio(0.5) - 0.30189515741880551) < 2e-15);
  CHECK(std::abs(mixed_ratio(0.5) - 1.23818511478391806) < 2e-15);
  CHECK(cross_ratio(0.0) == doctest::Approx(1.0 / 3.0));
  CHECK(mixed_ratio(0.0) == doctest::Approx(4.0 / 3.0));
  for (double x : {299.0, 301.0, 800.0, 1e6}) {
    CHECK(std::isfinite(g2(x, 1.0, 1.0)));
    CHECK(g2(x, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g1(x, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("gn_numeric examples") {
  const auto pair = pair_with(1.0);
  CHECK(gn_numeric(pair, 1, 0.0, 0.0) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(gn_numeric(pair, 2, 0.0, 0.0) == doctest::Approx(8.0).epsilon(1e-12));
  CHECK(gn_numeric(pair, 3, 0.0, 0.0) == doctest::Approx(32.0).epsilon(1e-12));
  CHECK(std::abs(gn_numeric(pair, 1, 0.0, kPi)) < 1e-12);
  CHECK(std::abs(gn_numeric(pair, 3, 0.0, kPi)) < 1e-12);
  CHECK_THROWS_AS(gn_numeric(pair, 0, 0.0, 0.0), ValidationError);
  CHECK_THROWS_AS(gn_numeric(InterferencePair{PulseModel{100.0}, 0.0, 0.0}, 1, 0.0, 0.0),
                  ValidationError);
}

TEST_CASE("closed forms agree with quadrature") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> tau(-800.0, 800.0);
  std::uniform_real_distribution<double> bdist(0.05, 1.0);
  for (int i = 0; i < 60; ++i) {
    const auto pair = pair_with(bdist(rng));
    const double t = tau(rng);
    const double n1 = gn_numeric(pair, 1, t, 0.0);
    const double n2 = gn_numeric(pair, 2, t, 0.0);
    CHECK(std::abs(n1 / g1_envelope(pair, t) - 1.0) < 1e-6);
    CHECK(std::abs(n2 / g2_envelope(pair, t) - 1.0) < 1e-6);
  }
}

TEST_CASE("correlation invariants") {
  SUBCASE("symmetric in tau when a = b") {
    for (double t : {13.0, 120.0, 333.0}) {
      for (int n : {1, 2, 3}) {
        const auto pair = pair_with(1.0);
        CHECK(std::abs(gn_numeric(pair, n, t, 0.3) - gn_numeric(pair, n, -t, 0.3)) < 1e-10);
      }
      CHECK(std::abs(g2_envelope(pair_with(0.4), t) - g2_envelope(pair_with(0.4), -t)) < 1e-12);
    }
  }

  SUBCASE("background far from zero delay") {
    const auto pair = pair_with(1.0);
    CHECK(std::abs(gn_numeric(pair, 1, 1000.0, 0.0) - 1.0) < 1e-2);
    CHECK(std::abs(gn_numeric(pair, 2, 1000.0, 0.0) - 1.0) < 1e-3);
    CHECK(std::abs(gn_numeric(pair, 3, 1000.0, 0.0) - 1.0) < 1e-3);
  }

  SUBCASE("invariant under a common scale of a and b") {
    for (double t : {0.0, 80.0, 250.0}) {
      for (int n : {1, 2, 3}) {
        const double base = gn_numeric(pair_with(0.6), n, t, 1.1);
        const double scaled = gn_numeric(pair_with(0.6 * 3.7, 100.0, 3.7), n, t, 1.1);
        CHECK(std::abs(base - scaled) < 1e-12 * base);
      }
      CHECK(std::abs(g2_envelope(pair_with(0.6), t) - g2_envelope(pair_with(2.22, 100.0, 3.7), t)) <
            1e-12);
    }
  }

  SUBCASE("peak law 2^(2n-1) holds for chirped pulses") {
    const InterferencePair chirped{PulseModel{100.0, 390.0, 1.0, 3000.0}, 1.0, 1.0};
    for (int n : {1, 2, 3}) {
      CHECK(gn_numeric(chirped, n, 0.0, 0.0) == doctest::Approx(std::pow(2.0, 2 * n - 1)).epsilon(1e-9));
    }
    CHECK(std::abs(gn_numeric(chirped, 2, 3000.0, 0.0) - 1.0) < 1e-3);
  }

  SUBCASE("first order is blind to spectral phase") {
    const InterferencePair chirped{PulseModel{100.0, 390.0, 1.0, 3000.0}, 1.0, 0.7};
    for (double t : {0.0, 90.0, 240.0}) {
      CHECK(gn_numeric(chirped, 1, t, 0.0) == doctest::Approx(g1_envelope(pair_with(0.7), t)).epsilon(1e-6));
    }
  }

  SUBCASE("chirp broadens the second-order envelope") {
    const InterferencePair chirped{PulseModel{100.0, 390.0, 1.0, 3000.0}, 1.0, 1.0};
    const auto delays = grid(-1200.0, 1200.0, 10.0);
    const auto trace = envelope_trace(chirped, 2, delays);
    CHECK(envelope_fwhm(trace) > analytic_envelope_fwhm(2, 1.0, 100.0) + 1.0);
  }
}

TEST_CASE("coarse quadrature is reported") {
  QuadratureOptions coarse;
  coarse.step = 4.0;
  CHECK_THROWS_AS(gn_numeric(pair_with(1.0), 2, 37.0, 0.0, coarse), GridTooCoarse);
}

TEST_CASE("fringe-resolved traces") {
  const auto pair = pair_with(1.0);
  const double period = 390.0 / kSpeedOfLight;
  CHECK(period == doctest::Approx(1.30).epsilon(0.002));

  SUBCASE("maxima sit on the upper envelope") {
    std::vector<double> at_maxima;
    for (int k = -200; k <= 200; k += 20) at_maxima.push_back(k * period);
    for (int n : {1, 2}) {
      const auto fringes = fringe_trace(pair, n, at_maxima);
      const auto upper = envelope_trace(pair, n, at_maxima);
      for (std::size_t i = 0; i < at_maxima.size(); ++i) {
        CHECK(std::abs(fringes.values[i] / upper.values[i] - 1.0) < 1e-3);
      }
    }
  }

  SUBCASE("first order swings down to zero at half a period") {
    const std::vector<double> delay{0.5 * period};
    CHECK(fringe_trace(pair, 1, delay).values[0] < 1e-3);
  }

  SUBCASE("second order minima stay non-negative") {
    const auto delays = grid(-300.0, 300.0, period / 8.0);
    const auto trace = fringe_trace(pair, 2, delays);
    for (double v : trace.values) CHECK(v >= 0.0);
    CHECK(trace.kind == TraceKind::FringeResolved);
  }

  SUBCASE("thread count does not change the result") {
    const auto delays = grid(-200.0, 200.0, 0.37);
    const auto one = fringe_trace(pair, 2, delays, 1);
    const auto three = fringe_trace(pair, 2, delays, 3);
    CHECK(one.values == three.values);
  }
}

TEST_CASE("visibility and its inverse") {
  CHECK(visibility(1.0, 1.0) == 1.0);
  CHECK(visibility(1.0, 0.4514) == doctest::Approx(0.75).epsilon(1e-4));
  CHECK(b_from_visibility(0.75) == doctest::Approx(kB75).epsilon(1e-13));
  CHECK(b_from_visibility(1.0) == 1.0);
  for (double v = 0.05; v <= 1.0; v += 0.05) {
    CHECK(visibility(1.0, b_from_visibility(v)) == doctest::Approx(v).epsilon(1e-13));
  }
  CHECK_THROWS_AS(b_from_visibility(1.2), ValidationError);
}

TEST_CASE("gamma factor") {
  // mpmath bisection on the closed form: 0.5895287 and 0.5824518
  CHECK(gamma_factor(1.0) == doctest::Approx(0.5895287).epsilon(1e-6));
  CHECK(gamma_factor(0.75) == doctest::Approx(0.5824518).epsilon(1e-6));
  CHECK(gamma_factor(1.0) == doctest::Approx(0.5895).epsilon(5e-4 / 0.5895));
  CHECK(gamma_factor(0.75) == doctest::Approx(0.582).epsilon(1e-3 / 0.582));
  double previous = gamma_factor(0.5);
  for (int i = 51; i <= 100; ++i) {
    const double g = gamma_factor(i / 100.0);
    CHECK(g > previous);
    previous = g;
  }
  CHECK_THROWS_AS(gamma_factor(0.0), ValidationError);
  CHECK_THROWS_AS(gamma_factor(1.01), ValidationError);
}

TEST_CASE("transform-limited duration from the g1 width") {
  CHECK(ft_limited_duration(311.3) == doctest::Approx(126.0).epsilon(1e-3));
  CHECK_THROWS_AS(ft_limited_duration(0.0), ValidationError);
  CHECK(kSechFwhmFactor / (2.0 * kG1HalfX) == doctest::Approx(kFtLimitFactor).epsilon(1e-4));
}

TEST_CASE("envelope widths") {
  const auto delays = grid(-1000.0, 1000.0, 1.0);
  const auto g1 = envelope_trace(pair_with(1.0), 1, delays);
  const auto g2 = envelope_trace(pair_with(1.0), 2, delays);
  CHECK(envelope_fwhm(g1) == doctest::Approx(2.0 * kG1HalfX * 100.0).epsilon(1e-4));
  CHECK(envelope_fwhm(g1) == doctest::Approx(435.5).epsilon(1e-3));
  // mpmath half-height x of g2 at V = 1: 1.495048
  CHECK(envelope_fwhm(g2) == doctest::Approx(299.0).epsilon(1e-3));
  CHECK(analytic_envelope_fwhm(2, 1.0, 100.0) == doctest::Approx(299.0096).epsilon(1e-6));
  CHECK(analytic_envelope_fwhm(1, 1.0, 100.0) == doctest::Approx(2.0 * kG1HalfX * 100.0).epsilon(1e-11));
  CHECK_THROWS_AS(analytic_envelope_fwhm(2, 0.0, 100.0), NoPeak);

  SUBCASE("flat trace has no peak") {
    CorrelationTrace flat{1, grid(-100.0, 100.0, 10.0), {}};
    flat.values.assign(flat.delays_fs.size(), 1.0);
    CHECK_THROWS_AS(envelope_fwhm(flat), NoPeak);
  }

  SUBCASE("scan narrower than the envelope") {
    const auto narrow = envelope_trace(pair_with(1.0), 1, grid(-100.0, 100.0, 5.0));
    CHECK_THROWS_AS(envelope_fwhm(narrow), FlankNotBracketed);
  }
}

TEST_CASE("trace validation") {
  CorrelationTrace t{2, {0.0, 1.0, 1.0}, {1.0, 2.0, 3.0}};
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t.delays_fs = {0.0, 1.0, 2.0};
  CHECK_NOTHROW(t.validate());
  t.errors = std::vector<double>{1.0, 0.0, 1.0};
  CHECK_THROWS_AS(t.validate(), ValidationError);
  t.errors.reset();
  t.values.pop_back();
  CHECK_THROWS_AS(t.validate(), ValidationError);
}
