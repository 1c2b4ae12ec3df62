#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "uvac/correlator.hpp"

namespace uvac {

/// Emission and detection parameters of the down-conversion source.
struct SpdcSource {
  double gain = 0.1;          // alpha * E0, per pulse, dimensionless
  double efficiency = 1.0;    // per-photon detection efficiency
  int num_modes = 6;          // spatial output modes, each with a polarisation analyser
  double rep_rate_hz = 80e6;

  void validate() const;
};

/// One coincidence count at one delay and order.
struct CountRecord {
  double tau_fs = 0.0;
  int order = 1;
  std::int64_t counts = 0;
  double exposure_s = 1.0;
};

/// Probability that n H photons and n V photons, each routed uniformly over
/// num_modes modes, land in distinct modes within each polarisation:
/// [M! / ((M - n)! M^n)]^2. Zero when n > M.
double acceptance(int order, int num_modes);

/// 2n-fold coincidence rate in Hz at zero interferometer phase:
///   rep_rate * gain^2n / (n!)^2 * eta^2n * acceptance * numerator(tau),
/// with the numerator integral in units of delta_t on a peak-normalised
/// envelope. Throws GainTooLarge when gain^2 >= 0.1.
double coincidence_rate(const SpdcSource& source, const InterferencePair& pair, int order,
                        double tau_fs);

/// Poisson variate with the given mean, drawn from a generator keyed only by
/// (seed, index, order).
std::int64_t poisson_draw(std::uint64_t seed, std::uint64_t index, int order, double mean);

/// Poisson counts for every (delay, order). Records are ordered by order,
/// then delay. Identical output for any thread count (0 = hardware).
std::vector<CountRecord> simulate_scan(const SpdcSource& source, const InterferencePair& pair,
                                       std::span<const double> delays_fs,
                                       std::span<const int> orders, double exposure_s,
                                       std::uint64_t seed, unsigned threads = 1);

/// max(1, sqrt(counts)).
double poisson_sigma(const CountRecord& record);

/// Raw counts of one order as a trace with Poisson errors, sorted by delay.
CorrelationTrace counts_to_trace(std::span<const CountRecord> records, int order);

}  // namespace uvac
