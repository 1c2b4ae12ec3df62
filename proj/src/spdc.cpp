#include "uvac/spdc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <random>
#include <thread>

#include "uvac/error.hpp"

namespace uvac {

namespace {

// SplitMix64 finaliser.
std::uint64_t mix(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

}  // namespace

void SpdcSource::validate() const {
  if (!(gain >= 0.0)) throw ValidationError("source: gain must be non-negative");
  if (!(efficiency > 0.0) || efficiency > 1.0) {
    throw ValidationError("source: efficiency must lie in (0, 1]");
  }
  if (num_modes < 1) throw ValidationError("source: num_modes must be >= 1");
  if (!(rep_rate_hz > 0.0)) throw ValidationError("source: rep_rate must be positive");
}

double acceptance(int order, int num_modes) {
  if (order < 1 || num_modes < 1) {
    throw ValidationError("acceptance: order and num_modes must be >= 1");
  }
  if (order > num_modes) return 0.0;
  double per_polarisation = 1.0;
  for (int k = 0; k < order; ++k) {
    per_polarisation *= static_cast<double>(num_modes - k) / num_modes;
  }
  return per_polarisation * per_polarisation;
}

double coincidence_rate(const SpdcSource& source, const InterferencePair& pair, int order,
                        double tau_fs) {
  source.validate();
  if (source.gain * source.gain >= 0.1) {
    throw GainTooLarge("coincidence_rate: gain^2 must stay below 0.1 (low pumping regime)");
  }
  InterferencePair unit = pair;
  unit.pulse.amplitude = 1.0;
  const double numerator = correlation_integrals(unit, order, tau_fs, 0.0).numerator;
  const double nf = factorial(order);
  return source.rep_rate_hz * std::pow(source.gain, 2 * order) / (nf * nf) *
         std::pow(source.efficiency, 2 * order) * acceptance(order, source.num_modes) * numerator;
}

std::int64_t poisson_draw(std::uint64_t seed, std::uint64_t index, int order, double mean) {
  if (!(mean >= 0.0) || !std::isfinite(mean)) {
    throw ValidationError("poisson_draw: mean must be finite and non-negative");
  }
  if (mean == 0.0) return 0;
  const std::uint64_t key =
      mix(mix(mix(seed) ^ index) ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(order)));
  std::mt19937_64 engine(key);
  std::poisson_distribution<std::int64_t> dist(mean);
  return dist(engine);
}

std::vector<CountRecord> simulate_scan(const SpdcSource& source, const InterferencePair& pair,
                                       std::span<const double> delays_fs,
                                       std::span<const int> orders, double exposure_s,
                                       std::uint64_t seed, unsigned threads) {
  source.validate();
  pair.pulse.validate();
  if (!(exposure_s > 0.0)) throw ValidationError("simulate_scan: exposure must be positive");
  if (orders.empty()) throw ValidationError("simulate_scan: no orders requested");
  for (std::size_t k = 1; k < delays_fs.size(); ++k) {
    if (!(delays_fs[k] > delays_fs[k - 1])) {
      throw ValidationError("simulate_scan: delays must be strictly increasing");
    }
  }

  const std::size_t n_delays = delays_fs.size();
  std::vector<CountRecord> records(orders.size() * n_delays);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      const int order = orders[i / n_delays];
      const std::size_t k = i % n_delays;
      const double mean = coincidence_rate(source, pair, order, delays_fs[k]) * exposure_s;
      records[i] = {delays_fs[k], order, poisson_draw(seed, k, order, mean), exposure_s};
    }
  };

  const std::size_t total = records.size();
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(total, 1)));
  if (threads <= 1) {
    work(0, total);
    return records;
  }
  std::vector<std::exception_ptr> failures(threads);
  {
    std::vector<std::jthread> pool;
    const std::size_t chunk = (total + threads - 1) / threads;
    for (unsigned w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        try {
          work(std::min(total, w * chunk), std::min(total, (w + 1) * chunk));
        } catch (...) {
          failures[w] = std::current_exception();
        }
      });
    }
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return records;
}

double poisson_sigma(const CountRecord& record) {
  return std::max(1.0, std::sqrt(static_cast<double>(record.counts)));
}

CorrelationTrace counts_to_trace(std::span<const CountRecord> records, int order) {
  std::vector<CountRecord> selected;
  for (const auto& r : records) {
    if (r.order == order) selected.push_back(r);
  }
  if (selected.empty()) throw ValidationError("counts_to_trace: no records of the requested order");
  std::sort(selected.begin(), selected.end(),
            [](const CountRecord& l, const CountRecord& r) { return l.tau_fs < r.tau_fs; });

  CorrelationTrace trace;
  trace.order = order;
  trace.kind = TraceKind::EnvelopeUpper;
  trace.errors.emplace();
  for (const auto& r : selected) {
    trace.delays_fs.push_back(r.tau_fs);
    trace.values.push_back(static_cast<double>(r.counts));
    trace.errors->push_back(poisson_sigma(r));
  }
  trace.exposure_s = selected.front().exposure_s;
  trace.validate();
  return trace;
}

}  // namespace uvac
