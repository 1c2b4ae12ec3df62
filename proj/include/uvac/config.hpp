#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "uvac/correlator.hpp"
#include "uvac/error.hpp"
#include "uvac/spdc.hpp"

namespace uvac {

// Configuration problem attributed to a single key.
class ConfigError : public ValidationError {
 public:
  ConfigError(std::string key, const std::string& what)
      : ValidationError("config key '" + key + "': " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

// Flat "key = value" text; '#' starts a comment line. Keys keep file order.
using KeyValues = std::vector<std::pair<std::string, std::string>>;
KeyValues parse_key_values(std::istream& in);

/// Resolved simulation settings. Recognised keys:
///
///   delta_t_fs | fwhm_fs      pulse scale or intensity FWHM (exactly one)
///   center_wavelength_nm      default 390
///   gdd_fs2                   default 0
///   b | visibility            delayed-arm amplitude or visibility (exactly one)
///   gain, efficiency, num_modes, rep_rate_hz
///   tau_min_fs, tau_max_fs, tau_step_fs
///                             default +-6 delta_t with 120 points
///   exposure_s                default 8
///   orders                    comma list from {1,2,3}
///   seed                      unsigned 64-bit
///   threads                   0 = hardware concurrency
struct RunConfig {
  PulseModel pulse;
  double b = 1.0;
  SpdcSource source{0.12, 0.3, 6, 80e6};
  double tau_min_fs = -600.0;
  double tau_max_fs = 600.0;
  double tau_step_fs = 1200.0 / 119.0;
  double exposure_s = 8.0;
  std::vector<int> orders{1, 2, 3};
  std::uint64_t seed = 1;
  unsigned threads = 0;

  InterferencePair pair() const { return {pulse, 1.0, b}; }
  std::vector<double> delays() const;
  void validate() const;
};

RunConfig parse_run_config(const KeyValues& kv);
RunConfig read_run_config(std::istream& in);

/// Re-loadable text of a resolved configuration (delta_t_fs and b form);
/// derived FWHM and visibility are included as comments.
std::string to_key_value_text(const RunConfig& config);

}  // namespace uvac
