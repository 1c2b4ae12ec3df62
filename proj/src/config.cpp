#include "uvac/config.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <set>

#include "uvac/constants.hpp"
#include "uvac/io.hpp"

namespace uvac {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(key, fmt::format("cannot parse '{}'", text));
  }
  if constexpr (std::is_floating_point_v<T>) {
    if (!std::isfinite(value)) throw ConfigError(key, "value must be finite");
  }
  return value;
}

std::vector<int> parse_orders(const std::string& key, const std::string& text) {
  std::vector<int> orders;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto comma = text.find(',', start);
    const std::string item =
        trim(std::string_view(text).substr(start, comma == std::string::npos ? std::string::npos
                                                                              : comma - start));
    if (!item.empty()) orders.push_back(parse_number<int>(key, item));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return orders;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "delta_t_fs", "fwhm_fs",     "center_wavelength_nm", "gdd_fs2",    "b",
      "visibility", "gain",        "efficiency",           "num_modes",  "rep_rate_hz",
      "tau_min_fs", "tau_max_fs",  "tau_step_fs",          "exposure_s", "orders",
      "seed",       "threads"};
  return keys;
}

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::set<std::string> seen;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::string text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto eq = text.find('=');
    if (eq == std::string::npos) throw ParseError(line, "expected 'key = value'");
    std::string key = trim(std::string_view(text).substr(0, eq));
    std::string value = trim(std::string_view(text).substr(eq + 1));
    if (key.empty()) throw ParseError(line, "empty key");
    if (!seen.insert(key).second) throw ParseError(line, "duplicate key '" + key + "'");
    kv.emplace_back(std::move(key), std::move(value));
  }
  return kv;
}

std::vector<double> RunConfig::delays() const {
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double tau = tau_min_fs + static_cast<double>(k) * tau_step_fs;
    if (tau > tau_max_fs + 1e-9 * tau_step_fs) break;
    out.push_back(tau);
  }
  return out;
}

void RunConfig::validate() const {
  try {
    pulse.validate();
  } catch (const ValidationError& e) {
    throw ConfigError("delta_t_fs", e.what());
  }
  if (!(b >= 0.0)) throw ConfigError("b", "must be non-negative");
  if (!(source.gain >= 0.0)) throw ConfigError("gain", "must be non-negative");
  if (source.gain * source.gain >= 0.1) {
    throw ConfigError("gain", "gain^2 must stay below 0.1 (low pumping regime)");
  }
  if (!(source.efficiency > 0.0) || source.efficiency > 1.0) {
    throw ConfigError("efficiency", "must lie in (0, 1]");
  }
  if (source.num_modes < 1) throw ConfigError("num_modes", "must be >= 1");
  if (!(source.rep_rate_hz > 0.0)) throw ConfigError("rep_rate_hz", "must be positive");
  if (!(tau_min_fs < tau_max_fs)) throw ConfigError("tau_min_fs", "must be below tau_max_fs");
  if (!(tau_step_fs > 0.0)) throw ConfigError("tau_step_fs", "must be positive");
  if (!(exposure_s > 0.0)) throw ConfigError("exposure_s", "must be positive");
  if (orders.empty()) throw ConfigError("orders", "at least one order is required");
  std::set<int> unique;
  for (int n : orders) {
    if (n < 1 || n > 3) throw ConfigError("orders", fmt::format("order {} not in {{1,2,3}}", n));
    if (!unique.insert(n).second) throw ConfigError("orders", fmt::format("order {} repeated", n));
  }
}

RunConfig parse_run_config(const KeyValues& kv) {
  std::map<std::string, std::string> values;
  for (const auto& [key, value] : kv) {
    if (!known_keys().contains(key)) throw ConfigError(key, "unknown key");
    values[key] = value;
  }
  auto get = [&](const std::string& key) -> std::optional<double> {
    const auto it = values.find(key);
    if (it == values.end()) return std::nullopt;
    return parse_number<double>(key, it->second);
  };

  RunConfig cfg;
  const auto delta_t = get("delta_t_fs");
  const auto fwhm = get("fwhm_fs");
  if (delta_t.has_value() == fwhm.has_value()) {
    throw ConfigError(delta_t ? "fwhm_fs" : "delta_t_fs",
                      "exactly one of delta_t_fs and fwhm_fs must be given");
  }
  if (fwhm && !(*fwhm > 0.0)) throw ConfigError("fwhm_fs", "must be positive");
  if (delta_t && !(*delta_t > 0.0)) throw ConfigError("delta_t_fs", "must be positive");
  cfg.pulse.delta_t_fs = delta_t ? *delta_t : *fwhm / kSechFwhmFactor;
  cfg.pulse.center_wavelength_nm = get("center_wavelength_nm").value_or(390.0);
  if (!(cfg.pulse.center_wavelength_nm > 0.0)) {
    throw ConfigError("center_wavelength_nm", "must be positive");
  }
  cfg.pulse.gdd_fs2 = get("gdd_fs2").value_or(0.0);

  const auto b = get("b");
  const auto vis = get("visibility");
  if (b.has_value() == vis.has_value()) {
    throw ConfigError(b ? "visibility" : "b", "exactly one of b and visibility must be given");
  }
  if (vis) {
    if (!(*vis > 0.0) || *vis > 1.0) throw ConfigError("visibility", "must lie in (0, 1]");
    cfg.b = b_from_visibility(*vis);
  } else {
    cfg.b = *b;
  }

  cfg.source.gain = get("gain").value_or(cfg.source.gain);
  cfg.source.efficiency = get("efficiency").value_or(cfg.source.efficiency);
  if (values.contains("num_modes")) {
    cfg.source.num_modes = parse_number<int>("num_modes", values["num_modes"]);
  }
  cfg.source.rep_rate_hz = get("rep_rate_hz").value_or(cfg.source.rep_rate_hz);

  const double span = 6.0 * cfg.pulse.delta_t_fs;
  cfg.tau_min_fs = get("tau_min_fs").value_or(-span);
  cfg.tau_max_fs = get("tau_max_fs").value_or(span);
  cfg.tau_step_fs = get("tau_step_fs").value_or((cfg.tau_max_fs - cfg.tau_min_fs) / 119.0);
  cfg.exposure_s = get("exposure_s").value_or(8.0);

  if (values.contains("orders")) cfg.orders = parse_orders("orders", values["orders"]);
  if (values.contains("seed")) cfg.seed = parse_number<std::uint64_t>("seed", values["seed"]);
  if (values.contains("threads")) {
    cfg.threads = parse_number<unsigned>("threads", values["threads"]);
  }
  cfg.validate();
  return cfg;
}

RunConfig read_run_config(std::istream& in) { return parse_run_config(parse_key_values(in)); }

std::string to_key_value_text(const RunConfig& c) {
  using io::format_number;
  std::string out = "# resolved configuration\n";
  auto line = [&out](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  line("delta_t_fs", format_number(c.pulse.delta_t_fs));
  out += fmt::format("# fwhm_fs = {}\n", format_number(kSechFwhmFactor * c.pulse.delta_t_fs));
  line("center_wavelength_nm", format_number(c.pulse.center_wavelength_nm));
  line("gdd_fs2", format_number(c.pulse.gdd_fs2));
  line("b", format_number(c.b));
  out += fmt::format("# visibility = {}\n", format_number(2.0 * c.b / (1.0 + c.b * c.b)));
  line("gain", format_number(c.source.gain));
  line("efficiency", format_number(c.source.efficiency));
  line("num_modes", std::to_string(c.source.num_modes));
  line("rep_rate_hz", format_number(c.source.rep_rate_hz));
  line("tau_min_fs", format_number(c.tau_min_fs));
  line("tau_max_fs", format_number(c.tau_max_fs));
  line("tau_step_fs", format_number(c.tau_step_fs));
  line("exposure_s", format_number(c.exposure_s));
  std::string orders;
  for (std::size_t i = 0; i < c.orders.size(); ++i) {
    orders += (i ? "," : "") + std::to_string(c.orders[i]);
  }
  line("orders", orders);
  line("seed", std::to_string(c.seed));
  line("threads", std::to_string(c.threads));
  return out;
}

}  // namespace uvac
