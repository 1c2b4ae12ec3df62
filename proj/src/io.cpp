#include "uvac/io.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "uvac/error.hpp"

namespace uvac::io {

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

double parse_double(std::string_view field, std::size_t line, const char* column) {
  double value = 0.0;
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  if (ec != std::errc() || ptr != end || field.empty() || !std::isfinite(value)) {
    throw ParseError(line, fmt::format("column '{}': cannot parse '{}' as a number", column, field));
  }
  return value;
}

}  // namespace

TraceTable read_trace_csv(std::istream& in) {
  TraceTable table;
  bool have_header = false;
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto text = trim(raw);
    if (text.empty() || text.front() == '#') continue;
    const auto fields = split_fields(text);
    if (!have_header) {
      if (fields.size() == 3 && fields[0] == "tau_fs" && fields[1] == "counts" &&
          fields[2] == "exposure_s") {
        table.format = TraceFormat::Counts;
      } else if (fields.size() == 3 && fields[0] == "tau_fs" && fields[1] == "value" &&
                 fields[2] == "sigma") {
        table.format = TraceFormat::Analog;
      } else {
        throw ParseError(line, "expected header 'tau_fs,counts,exposure_s' or 'tau_fs,value,sigma'");
      }
      have_header = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(line, fmt::format("expected 3 fields, found {}", fields.size()));
    }
    table.tau_fs.push_back(parse_double(fields[0], line, "tau_fs"));
    if (table.format == TraceFormat::Counts) {
      const double counts = parse_double(fields[1], line, "counts");
      if (counts < 0.0 || counts != std::floor(counts)) {
        throw ParseError(line, "counts must be a non-negative integer");
      }
      const double exposure = parse_double(fields[2], line, "exposure_s");
      if (!(exposure > 0.0)) throw ParseError(line, "exposure_s must be positive");
      table.values.push_back(counts);
      table.exposure_s.push_back(exposure);
    } else {
      table.values.push_back(parse_double(fields[1], line, "value"));
      const double sigma = parse_double(fields[2], line, "sigma");
      if (!(sigma > 0.0)) throw ParseError(line, "sigma must be positive");
      table.sigma.push_back(sigma);
    }
  }
  if (!have_header) throw ParseError(line + 1, "missing header row");
  return table;
}

TraceTable read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  return read_trace_csv(in);
}

CorrelationTrace to_trace(const TraceTable& table, int order) {
  const std::size_t n = table.tau_fs.size();
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(),
            [&](std::size_t l, std::size_t r) { return table.tau_fs[l] < table.tau_fs[r]; });

  CorrelationTrace trace;
  trace.order = order;
  trace.kind = TraceKind::EnvelopeUpper;
  trace.errors.emplace();
  for (std::size_t i : idx) {
    trace.delays_fs.push_back(table.tau_fs[i]);
    trace.values.push_back(table.values[i]);
    if (table.format == TraceFormat::Counts) {
      trace.errors->push_back(std::max(1.0, std::sqrt(table.values[i])));
    } else {
      trace.errors->push_back(table.sigma[i]);
    }
  }
  if (table.format == TraceFormat::Counts && n > 0) trace.exposure_s = table.exposure_s.front();
  trace.validate();
  return trace;
}

std::string format_number(double value) { return fmt::format("{}", value); }

void write_counts_csv(std::ostream& out, std::span<const CountRecord> records) {
  out << "tau_fs,counts,exposure_s\n";
  for (const auto& r : records) {
    out << format_number(r.tau_fs) << ',' << r.counts << ',' << format_number(r.exposure_s) << '\n';
  }
}

void write_analog_csv(std::ostream& out, const CorrelationTrace& trace) {
  if (!trace.errors) throw ValidationError("write_analog_csv: trace has no errors");
  out << "tau_fs,value,sigma\n";
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    out << format_number(trace.delays_fs[k]) << ',' << format_number(trace.values[k]) << ','
        << format_number((*trace.errors)[k]) << '\n';
  }
}

void write_plot_csv(std::ostream& out, const CorrelationTrace& trace,
                    std::span<const double> model) {
  out << "tau_fs,data,sigma,model\n";
  for (std::size_t k = 0; k < trace.values.size(); ++k) {
    const double sigma = trace.errors ? (*trace.errors)[k] : 0.0;
    out << format_number(trace.delays_fs[k]) << ',' << format_number(trace.values[k]) << ','
        << format_number(sigma) << ',' << format_number(model[k]) << '\n';
  }
}

void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum) {
  out << "wavelength_nm,density\n";
  for (std::size_t k = 0; k < spectrum.density.size(); ++k) {
    out << format_number(spectrum.wavelengths_nm[k]) << ',' << format_number(spectrum.density[k])
        << '\n';
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << content;
  out.flush();
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

}  // namespace uvac::io
