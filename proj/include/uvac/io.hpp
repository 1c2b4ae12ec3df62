#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "uvac/correlator.hpp"
#include "uvac/pulse.hpp"
#include "uvac/spdc.hpp"

namespace uvac::io {

// Column layouts. Both have a mandatory header row; lines starting with '#'
// and blank lines are ignored.
//   counts: tau_fs,counts,exposure_s   (raw coincidence counts)
//   analog: tau_fs,value,sigma         (e.g. photodiode levels)
enum class TraceFormat { Counts, Analog };

struct TraceTable {
  TraceFormat format = TraceFormat::Counts;
  std::vector<double> tau_fs;
  std::vector<double> values;
  std::vector<double> sigma;       // analog only
  std::vector<double> exposure_s;  // counts only
};

TraceTable read_trace_csv(std::istream& in);
TraceTable read_trace_csv(const std::filesystem::path& path);

// Sorted by delay; counts get Poisson errors, analog rows keep their sigma.
CorrelationTrace to_trace(const TraceTable& table, int order);

void write_counts_csv(std::ostream& out, std::span<const CountRecord> records);
void write_analog_csv(std::ostream& out, const CorrelationTrace& trace);
void write_plot_csv(std::ostream& out, const CorrelationTrace& trace,
                    std::span<const double> model);
void write_spectrum_csv(std::ostream& out, const Spectrum& spectrum);

// Shortest decimal form that reads back to the same double.
std::string format_number(double value);

// Writes the whole file or throws IoError.
void write_text_file(const std::filesystem::path& path, const std::string& content);

}  // namespace uvac::io
