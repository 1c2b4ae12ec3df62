#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>

namespace uvac::cli {

// Stable process exit codes.
enum ExitCode : int {
  kOk = 0,
  kVerificationFailed = 1,
  kValidation = 2,
  kIo = 3,
  kNumerical = 4,
};

struct SimulateArgs {
  std::filesystem::path config;
  std::filesystem::path output_dir;
  std::optional<unsigned> threads;
};

struct FitArgs {
  std::filesystem::path trace;
  int order = 2;
  double center_wavelength_nm = 390.0;
  std::optional<std::filesystem::path> report;  // default <trace stem>_fit.txt
  std::optional<std::filesystem::path> plot;    // default <trace stem>_fit_plot.csv
};

struct GammaArgs {
  double v_min = 0.5;
  double v_max = 1.0;
  double step = 0.05;
};

struct SpectrumArgs {
  std::filesystem::path trace;
  double center_wavelength_nm = 390.0;
  std::filesystem::path output;
  std::optional<std::filesystem::path> report;  // default <output stem>_report.txt
};

struct VerifyArgs {
  bool corrupt_gamma = false;
  unsigned threads = 0;
};

// Writes counts_order<n>.csv for each order plus metadata.txt into output_dir.
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);
int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err);
int cmd_gamma(const GammaArgs& args, std::ostream& out, std::ostream& err);
int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err);
int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& err);

// Full command-line entry point (subcommand parsing included).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace uvac::cli
