#include "uvac/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "uvac/acceptance.hpp"
#include "uvac/analysis.hpp"
#include "uvac/config.hpp"
#include "uvac/constants.hpp"
#include "uvac/error.hpp"
#include "uvac/io.hpp"
#include "uvac/numeric.hpp"
#include "uvac/spdc.hpp"

namespace uvac::cli {

namespace fs = std::filesystem;

namespace {

template <class F>
int guarded(std::ostream& err, F&& body) {
  try {
    return body();
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kIo;
  } catch (const NumericalError& e) {
    err << "error: numerical failure: " << e.what() << '\n';
    return kNumerical;
  }
}

fs::path sibling(const fs::path& base, const std::string& suffix) {
  return base.parent_path() / (base.stem().string() + suffix);
}

class Report {
 public:
  void add(std::string_view key, const std::string& value) {
    text_ += fmt::format("{} = {}\n", key, value);
  }
  void add(std::string_view key, double value) { add(key, io::format_number(value)); }
  void add(std::string_view key, int value) { add(key, std::to_string(value)); }
  const std::string& text() const { return text_; }

 private:
  std::string text_;
};

// Background level of a trace from its outermost tenth.
double edge_background(const CorrelationTrace& trace) {
  const std::size_t m = trace.values.size();
  const std::size_t take = std::max<std::size_t>(1, m / 20);
  double sum = 0.0;
  for (std::size_t i = 0; i < take; ++i) sum += trace.values[i] + trace.values[m - 1 - i];
  return sum / static_cast<double>(2 * take);
}

}  // namespace

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    std::ifstream in(args.config);
    if (!in) throw IoError("cannot open config '" + args.config.string() + "'");
    RunConfig config = read_run_config(in);
    if (args.threads) config.threads = *args.threads;

    const auto delays = config.delays();
    const auto records = simulate_scan(config.source, config.pair(), delays, config.orders,
                                       config.exposure_s, config.seed, config.threads);

    fs::create_directories(args.output_dir);
    for (int order : config.orders) {
      std::vector<CountRecord> selected;
      std::copy_if(records.begin(), records.end(), std::back_inserter(selected),
                   [order](const CountRecord& r) { return r.order == order; });
      std::ostringstream csv;
      io::write_counts_csv(csv, selected);
      const fs::path path = args.output_dir / fmt::format("counts_order{}.csv", order);
      io::write_text_file(path, csv.str());
      out << "wrote " << path.string() << '\n';
    }
    const fs::path meta = args.output_dir / "metadata.txt";
    io::write_text_file(meta, to_key_value_text(config));
    out << "wrote " << meta.string() << '\n';
    return static_cast<int>(kOk);
  });
}

int cmd_fit(const FitArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (args.order != 1 && args.order != 2) {
      throw ValidationError("--order must be 1 or 2 (closed-form envelopes)");
    }
    const auto table = io::read_trace_csv(args.trace);
    const CorrelationTrace trace = io::to_trace(table, args.order);
    const FitResult fit = fit_envelope(trace, args.order);

    Report r;
    r.add("trace_file", args.trace.string());
    r.add("data_kind", table.format == io::TraceFormat::Counts ? std::string("counts")
                                                               : std::string("analog"));
    r.add("order", args.order);
    r.add("center_wavelength_nm", args.center_wavelength_nm);
    r.add("points", static_cast<int>(trace.values.size()));
    r.add("delta_t_fs", fit.delta_t_fs.value);
    r.add("delta_t_fs_error", fit.delta_t_fs.error);
    r.add("b", fit.b.value);
    r.add("b_error", fit.b.error);
    r.add("scale", fit.scale.value);
    r.add("scale_error", fit.scale.error);
    r.add("visibility", fit.derived.visibility.value);
    r.add("visibility_error", fit.derived.visibility.error);
    r.add("peak_to_background", fit.derived.peak_to_background);
    r.add("trace_fwhm_fs", fit.derived.trace_fwhm_fs.value);
    r.add("trace_fwhm_fs_error", fit.derived.trace_fwhm_fs.error);
    r.add("pulse_fwhm_fs", fit.derived.pulse_fwhm_fs.value);
    r.add("pulse_fwhm_fs_error", fit.derived.pulse_fwhm_fs.error);
    r.add("conversion", fit.derived.conversion);
    r.add("conversion_factor", fit.derived.gamma);
    r.add("chi2", fit.chi2);
    r.add("dof", fit.dof);
    r.add("chi2_reduced", fit.chi2_reduced);
    r.add("iterations", fit.iterations);

    const fs::path report = args.report.value_or(sibling(args.trace, "_fit.txt"));
    const fs::path plot = args.plot.value_or(sibling(args.trace, "_fit_plot.csv"));
    io::write_text_file(report, r.text());

    std::vector<double> model;
    for (double tau : trace.delays_fs) model.push_back(envelope_model(args.order, tau, fit.params()));
    std::ostringstream csv;
    io::write_plot_csv(csv, trace, model);
    io::write_text_file(plot, csv.str());

    out << r.text();
    return static_cast<int>(kOk);
  });
}

int cmd_gamma(const GammaArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (!(args.v_min > 0.0) || !(args.v_min <= args.v_max) || args.v_max > 1.0) {
      throw ValidationError("visibility range must satisfy 0 < v_min <= v_max <= 1");
    }
    if (!(args.step > 0.0)) throw ValidationError("step must be positive");
    const auto rows =
        static_cast<std::size_t>(std::floor((args.v_max - args.v_min) / args.step + 1e-9)) + 1;
    std::string text = "visibility,gamma\n";
    for (std::size_t i = 0; i < rows; ++i) {
      const double v = std::min(args.v_min + static_cast<double>(i) * args.step, args.v_max);
      text += fmt::format("{:.6g},{:.6f}\n", v, gamma_factor(v));
    }
    out << text;
    return static_cast<int>(kOk);
  });
}

int cmd_spectrum(const SpectrumArgs& args, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto table = io::read_trace_csv(args.trace);
    CorrelationTrace trace = io::to_trace(table, 1);
    if (!numeric::is_uniform_grid(trace.delays_fs)) {
      throw NonUniformGrid("spectrum: delay grid is not uniform");
    }

    std::string normalisation = "g1_fit_scale";
    double background = 0.0;
    try {
      background = fit_g1(trace).scale.value;
    } catch (const NumericalError&) {
      normalisation = "edge_mean";
      background = edge_background(trace);
    }
    if (!(background > 0.0)) throw DegenerateData("spectrum: trace background is zero");
    for (auto& v : trace.values) v /= background;
    for (auto& s : *trace.errors) s /= background;

    const RecoveredSpectrum rec = spectrum_from_g1(trace, args.center_wavelength_nm);
    std::ostringstream csv;
    io::write_spectrum_csv(csv, rec.spectrum);
    io::write_text_file(args.output, csv.str());

    Report r;
    r.add("trace_file", args.trace.string());
    r.add("center_wavelength_nm", args.center_wavelength_nm);
    r.add("normalisation", normalisation);
    r.add("background", background);
    r.add("zero_spectrum", std::string(rec.is_zero ? "true" : "false"));
    r.add("edges_decayed", std::string(rec.edges_decayed ? "true" : "false"));
    r.add("edge_fraction", rec.edge_fraction);
    if (rec.is_zero) {
      err << "warning: trace carries no signal above the background; spectrum is zero\n";
    } else {
      if (!rec.edges_decayed) {
        err << fmt::format("warning: scan edges hold {:.1f}% of the peak excess; the spectrum "
                           "may show truncation ripple\n",
                           100.0 * rec.edge_fraction);
      }
      r.add("delta_lambda_fwhm_nm", spectrum_fwhm_nm(rec.spectrum));
      const auto sech = fit_spectrum_sech(rec.spectrum, args.center_wavelength_nm);
      r.add("sech_fit_delta_t_fs", sech.delta_t_fs);
      r.add("sech_fit_center_nm", sech.center_wavelength_nm);
      r.add("sech_fit_fwhm_nm", sech.fwhm_nm);
      r.add("ft_limited_fwhm_fs", kSechFwhmFactor * sech.delta_t_fs);
    }
    const fs::path report = args.report.value_or(sibling(args.output, "_report.txt"));
    io::write_text_file(report, r.text());
    out << r.text();
    return static_cast<int>(kOk);
  });
}

int cmd_verify(const VerifyArgs& args, std::ostream& out, std::ostream& /*err*/) {
  criteria::Options options;
  options.threads = args.threads;
  if (args.corrupt_gamma) options.gamma_bias = 0.01;
  const auto outcomes = criteria::run_all(options);
  std::size_t passed = 0;
  for (const auto& o : outcomes) {
    out << criteria::format_line(o) << '\n';
    if (o.passed) ++passed;
  }
  out << fmt::format("{}/{} criteria passed\n", passed, outcomes.size());
  return passed == outcomes.size() ? kOk : kVerificationFailed;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"uvac: SPDC-based interferometric autocorrelation toolkit"};
  app.require_subcommand(1);

  SimulateArgs sim;
  unsigned sim_threads = 0;
  auto* simulate = app.add_subcommand("simulate", "Generate Poisson coincidence-count traces");
  simulate->add_option("config", sim.config, "Key-value configuration file")->required();
  simulate->add_option("output", sim.output_dir, "Output directory")->required();
  auto* threads_opt = simulate->add_option("--threads", sim_threads, "Worker threads (0 = all)");

  FitArgs fit;
  fs::path fit_report, fit_plot;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a g1 or g2 envelope trace");
  fit_cmd->add_option("trace", fit.trace, "Trace CSV")->required();
  fit_cmd->add_option("--order", fit.order, "Correlation order (1 or 2)")->required();
  fit_cmd->add_option("--wavelength", fit.center_wavelength_nm, "Center wavelength in nm");
  auto* report_opt = fit_cmd->add_option("--report", fit_report, "Report path");
  auto* plot_opt = fit_cmd->add_option("--plot", fit_plot, "Plot-data CSV path");

  GammaArgs gamma;
  auto* gamma_cmd = app.add_subcommand("gamma", "Tabulate gamma(V) as CSV");
  gamma_cmd->add_option("v_min", gamma.v_min, "Lowest visibility")->required();
  gamma_cmd->add_option("v_max", gamma.v_max, "Highest visibility")->required();
  gamma_cmd->add_option("step", gamma.step, "Visibility step")->required();

  SpectrumArgs spec;
  fs::path spec_report;
  auto* spectrum = app.add_subcommand("spectrum", "Recover the spectrum from a g1 trace");
  spectrum->add_option("trace", spec.trace, "Order-1 trace CSV")->required();
  spectrum->add_option("output", spec.output, "Spectrum CSV path")->required();
  spectrum->add_option("--wavelength", spec.center_wavelength_nm, "Center wavelength in nm");
  auto* spec_report_opt = spectrum->add_option("--report", spec_report, "Report path");

  VerifyArgs verify;
  auto* verify_cmd = app.add_subcommand("verify", "Run the acceptance suite");
  verify_cmd->add_option("--threads", verify.threads, "Worker threads (0 = all)");
  verify_cmd->add_flag("--corrupt-gamma", verify.corrupt_gamma, "Test hook: bias gamma in A1")
      ->group("");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? static_cast<int>(kOk) : static_cast<int>(kValidation);
  }

  if (*simulate) {
    if (threads_opt->count() > 0) sim.threads = sim_threads;
    return cmd_simulate(sim, out, err);
  }
  if (*fit_cmd) {
    if (report_opt->count() > 0) fit.report = fit_report;
    if (plot_opt->count() > 0) fit.plot = fit_plot;
    return cmd_fit(fit, out, err);
  }
  if (*gamma_cmd) return cmd_gamma(gamma, out, err);
  if (*spectrum) {
    if (spec_report_opt->count() > 0) spec.report = spec_report;
    return cmd_spectrum(spec, out, err);
  }
  return cmd_verify(verify, out, err);
}

}  // namespace uvac::cli
