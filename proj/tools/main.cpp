// Command-line front end for the weak-measurement MZI simulator.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "wmmzi/analysis.hpp"
#include "wmmzi/config.hpp"
#include "wmmzi/io.hpp"
#include "wmmzi/scenario.hpp"
#include "wmmzi/svgplot.hpp"

namespace fs = std::filesystem;

namespace {

struct CommonFlags {
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out_dir;
  int threads = 1;
  bool deterministic = false;

  wmmzi::RunFlags run_flags() const {
    wmmzi::RunFlags flags;
    if (seed_set) flags.seed = seed;
    if (!out_dir.empty()) flags.output_dir = out_dir;
    flags.threads = threads;
    flags.deterministic = deterministic;
    return flags;
  }
};

void add_common_flags(CLI::App* cmd, CommonFlags* flags) {
  cmd->add_option_function<std::uint64_t>(
      "--seed",
      [flags](const std::uint64_t& v) {
        flags->seed = v;
        flags->seed_set = true;
      },
      "Override the config seed");
  cmd->add_option("--out", flags->out_dir, "Output directory override");
  cmd->add_option("--threads", flags->threads, "Sweep worker threads")
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--deterministic", flags->deterministic,
                "Omit timestamps from plot metadata");
}

int run_and_report(const wmmzi::ScenarioConfig& config,
                   const wmmzi::RunFlags& flags) {
  const wmmzi::ScenarioOutcome outcome = wmmzi::run_scenario(config, flags);
  std::cout << outcome.summary << "\n";
  return 0;
}

// `analyze` on a scan CSV: dark-corrected fringe fit with Poisson errors
// rebuilt from the recorded counts.
int analyze_scan_csv(const std::string& path, const std::string& out_dir) {
  const wmmzi::ScanCsvFile file = wmmzi::read_scan_csv(path);
  std::vector<double> x, y, err;
  for (const auto& row : file.rows) {
    x.push_back(row.sweep_value);
    y.push_back(row.apd3_dark_corrected_cps);
    const double counts = std::max(row.apd3_cps * row.integration_s, 1.0);
    err.push_back(std::sqrt(counts) / row.integration_s);
  }
  wmmzi::WarningLog warnings;
  const wmmzi::FringeFit fit = wmmzi::fit_fringe(x, y, err, &warnings);

  nlohmann::json report{
      {"format", "wmmzi-report"},
      {"version", 1},
      {"source", path},
      {"sweep_variable", file.sweep_variable},
      {"fringe_fit",
       {{"offset_cps", fit.offset},
        {"offset_err_cps", fit.offset_err},
        {"amplitude_cps", fit.amplitude},
        {"amplitude_err_cps", fit.amplitude_err},
        {"period", fit.period},
        {"period_err", fit.period_err},
        {"phase_rad", fit.phase_rad},
        {"phase_err_rad", fit.phase_err},
        {"visibility", fit.visibility},
        {"visibility_err", fit.visibility_err},
        {"reduced_chi2", fit.reduced_chi2}}},
      {"warnings", warnings.messages}};

  fs::create_directories(out_dir);
  const fs::path report_path = fs::path(out_dir) / "analysis_report.json";
  std::ofstream out(report_path);
  out << report.dump(2) << "\n";

  std::printf("V=%.3f±%.3f period=%g offset=%.1f cps (report: %s)\n",
              fit.visibility, fit.visibility_err, fit.period, fit.offset,
              report_path.c_str());
  return 0;
}

// `analyze` on a time-tag file: coincidence histogram of a 50:50 split.
int analyze_tags(const std::string& path, const std::string& out_dir,
                 double bin_ns, double window_ns) {
  const wmmzi::TimeTagFile file = wmmzi::read_time_tags(path);
  if (file.stream.records.empty()) {
    std::cerr << "no records in " << path << "\n";
    return 1;
  }
  // Split deterministically by record parity when replaying a plain file.
  std::vector<double> a, b;
  for (std::size_t i = 0; i < file.stream.records.size(); ++i) {
    (i % 2 == 0 ? a : b).push_back(file.stream.records[i].time_s);
  }
  const wmmzi::CorrelationHistogram hist =
      wmmzi::compute_g2(a, b, bin_ns * 1e-9, window_ns * 1e-9);

  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / "g2.csv";
  std::ofstream csv(csv_path);
  csv << "tau_ns,g2,sigma,counts\n";
  for (std::size_t i = 0; i < hist.tau_s.size(); ++i) {
    csv << wmmzi::format_double(hist.tau_s[i] * 1e9) << ','
        << wmmzi::format_double(hist.g2[i]) << ','
        << wmmzi::format_double(hist.sigma[i]) << ',' << hist.counts[i]
        << '\n';
  }

  std::printf("g2(0)=%.3f over %zu bins (csv: %s)\n", hist.zero_delay(),
              hist.g2.size(), csv_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Monte Carlo simulator and analysis pipeline for a "
               "weak-measurement Mach-Zehnder interferometer"};
  app.require_subcommand(1);

  // simulate
  std::string config_path;
  CommonFlags simulate_flags;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Run a scenario config end to end");
  simulate->add_option("config", config_path, "Scenario config JSON")
      ->required();
  add_common_flags(simulate, &simulate_flags);

  // analyze
  std::string analyze_path;
  std::string analyze_out = "out/analysis";
  double analyze_bin_ns = 3.0;
  double analyze_window_ns = 150.0;
  CLI::App* analyze = app.add_subcommand(
      "analyze", "Analyze a scan CSV or a time-tag file");
  analyze->add_option("input", analyze_path, "scan .csv or tags .txt")
      ->required();
  analyze->add_option("--out", analyze_out, "Output directory");
  analyze->add_option("--bin-ns", analyze_bin_ns, "g2 bin width (ns)");
  analyze->add_option("--window-ns", analyze_window_ns, "g2 window (ns)");

  // reproduce
  std::string figure;
  CommonFlags reproduce_flags;
  CLI::App* reproduce = app.add_subcommand(
      "reproduce", "Run a bundled figure scenario (fig3c, fig4ab, fig4cd)");
  reproduce->add_option("figure", figure, "figure id")->required();
  add_common_flags(reproduce, &reproduce_flags);

  // validate
  std::string validate_path;
  CLI::App* validate =
      app.add_subcommand("validate", "Validate a scenario config");
  validate->add_option("config", validate_path, "Scenario config JSON")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (simulate->parsed()) {
      const wmmzi::ScenarioConfig config =
          wmmzi::load_scenario_config(config_path);
      return run_and_report(config, simulate_flags.run_flags());
    }
    if (analyze->parsed()) {
      if (analyze_path.size() > 4 &&
          analyze_path.substr(analyze_path.size() - 4) == ".csv") {
        return analyze_scan_csv(analyze_path, analyze_out);
      }
      return analyze_tags(analyze_path, analyze_out, analyze_bin_ns,
                          analyze_window_ns);
    }
    if (reproduce->parsed()) {
      const auto id = wmmzi::parse_figure_id(figure);
      if (!id) {
        std::cerr << "unknown figure id '" << figure
                  << "' (expected fig3c, fig4ab or fig4cd)\n";
        return 2;
      }
      return run_and_report(wmmzi::builtin_config(*id),
                            reproduce_flags.run_flags());
    }
    if (validate->parsed()) {
      wmmzi::load_scenario_config(validate_path);
      std::cout << "config OK\n";
      return 0;
    }
  } catch (const wmmzi::ConfigError& err) {
    std::cerr << err.what() << "\n";
    return 2;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
