#include "wmmzi/scenario.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "embedded_configs.hpp"
#include "wmmzi/io.hpp"
#include "wmmzi/svgplot.hpp"

namespace fs = std::filesystem;

namespace wmmzi {

namespace {

// Scenario-level stream labels (per-point labels live in the simulator).
constexpr std::uint64_t kCalibrationTag = 0xCA;
constexpr std::uint64_t kScanTag = 0x5C;
constexpr std::uint64_t kG2Tag = 0x62;

std::string fixed3(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

struct Context {
  ScenarioConfig config;
  RunFlags flags;
  fs::path out_dir;
  WarningLog warnings;
  ScenarioOutcome outcome;

  std::string provenance() const {
    std::ostringstream text;
    text << "wmmzi scenario=" << to_string(config.kind)
         << " seed=" << config.seed;
    if (!flags.deterministic) {
      const auto now = std::chrono::system_clock::now();
      text << " generated_unix="
           << std::chrono::duration_cast<std::chrono::seconds>(
                  now.time_since_epoch())
                  .count();
    }
    return text.str();
  }

  std::string file(const std::string& name) {
    const fs::path path = out_dir / name;
    outcome.files.push_back(path.string());
    return path.string();
  }
};

nlohmann::json fit_to_json(const FringeFit& fit, const char* period_unit) {
  return {{"offset_cps", fit.offset},
          {"offset_err_cps", fit.offset_err},
          {"amplitude_cps", fit.amplitude},
          {"amplitude_err_cps", fit.amplitude_err},
          {std::string("period_") + period_unit, fit.period},
          {std::string("period_err_") + period_unit, fit.period_err},
          {"phase_rad", fit.phase_rad},
          {"phase_err_rad", fit.phase_err},
          {"visibility", fit.visibility},
          {"visibility_err", fit.visibility_err},
          {"reduced_chi2", fit.reduced_chi2}};
}

nlohmann::json duality_to_json(const DualityMetrics& metrics,
                               double visibility_err, double disting_err) {
  const double duality_err =
      std::sqrt(std::pow(2.0 * metrics.visibility * visibility_err, 2) +
                std::pow(2.0 * metrics.distinguishability * disting_err, 2));
  return {{"visibility", metrics.visibility},
          {"visibility_err", visibility_err},
          {"distinguishability", metrics.distinguishability},
          {"distinguishability_err", disting_err},
          {"v2_plus_d2", metrics.duality},
          {"v2_plus_d2_err", duality_err}};
}

struct CalibrationBlock {
  CalibrationResult mirror;
  CalibrationResult prism;
  double reflectivity = 0.0;
  double reflectivity_err = 0.0;
  nlohmann::json json;
};

CalibrationBlock run_calibration_block(Context& ctx) {
  const CalibrationSpec& spec = *ctx.config.calibration;
  CalibrationBlock block;

  EmitterConfig emitter = ctx.config.emitter;
  emitter.seed = derive_key(ctx.config.seed, kCalibrationTag, 0);
  block.mirror =
      run_calibration(ctx.config.instrument, emitter, CalibrationTarget::mirror,
                      spec.duration_s, spec.mirror_reflectivity);
  emitter.seed = derive_key(ctx.config.seed, kCalibrationTag, 1);
  block.prism =
      run_calibration(ctx.config.instrument, emitter, CalibrationTarget::prism,
                      spec.duration_s, spec.mirror_reflectivity);

  block.reflectivity = calibrate_reflectivity(
      block.mirror.bright_rate_cps, block.prism.bright_rate_cps,
      spec.mirror_reflectivity, ctx.config.instrument.screen.face_transmission,
      &ctx.warnings);
  if (block.mirror.bright_detected_counts > 0 &&
      block.prism.bright_detected_counts > 0) {
    block.reflectivity_err =
        block.reflectivity *
        std::sqrt(1.0 / static_cast<double>(block.mirror.bright_detected_counts) +
                  1.0 / static_cast<double>(block.prism.bright_detected_counts));
  }

  block.json = {{"duration_s", spec.duration_s},
                {"mirror_reflectivity", spec.mirror_reflectivity},
                {"face_transmission",
                 ctx.config.instrument.screen.face_transmission},
                {"mirror_bright_rate_cps", block.mirror.bright_rate_cps},
                {"prism_bright_rate_cps", block.prism.bright_rate_cps},
                {"mirror_bright_counts", block.mirror.bright_detected_counts},
                {"prism_bright_counts", block.prism.bright_detected_counts},
                {"reflectivity", block.reflectivity},
                {"reflectivity_err", block.reflectivity_err}};
  return block;
}

/// Measurement-side segmentation of a calibration trace; null when the
/// trace has no bright/dark structure (blinking disabled).
nlohmann::json segmented_rate_json(Context& ctx,
                                   const CalibrationResult& result) {
  std::vector<double> rates(result.trace_counts.size());
  for (std::size_t i = 0; i < rates.size(); ++i) {
    rates[i] =
        static_cast<double>(result.trace_counts[i]) / result.trace_bin_s;
  }
  try {
    const std::vector<bool> mask = segment_bright(rates);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < rates.size(); ++i) {
      if (mask[i]) {
        sum += rates[i];
        ++n;
      }
    }
    if (n == 0) return nullptr;
    return sum / static_cast<double>(n);
  } catch (const std::runtime_error& err) {
    ctx.warnings.add(std::string("segmentation skipped: ") + err.what());
    return nullptr;
  }
}

struct ScanBlock {
  ScanResult scan;
  std::vector<double> sweep_display;  // mm
  std::vector<double> corrected_cps;
  std::vector<double> errors_cps;
};

ScanBlock run_scan_block(Context& ctx, const SweepSpec& sweep,
                         std::uint64_t scan_index,
                         const std::string& basename) {
  EmitterConfig emitter = ctx.config.emitter;
  emitter.seed = derive_key(ctx.config.seed, kScanTag, scan_index);

  std::vector<DetectionEvent> events;
  ScanOptions options;
  options.threads = ctx.flags.threads;
  if (ctx.config.write_event_log) options.event_log = &events;

  ScanBlock block;
  block.scan = run_scan(ctx.config.instrument, emitter, sweep.variable,
                        sweep.values(), ctx.config.integration_s, options);

  write_scan_csv(ctx.file(basename + ".csv"), block.scan);
  write_scan_json(ctx.file(basename + ".json"), block.scan,
                  ctx.config.instrument, ctx.config.emitter, ctx.config.seed,
                  ctx.config.integration_s);
  if (ctx.config.write_event_log) {
    write_event_log(ctx.file(basename + "_events.txt"), events);
  }

  for (const auto& point : block.scan.points) {
    block.sweep_display.push_back(point.sweep_value * 1e3);
    block.corrected_cps.push_back(point.apd3_dark_corrected_cps);
    block.errors_cps.push_back(
        std::sqrt(static_cast<double>(std::max<std::uint64_t>(
            point.apd3_counts, 1))) /
        point.integration_s);
  }
  return block;
}

void plot_path_rates(Context& ctx, const ScanBlock& block,
                     const std::string& name, const std::string& x_label) {
  PlotSeries apd1, apd2;
  apd1.label = "APD1";
  apd1.color = "#1f77b4";
  apd2.label = "APD2";
  apd2.color = "#d62728";
  for (const auto& point : block.scan.points) {
    apd1.x.push_back(point.sweep_value * 1e3);
    apd1.y.push_back(point.apd1_cps);
    apd1.yerr.push_back(std::sqrt(static_cast<double>(
                            std::max<std::uint64_t>(point.apd1_counts, 1))) /
                        point.integration_s);
    apd2.x.push_back(point.sweep_value * 1e3);
    apd2.y.push_back(point.apd2_cps);
    apd2.yerr.push_back(std::sqrt(static_cast<double>(
                            std::max<std::uint64_t>(point.apd2_counts, 1))) /
                        point.integration_s);
  }
  PlotLayout layout;
  layout.title = "Path channel rates";
  layout.x_label = x_label;
  layout.y_label = "rate (cps)";
  layout.provenance = ctx.provenance();
  write_chart(ctx.file(name), layout, {apd1, apd2});
}

nlohmann::json run_longitudinal(Context& ctx, const CalibrationBlock& calib,
                                const SweepSpec& sweep,
                                const std::string& prefix,
                                DualityMetrics* duality_out,
                                std::string* summary) {
  ScanBlock block = run_scan_block(ctx, sweep, 0, prefix + "scan");
  const FringeFit fit =
      fit_fringe(block.sweep_display, block.corrected_cps, block.errors_cps,
                 &ctx.warnings);

  PlotSeries data;
  data.x = block.sweep_display;
  data.y = block.corrected_cps;
  data.yerr = block.errors_cps;
  data.label = "APD3 (dark corrected)";
  data.color = "#2ca02c";
  PlotSeries curve;
  curve.line = true;
  curve.label = "fit";
  curve.color = "#1f77b4";
  const double x0 = block.sweep_display.front();
  const double x1 = block.sweep_display.back();
  for (int i = 0; i <= 400; ++i) {
    const double x = x0 + (x1 - x0) * i / 400.0;
    curve.x.push_back(x);
    curve.y.push_back(fit.offset +
                      fit.amplitude * std::cos(2.0 * std::numbers::pi * x /
                                                   fit.period +
                                               fit.phase_rad));
  }
  PlotLayout layout;
  layout.title = "Longitudinal interference";
  layout.x_label = "wedge position (mm)";
  layout.y_label = "APD3 rate (cps)";
  layout.provenance = ctx.provenance();
  write_chart(ctx.file(prefix + "apd3_fringe.svg"), layout, {data, curve});
  plot_path_rates(ctx, block, prefix + "path_rates.svg",
                  "wedge position (mm)");

  const DualityMetrics duality =
      duality_metrics(fit.visibility, calib.reflectivity);
  if (duality_out) *duality_out = duality;
  if (summary) {
    *summary = "V=" + fixed3(fit.visibility) + "±" +
               fixed3(fit.visibility_err) + " D=" +
               fixed3(duality.distinguishability) + " V2+D2=" +
               fixed3(duality.duality);
  }

  nlohmann::json j;
  j["fringe_fit"] = fit_to_json(fit, "mm");
  j["fringes_per_mm"] = 1.0 / fit.period;
  j["duality"] =
      duality_to_json(duality, fit.visibility_err, calib.reflectivity_err);
  return j;
}

nlohmann::json run_lateral(Context& ctx, const CalibrationBlock& calib,
                           const SweepSpec& sweep, const std::string& prefix,
                           DualityMetrics* duality_out, std::string* summary) {
  ScanBlock block = run_scan_block(ctx, sweep, 1, prefix + "scan");

  const InstrumentConfig& inst = ctx.config.instrument;
  LateralGeometry geometry;
  geometry.fringe_wavenumber =
      scattered_fringe_wavenumber(inst.beam, inst.screen);
  geometry.slit_halfwidth_m = inst.slit_width_m / (2.0 * inst.magnification);
  geometry.waist_m = inst.beam_waist_m;
  geometry.separation_m = inst.beam_separation_m;
  geometry.center_m = 0.0;

  std::vector<double> object_positions;
  object_positions.reserve(block.scan.points.size());
  for (const auto& point : block.scan.points) {
    object_positions.push_back(point.sweep_value / inst.magnification);
  }

  const LateralFit fit =
      fit_lateral(object_positions, block.corrected_cps, block.errors_cps,
                  geometry, &ctx.warnings);

  PlotSeries data;
  data.x = block.sweep_display;
  data.y = block.corrected_cps;
  data.yerr = block.errors_cps;
  data.label = "APD3 (dark corrected)";
  data.color = "#2ca02c";
  PlotSeries curve;
  curve.line = true;
  curve.label = "overlap model fit";
  curve.color = "#1f77b4";
  const double x0 = object_positions.front();
  const double x1 = object_positions.back();
  for (int i = 0; i <= 600; ++i) {
    const double u = x0 + (x1 - x0) * i / 600.0;
    curve.x.push_back(u * inst.magnification * 1e3);
    curve.y.push_back(lateral_fit_model(u, fit, geometry));
  }
  PlotLayout layout;
  layout.title = "Lateral interference";
  layout.x_label = "slit position (mm)";
  layout.y_label = "APD3 rate (cps)";
  layout.provenance = ctx.provenance();
  write_chart(ctx.file(prefix + "apd3_fringe.svg"), layout, {data, curve});
  plot_path_rates(ctx, block, prefix + "path_rates.svg", "slit position (mm)");

  const DualityMetrics duality =
      duality_metrics(fit.fringe.visibility, calib.reflectivity);
  if (duality_out) *duality_out = duality;
  if (summary) {
    *summary = "V=" + fixed3(fit.fringe.visibility) + "±" +
               fixed3(fit.fringe.visibility_err) + " D=" +
               fixed3(duality.distinguishability) + " V2+D2=" +
               fixed3(duality.duality);
  }

  nlohmann::json fit_json = fit_to_json(fit.fringe, "m");
  fit_json["plane_wave_visibility"] = fit.fringe.visibility;
  fit_json["waist_um"] = fit.waist_m * 1e6;
  fit_json["separation_um"] = fit.separation_m * 1e6;
  fit_json["center_um"] = fit.center_m * 1e6;

  nlohmann::json j;
  j["lateral_fit"] = fit_json;
  j["duality"] = duality_to_json(duality, fit.fringe.visibility_err,
                                 calib.reflectivity_err);
  return j;
}

nlohmann::json run_g2_block(Context& ctx, std::string* summary) {
  const G2Spec& spec = *ctx.config.g2;
  EmitterConfig emitter = ctx.config.emitter;
  emitter.duration_s = spec.duration_s;
  emitter.seed = derive_key(ctx.config.seed, kG2Tag, 0);
  const PhotonStream stream = generate_stream(emitter);

  CounterRng splitter(derive_key(ctx.config.seed, kG2Tag, 1));
  std::vector<double> tags_a, tags_b;
  for (const auto& record : stream.records) {
    if (splitter.next_bernoulli(ctx.config.instrument.beam_splitter_reflectance)) {
      tags_a.push_back(record.time_s);
    } else {
      tags_b.push_back(record.time_s);
    }
  }

  const CorrelationHistogram hist =
      compute_g2(tags_a, tags_b, spec.bin_width_s, spec.window_s);

  double baseline = 0.0;
  std::size_t n_baseline = 0;
  for (std::size_t i = 0; i < hist.tau_s.size(); ++i) {
    if (std::abs(hist.tau_s[i]) >= 0.7 * hist.window_s) {
      baseline += hist.g2[i];
      ++n_baseline;
    }
  }
  baseline /= static_cast<double>(std::max<std::size_t>(n_baseline, 1));

  {
    std::ofstream csv(ctx.file("g2.csv"));
    csv << "tau_ns,g2,sigma,counts\n";
    for (std::size_t i = 0; i < hist.tau_s.size(); ++i) {
      csv << format_double(hist.tau_s[i] * 1e9) << ','
          << format_double(hist.g2[i]) << ',' << format_double(hist.sigma[i])
          << ',' << hist.counts[i] << '\n';
    }
  }

  PlotSeries data;
  data.x.reserve(hist.tau_s.size());
  for (double tau : hist.tau_s) data.x.push_back(tau * 1e9);
  data.y = hist.g2;
  data.yerr = hist.sigma;
  data.label = "measured";
  data.color = "#1f77b4";
  PlotSeries model;
  model.line = true;
  model.label = "1 - exp(-|tau|/tau_c)";
  model.color = "#d62728";
  for (int i = 0; i <= 400; ++i) {
    const double tau =
        -hist.window_s + 2.0 * hist.window_s * i / 400.0;
    model.x.push_back(tau * 1e9);
    model.y.push_back(baseline * analytic_g2(tau, emitter));
  }
  PlotLayout layout;
  layout.title = "Photon correlation g2";
  layout.x_label = "delay (ns)";
  layout.y_label = "g2";
  layout.provenance = ctx.provenance();
  write_chart(ctx.file("g2_histogram.svg"), layout, {data, model});

  if (ctx.config.write_event_log) {
    write_time_tags(ctx.file("tags.txt"), stream, emitter);
  }

  if (summary) {
    *summary =
        "g2(0)=" + fixed3(hist.zero_delay()) + " baseline=" + fixed3(baseline);
  }
  return {{"duration_s", spec.duration_s},
          {"bin_width_ns", spec.bin_width_s * 1e9},
          {"window_ns", hist.window_s * 1e9},
          {"zero_delay_g2", hist.zero_delay()},
          {"baseline_mean", baseline},
          {"stream_records", stream.records.size()},
          {"tags_a", tags_a.size()},
          {"tags_b", tags_b.size()}};
}

nlohmann::json run_calibration_scenario(Context& ctx,
                                        const CalibrationBlock& calib,
                                        std::string* summary) {
  nlohmann::json j = calib.json;
  j["mirror_segmented_bright_rate_cps"] = segmented_rate_json(ctx, calib.mirror);
  j["prism_segmented_bright_rate_cps"] = segmented_rate_json(ctx, calib.prism);

  {
    std::ofstream csv(ctx.file("calibration_trace.csv"));
    csv << "time_s,mirror_cps,prism_cps\n";
    const std::size_t n = std::min(calib.mirror.trace_counts.size(),
                                   calib.prism.trace_counts.size());
    for (std::size_t i = 0; i < n; ++i) {
      const double t = (static_cast<double>(i) + 0.5) * calib.mirror.trace_bin_s;
      csv << format_double(t) << ','
          << format_double(static_cast<double>(calib.mirror.trace_counts[i]) /
                           calib.mirror.trace_bin_s)
          << ','
          << format_double(static_cast<double>(calib.prism.trace_counts[i]) /
                           calib.prism.trace_bin_s)
          << '\n';
    }
  }

  PlotSeries mirror, prism;
  mirror.line = true;
  mirror.label = "mirror";
  mirror.color = "#d62728";
  prism.line = true;
  prism.label = "prism";
  prism.color = "#1f77b4";
  for (std::size_t i = 0; i < calib.mirror.trace_counts.size(); ++i) {
    const double t = (static_cast<double>(i) + 0.5) * calib.mirror.trace_bin_s;
    mirror.x.push_back(t);
    mirror.y.push_back(static_cast<double>(calib.mirror.trace_counts[i]) /
                       calib.mirror.trace_bin_s);
  }
  for (std::size_t i = 0; i < calib.prism.trace_counts.size(); ++i) {
    const double t = (static_cast<double>(i) + 0.5) * calib.prism.trace_bin_s;
    prism.x.push_back(t);
    prism.y.push_back(static_cast<double>(calib.prism.trace_counts[i]) /
                      calib.prism.trace_bin_s);
  }
  PlotLayout layout;
  layout.title = "Calibration rate traces";
  layout.x_label = "time (s)";
  layout.y_label = "rate (cps)";
  layout.provenance = ctx.provenance();
  write_chart(ctx.file("calibration_trace.svg"), layout, {mirror, prism});

  if (summary) {
    *summary = "R=" + fixed3(calib.reflectivity) + "±" +
               fixed3(calib.reflectivity_err) + " (mirror " +
               fixed3(calib.mirror.bright_rate_cps) + " cps, prism " +
               fixed3(calib.prism.bright_rate_cps) + " cps)";
  }
  return j;
}

}  // namespace

ScenarioOutcome run_scenario(const ScenarioConfig& config_in,
                             const RunFlags& flags) {
  Context ctx;
  ctx.config = config_in;
  ctx.flags = flags;
  if (flags.seed) {
    ctx.config.seed = *flags.seed;
    ctx.config.emitter.seed = *flags.seed;
  }
  // Recorded without the output-dir override so reruns of the same seed
  // yield byte-identical artifacts wherever they are written.
  const nlohmann::json recorded_config = to_json(ctx.config);
  if (flags.output_dir) ctx.config.output_dir = *flags.output_dir;
  ctx.out_dir = ctx.config.output_dir;
  fs::create_directories(ctx.out_dir);

  nlohmann::json report{{"format", "wmmzi-report"},
                        {"version", 1},
                        {"scenario", to_string(ctx.config.kind)},
                        {"seed", ctx.config.seed}};

  std::string summary;
  switch (ctx.config.kind) {
    case ScenarioKind::longitudinal: {
      const CalibrationBlock calib = run_calibration_block(ctx);
      report["calibration"] = calib.json;
      report.update(
          run_longitudinal(ctx, calib, *ctx.config.sweep, "",
                           &ctx.outcome.duality.emplace(), &summary));
      break;
    }
    case ScenarioKind::lateral: {
      const CalibrationBlock calib = run_calibration_block(ctx);
      report["calibration"] = calib.json;
      report.update(run_lateral(ctx, calib, *ctx.config.sweep, "",
                                &ctx.outcome.duality.emplace(), &summary));
      break;
    }
    case ScenarioKind::calibration: {
      const CalibrationBlock calib = run_calibration_block(ctx);
      report["calibration"] = run_calibration_scenario(ctx, calib, &summary);
      break;
    }
    case ScenarioKind::g2: {
      report["g2"] = run_g2_block(ctx, &summary);
      break;
    }
    case ScenarioKind::full_report: {
      const CalibrationBlock calib = run_calibration_block(ctx);
      std::string calib_summary;
      report["calibration"] = run_calibration_scenario(ctx, calib,
                                                       &calib_summary);
      std::string summary_longitudinal;
      DualityMetrics duality;
      nlohmann::json longitudinal =
          run_longitudinal(ctx, calib, *ctx.config.sweep, "longitudinal_",
                           &duality, &summary_longitudinal);
      ctx.outcome.duality = duality;
      report["longitudinal"] = longitudinal;
      std::string summary_lateral;
      report["lateral"] = run_lateral(ctx, calib, *ctx.config.lateral_sweep,
                                      "lateral_", nullptr, &summary_lateral);
      std::string summary_g2;
      report["g2"] = run_g2_block(ctx, &summary_g2);
      summary = summary_longitudinal + " | lateral " + summary_lateral +
                " | " + summary_g2;
      break;
    }
  }

  report["warnings"] = ctx.warnings.messages;

  const std::string report_path = ctx.file("report.json");
  {
    std::ofstream out(report_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + report_path);
    out << report.dump(2) << "\n";
  }
  // The exact config that produced the artifacts, for provenance and reruns.
  const std::string config_path = ctx.file("config_used.json");
  {
    std::ofstream out(config_path);
    if (!out) throw std::runtime_error("cannot open for writing: " + config_path);
    out << recorded_config.dump(2) << "\n";
  }

  ctx.outcome.report = std::move(report);
  ctx.outcome.summary = std::move(summary);
  return std::move(ctx.outcome);
}

std::optional<FigureId> parse_figure_id(const std::string& name) {
  if (name == "fig3c") return FigureId::fig3c;
  if (name == "fig4ab") return FigureId::fig4ab;
  if (name == "fig4cd") return FigureId::fig4cd;
  return std::nullopt;
}

ScenarioConfig builtin_config(FigureId figure) {
  const char* text = nullptr;
  switch (figure) {
    case FigureId::fig3c: text = detail::kG2Config; break;
    case FigureId::fig4ab: text = detail::kLongitudinalConfig; break;
    case FigureId::fig4cd: text = detail::kLateralConfig; break;
  }
  return parse_scenario_config(nlohmann::json::parse(text));
}

}  // namespace wmmzi
