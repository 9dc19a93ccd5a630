#include "wmmzi/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

namespace wmmzi {

namespace {

std::string join_issues(const std::vector<std::string>& issues) {
  std::ostringstream out;
  out << "invalid configuration:";
  for (const auto& issue : issues) out << "\n  - " << issue;
  return out.str();
}

constexpr double kDegree = std::numbers::pi / 180.0;

/// Collects missing/ill-typed fields with their JSON paths while reading.
class Reader {
 public:
  Reader(const nlohmann::json& j, std::string path,
         std::vector<std::string>* issues)
      : j_(&j), path_(std::move(path)), issues_(issues) {}

  bool has(const char* key) const { return j_ && j_->contains(key); }

  Reader child(const char* key) const {
    if (!j_ || !j_->contains(key)) {
      issues_->push_back(join(key) + ": missing required object");
      return Reader(nullptr, join(key), issues_);
    }
    if (!(*j_)[key].is_object()) {
      issues_->push_back(join(key) + ": must be an object");
      return Reader(nullptr, join(key), issues_);
    }
    return Reader((*j_)[key], join(key), issues_);
  }

  double number(const char* key) const {
    if (!j_) return 0.0;
    if (!j_->contains(key)) {
      issues_->push_back(join(key) + ": missing required number");
      return 0.0;
    }
    if (!(*j_)[key].is_number()) {
      issues_->push_back(join(key) + ": must be a number");
      return 0.0;
    }
    return (*j_)[key].get<double>();
  }

  double number_or(const char* key, double fallback) const {
    if (!j_ || !j_->contains(key)) return fallback;
    return number(key);
  }

  std::uint64_t uinteger(const char* key) const {
    if (!j_) return 0;
    if (!j_->contains(key)) {
      issues_->push_back(join(key) + ": missing required integer");
      return 0;
    }
    if (!(*j_)[key].is_number_integer() && !(*j_)[key].is_number_unsigned()) {
      issues_->push_back(join(key) + ": must be an integer");
      return 0;
    }
    return (*j_)[key].get<std::uint64_t>();
  }

  std::string text(const char* key) const {
    if (!j_) return {};
    if (!j_->contains(key)) {
      issues_->push_back(join(key) + ": missing required string");
      return {};
    }
    if (!(*j_)[key].is_string()) {
      issues_->push_back(join(key) + ": must be a string");
      return {};
    }
    return (*j_)[key].get<std::string>();
  }

  std::string text_or(const char* key, std::string fallback) const {
    if (!j_ || !j_->contains(key)) return fallback;
    return text(key);
  }

  bool boolean_or(const char* key, bool fallback) const {
    if (!j_ || !j_->contains(key)) return fallback;
    if (!(*j_)[key].is_boolean()) {
      issues_->push_back(join(key) + ": must be a boolean");
      return fallback;
    }
    return (*j_)[key].get<bool>();
  }

  void issue(const std::string& message) const { issues_->push_back(message); }
  void issue(const char* key, const std::string& message) const {
    issues_->push_back(join(key) + ": " + message);
  }

  std::string join(const char* key) const {
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

 private:
  Reader(std::nullptr_t, std::string path, std::vector<std::string>* issues)
      : j_(nullptr), path_(std::move(path)), issues_(issues) {}

  const nlohmann::json* j_;
  std::string path_;
  std::vector<std::string>* issues_;
};

DetectionConfig parse_detection(const Reader& r) {
  DetectionConfig det;
  det.collection_efficiency = r.number("collection_efficiency");
  det.detector_efficiency = r.number("detector_efficiency");
  det.dark_rate_cps = r.number("dark_rate_cps");
  return det;
}

nlohmann::json detection_to_json(const DetectionConfig& det) {
  return {{"collection_efficiency", det.collection_efficiency},
          {"detector_efficiency", det.detector_efficiency},
          {"dark_rate_cps", det.dark_rate_cps}};
}

SweepSpec parse_sweep(const Reader& r) {
  SweepSpec sweep;
  const std::string variable = r.text("variable");
  if (variable == "wedge_position_mm") {
    sweep.variable = SweepVariable::wedge_position;
  } else if (variable == "slit_position_mm") {
    sweep.variable = SweepVariable::slit_position;
  } else if (!variable.empty()) {
    r.issue("variable",
            "must be one of: wedge_position_mm, slit_position_mm");
  }
  sweep.start_m = r.number("start") * 1e-3;
  sweep.stop_m = r.number("stop") * 1e-3;
  sweep.step_m = r.number("step") * 1e-3;
  if (sweep.step_m <= 0.0) r.issue("step", "must be positive");
  if (sweep.stop_m <= sweep.start_m) r.issue("stop", "must exceed start");
  return sweep;
}

nlohmann::json sweep_to_json(const SweepSpec& sweep) {
  return {{"variable", sweep.variable == SweepVariable::wedge_position
                           ? "wedge_position_mm"
                           : "slit_position_mm"},
          {"start", sweep.start_m * 1e3},
          {"stop", sweep.stop_m * 1e3},
          {"step", sweep.step_m * 1e3}};
}

void check_semantics(const char* path, const std::function<void()>& validate,
                     std::vector<std::string>* issues) {
  try {
    validate();
  } catch (const std::invalid_argument& err) {
    issues->push_back(std::string(path) + ": " + err.what());
  }
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

const char* to_string(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::longitudinal: return "longitudinal";
    case ScenarioKind::lateral: return "lateral";
    case ScenarioKind::calibration: return "calibration";
    case ScenarioKind::g2: return "g2";
    case ScenarioKind::full_report: return "full-report";
  }
  return "?";
}

std::vector<double> SweepSpec::values() const {
  std::vector<double> out;
  const auto count = static_cast<std::size_t>(
      std::floor((stop_m - start_m) / step_m + 1.5));
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(start_m + static_cast<double>(i) * step_m);
  }
  return out;
}

ScenarioConfig parse_scenario_config(const nlohmann::json& j) {
  std::vector<std::string> issues;
  Reader root(j, "", &issues);

  ScenarioConfig config;
  const std::string kind = root.text("scenario");
  if (kind == "longitudinal") {
    config.kind = ScenarioKind::longitudinal;
  } else if (kind == "lateral") {
    config.kind = ScenarioKind::lateral;
  } else if (kind == "calibration") {
    config.kind = ScenarioKind::calibration;
  } else if (kind == "g2") {
    config.kind = ScenarioKind::g2;
  } else if (kind == "full-report") {
    config.kind = ScenarioKind::full_report;
  } else if (!kind.empty()) {
    root.issue("scenario",
               "must be one of: longitudinal, lateral, calibration, g2, "
               "full-report");
  }

  config.seed = root.uinteger("seed");
  config.output_dir = root.text_or("output_dir", "out");
  config.write_event_log = root.boolean_or("write_event_log", false);

  {
    Reader r = root.child("emitter");
    config.emitter.bright_rate_cps = r.number("bright_rate_cps");
    config.emitter.antibunch_tau_s = r.number("antibunch_tau_ns") * 1e-9;
    config.emitter.bright_to_dark_rate_hz = r.number("bright_to_dark_rate_hz");
    config.emitter.dark_to_bright_rate_hz = r.number("dark_to_bright_rate_hz");
    config.emitter.dark_brightness = r.number("dark_brightness");
    config.emitter.duration_s = 1.0;  // assigned per run
    config.emitter.seed = config.seed;
    check_semantics("emitter", [&] { config.emitter.validate(); }, &issues);
  }

  {
    Reader r = root.child("instrument");
    InstrumentConfig& inst = config.instrument;
    inst.beam.wavelength_m = r.number("wavelength_nm") * 1e-9;
    inst.beam.inter_beam_angle_rad = r.number("beam_angle_deg") * kDegree;
    inst.screen.refractive_index = r.number("refractive_index");
    inst.screen.reflection_probability = r.number("reflection_probability");
    inst.screen.face_transmission = r.number("face_transmission");
    inst.beam_splitter_reflectance = r.number("beam_splitter_reflectance");
    inst.arm1_transmission = r.number("arm1_transmission");
    inst.arm2_transmission = r.number("arm2_transmission");
    inst.wedge_angle_rad = r.number("wedge_angle_deg") * kDegree;
    inst.wedge_index = r.number("wedge_index");
    inst.wedge_position_m = r.number_or("wedge_position_mm", 0.0) * 1e-3;
    inst.slit_width_m = r.number("slit_width_um") * 1e-6;
    inst.slit_center_m = r.number_or("slit_center_mm", 0.0) * 1e-3;
    inst.magnification = r.number("magnification");
    inst.beam_waist_m = r.number("beam_waist_um") * 1e-6;
    inst.beam_separation_m = r.number("beam_separation_um") * 1e-6;
    inst.fringe_contrast = r.number("fringe_contrast");
    inst.apd1 = parse_detection(r.child("apd1"));
    inst.apd2 = parse_detection(r.child("apd2"));
    inst.apd3 = parse_detection(r.child("apd3"));
    if (issues.empty()) {
      check_semantics("instrument", [&] { inst.validate(); }, &issues);
    }
  }

  const bool needs_sweep = config.kind == ScenarioKind::longitudinal ||
                           config.kind == ScenarioKind::lateral ||
                           config.kind == ScenarioKind::full_report;
  if (needs_sweep) {
    config.sweep = parse_sweep(root.child("sweep"));
    config.integration_s = root.number("integration_s");
    if (config.integration_s <= 0.0 && root.has("integration_s")) {
      root.issue("integration_s", "must be positive");
    }
    if (config.kind == ScenarioKind::longitudinal &&
        config.sweep->variable != SweepVariable::wedge_position) {
      root.issue("sweep.variable",
                 "longitudinal scenario sweeps wedge_position_mm");
    }
    if (config.kind == ScenarioKind::lateral &&
        config.sweep->variable != SweepVariable::slit_position) {
      root.issue("sweep.variable", "lateral scenario sweeps slit_position_mm");
    }
  }
  if (config.kind == ScenarioKind::full_report) {
    config.lateral_sweep = parse_sweep(root.child("lateral_sweep"));
    if (config.lateral_sweep->variable != SweepVariable::slit_position) {
      root.issue("lateral_sweep.variable", "must be slit_position_mm");
    }
  }

  const bool needs_calibration = config.kind != ScenarioKind::g2;
  if (needs_calibration) {
    Reader r = root.child("calibration");
    CalibrationSpec spec;
    spec.mirror_reflectivity = r.number("mirror_reflectivity");
    spec.duration_s = r.number("duration_s");
    if (spec.mirror_reflectivity <= 0.0 || spec.mirror_reflectivity > 1.0) {
      r.issue("mirror_reflectivity", "must lie in (0, 1]");
    }
    if (spec.duration_s <= 0.0) r.issue("duration_s", "must be positive");
    config.calibration = spec;
  }

  const bool needs_g2 = config.kind == ScenarioKind::g2 ||
                        config.kind == ScenarioKind::full_report;
  if (needs_g2) {
    Reader r = root.child("g2");
    G2Spec spec;
    spec.duration_s = r.number("duration_s");
    spec.bin_width_s = r.number("bin_width_ns") * 1e-9;
    spec.window_s = r.number("window_ns") * 1e-9;
    if (spec.duration_s <= 0.0) r.issue("duration_s", "must be positive");
    if (spec.bin_width_s <= 0.0) r.issue("bin_width_ns", "must be positive");
    if (spec.window_s < spec.bin_width_s) {
      r.issue("window_ns", "must be >= bin_width_ns");
    }
    config.g2 = spec;
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return config;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError({"cannot open config file: " + path});
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& err) {
    throw ConfigError({std::string("JSON parse error: ") + err.what()});
  }
  return parse_scenario_config(j);
}

nlohmann::json to_json(const EmitterConfig& config) {
  return {{"bright_rate_cps", config.bright_rate_cps},
          {"antibunch_tau_ns", config.antibunch_tau_s * 1e9},
          {"bright_to_dark_rate_hz", config.bright_to_dark_rate_hz},
          {"dark_to_bright_rate_hz", config.dark_to_bright_rate_hz},
          {"dark_brightness", config.dark_brightness}};
}

nlohmann::json to_json(const InstrumentConfig& inst) {
  return {{"wavelength_nm", inst.beam.wavelength_m * 1e9},
          {"beam_angle_deg", inst.beam.inter_beam_angle_rad / kDegree},
          {"refractive_index", inst.screen.refractive_index},
          {"reflection_probability", inst.screen.reflection_probability},
          {"face_transmission", inst.screen.face_transmission},
          {"beam_splitter_reflectance", inst.beam_splitter_reflectance},
          {"arm1_transmission", inst.arm1_transmission},
          {"arm2_transmission", inst.arm2_transmission},
          {"wedge_angle_deg", inst.wedge_angle_rad / kDegree},
          {"wedge_index", inst.wedge_index},
          {"wedge_position_mm", inst.wedge_position_m * 1e3},
          {"slit_width_um", inst.slit_width_m * 1e6},
          {"slit_center_mm", inst.slit_center_m * 1e3},
          {"magnification", inst.magnification},
          {"beam_waist_um", inst.beam_waist_m * 1e6},
          {"beam_separation_um", inst.beam_separation_m * 1e6},
          {"fringe_contrast", inst.fringe_contrast},
          {"apd1", detection_to_json(inst.apd1)},
          {"apd2", detection_to_json(inst.apd2)},
          {"apd3", detection_to_json(inst.apd3)}};
}

nlohmann::json to_json(const ScenarioConfig& config) {
  nlohmann::json j{{"scenario", to_string(config.kind)},
                   {"seed", config.seed},
                   {"output_dir", config.output_dir},
                   {"emitter", to_json(config.emitter)},
                   {"instrument", to_json(config.instrument)},
                   {"write_event_log", config.write_event_log}};
  if (config.sweep) {
    j["sweep"] = sweep_to_json(*config.sweep);
    j["integration_s"] = config.integration_s;
  }
  if (config.lateral_sweep) {
    j["lateral_sweep"] = sweep_to_json(*config.lateral_sweep);
  }
  if (config.calibration) {
    j["calibration"] = {
        {"mirror_reflectivity", config.calibration->mirror_reflectivity},
        {"duration_s", config.calibration->duration_s}};
  }
  if (config.g2) {
    j["g2"] = {{"duration_s", config.g2->duration_s},
               {"bin_width_ns", config.g2->bin_width_s * 1e9},
               {"window_ns", config.g2->window_s * 1e9}};
  }
  return j;
}

void write_scan_json(const std::string& path, const ScanResult& scan,
                     const InstrumentConfig& instrument,
                     const EmitterConfig& emitter, std::uint64_t seed,
                     double integration_s) {
  nlohmann::json points = nlohmann::json::array();
  for (const auto& point : scan.points) {
    points.push_back({{"sweep_value", point.sweep_value * 1e3},
                      {"integration_s", point.integration_s},
                      {"apd1_counts", point.apd1_counts},
                      {"apd2_counts", point.apd2_counts},
                      {"apd3_counts", point.apd3_counts},
                      {"apd1_cps", point.apd1_cps},
                      {"apd2_cps", point.apd2_cps},
                      {"apd3_cps", point.apd3_cps},
                      {"apd3_dark_corrected_cps",
                       point.apd3_dark_corrected_cps}});
  }
  nlohmann::json j{{"format", "wmmzi-scan"},
                   {"version", 1},
                   {"sweep_variable",
                    scan.variable == SweepVariable::wedge_position
                        ? "wedge_position_mm"
                        : "slit_position_mm"},
                   {"seed", seed},
                   {"integration_s", integration_s},
                   {"instrument", to_json(instrument)},
                   {"emitter", to_json(emitter)},
                   {"points", points}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  out << j.dump(2) << "\n";
}

nlohmann::json read_scan_json(const std::string& path, ScanResult* scan,
                              InstrumentConfig* instrument) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open for reading: " + path);
  nlohmann::json j;
  in >> j;
  if (scan) {
    scan->variable = j.at("sweep_variable").get<std::string>() ==
                             "slit_position_mm"
                         ? SweepVariable::slit_position
                         : SweepVariable::wedge_position;
    scan->points.clear();
    for (const auto& p : j.at("points")) {
      ScanPoint point;
      point.sweep_value = p.at("sweep_value").get<double>() * 1e-3;
      point.integration_s = p.at("integration_s").get<double>();
      point.apd1_counts = p.at("apd1_counts").get<std::uint64_t>();
      point.apd2_counts = p.at("apd2_counts").get<std::uint64_t>();
      point.apd3_counts = p.at("apd3_counts").get<std::uint64_t>();
      point.apd1_cps = p.at("apd1_cps").get<double>();
      point.apd2_cps = p.at("apd2_cps").get<double>();
      point.apd3_cps = p.at("apd3_cps").get<double>();
      point.apd3_dark_corrected_cps =
          p.at("apd3_dark_corrected_cps").get<double>();
      scan->points.push_back(point);
    }
  }
  if (instrument) {
    std::vector<std::string> issues;
    nlohmann::json wrapper{{"instrument", j.at("instrument")}};
    Reader root(wrapper, "", &issues);
    Reader r = root.child("instrument");
    InstrumentConfig inst;
    inst.beam.wavelength_m = r.number("wavelength_nm") * 1e-9;
    inst.beam.inter_beam_angle_rad = r.number("beam_angle_deg") * kDegree;
    inst.screen.refractive_index = r.number("refractive_index");
    inst.screen.reflection_probability = r.number("reflection_probability");
    inst.screen.face_transmission = r.number("face_transmission");
    inst.beam_splitter_reflectance = r.number("beam_splitter_reflectance");
    inst.arm1_transmission = r.number("arm1_transmission");
    inst.arm2_transmission = r.number("arm2_transmission");
    inst.wedge_angle_rad = r.number("wedge_angle_deg") * kDegree;
    inst.wedge_index = r.number("wedge_index");
    inst.wedge_position_m = r.number_or("wedge_position_mm", 0.0) * 1e-3;
    inst.slit_width_m = r.number("slit_width_um") * 1e-6;
    inst.slit_center_m = r.number_or("slit_center_mm", 0.0) * 1e-3;
    inst.magnification = r.number("magnification");
    inst.beam_waist_m = r.number("beam_waist_um") * 1e-6;
    inst.beam_separation_m = r.number("beam_separation_um") * 1e-6;
    inst.fringe_contrast = r.number("fringe_contrast");
    inst.apd1 = parse_detection(r.child("apd1"));
    inst.apd2 = parse_detection(r.child("apd2"));
    inst.apd3 = parse_detection(r.child("apd3"));
    if (!issues.empty()) throw ConfigError(std::move(issues));
    *instrument = inst;
  }
  return j;
}

}  // namespace wmmzi
