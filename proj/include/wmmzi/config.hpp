#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "wmmzi/instrument.hpp"
#include "wmmzi/source.hpp"

namespace wmmzi {

/// Scenario config problems, one entry per offending field path.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> issues);
  const std::vector<std::string>& issues() const { return issues_; }

 private:
  std::vector<std::string> issues_;
};

enum class ScenarioKind : std::uint8_t {
  longitudinal,
  lateral,
  calibration,
  g2,
  full_report,
};

const char* to_string(ScenarioKind kind);

struct SweepSpec {
  SweepVariable variable = SweepVariable::wedge_position;
  double start_m = 0.0;
  double stop_m = 0.0;
  double step_m = 0.0;

  std::vector<double> values() const;
};

struct CalibrationSpec {
  double mirror_reflectivity = 0.955;
  double duration_s = 60.0;
};

struct G2Spec {
  double duration_s = 100.0;
  double bin_width_s = 3e-9;
  double window_s = 150e-9;
};

/// One runnable measurement scenario: instrument + emitter + what to sweep
/// or integrate. Parsed from a JSON file with unit-suffixed field names.
struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::longitudinal;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  EmitterConfig emitter;        // duration and seed are assigned per run
  InstrumentConfig instrument;
  std::optional<SweepSpec> sweep;
  std::optional<SweepSpec> lateral_sweep;  // full_report only
  double integration_s = 0.0;
  std::optional<CalibrationSpec> calibration;
  std::optional<G2Spec> g2;
  bool write_event_log = false;
};

/// Parses and validates; throws ConfigError listing every problem found,
/// each prefixed with the JSON field path.
ScenarioConfig parse_scenario_config(const nlohmann::json& j);
ScenarioConfig load_scenario_config(const std::string& path);

nlohmann::json to_json(const EmitterConfig& config);
nlohmann::json to_json(const InstrumentConfig& config);
nlohmann::json to_json(const ScenarioConfig& config);

/// Scan result with embedded provenance (instrument, emitter, seed).
void write_scan_json(const std::string& path, const ScanResult& scan,
                     const InstrumentConfig& instrument,
                     const EmitterConfig& emitter, std::uint64_t seed,
                     double integration_s);
nlohmann::json read_scan_json(const std::string& path, ScanResult* scan,
                              InstrumentConfig* instrument);

}  // namespace wmmzi
