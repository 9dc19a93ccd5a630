#pragma once

#include <string>
#include <vector>

#include "wmmzi/instrument.hpp"
#include "wmmzi/source.hpp"

namespace wmmzi {

/// Writes a photon stream as a time-tag file: a commented JSON header with
/// the emitter configuration, then one `timestamp_seconds<TAB>state` line
/// per record (see docs/formats.md).
void write_time_tags(const std::string& path, const PhotonStream& stream,
                     const EmitterConfig& config);

struct TimeTagFile {
  PhotonStream stream;  ///< segments are not stored in the file
  EmitterConfig config;
};

TimeTagFile read_time_tags(const std::string& path);

/// How sweep values are rendered in scan files: display name carries the
/// unit, scale converts meters to that unit.
struct SweepFormat {
  std::string variable_name;  ///< e.g. "wedge_position_mm"
  double scale = 1.0;         ///< display value = scale * meters
};

SweepFormat sweep_format(SweepVariable variable);

/// CSV with the fixed column schema
/// sweep_value,integration_s,apd1_cps,apd2_cps,apd3_cps,apd3_dark_corrected_cps
/// preceded by a comment line naming the sweep variable.
void write_scan_csv(const std::string& path, const ScanResult& scan);

struct ScanCsvRow {
  double sweep_value = 0.0;
  double integration_s = 0.0;
  double apd1_cps = 0.0;
  double apd2_cps = 0.0;
  double apd3_cps = 0.0;
  double apd3_dark_corrected_cps = 0.0;
};

struct ScanCsvFile {
  std::string sweep_variable;  ///< from the comment header, may be empty
  std::vector<ScanCsvRow> rows;
};

ScanCsvFile read_scan_csv(const std::string& path);

/// Debug event log: one line per transported photon or dark count.
void write_event_log(const std::string& path,
                     const std::vector<DetectionEvent>& events);

/// Shortest round-trip decimal rendering of a double (locale-independent).
std::string format_double(double value);

}  // namespace wmmzi
