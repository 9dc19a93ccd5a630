#include "wmmzi/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace wmmzi {

namespace {

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path);
  if (!out) {
    throw std::runtime_error("cannot open for writing: " + path);
  }
  return out;
}

std::ifstream open_input(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("cannot open for reading: " + path);
  }
  return in;
}

}  // namespace

std::string format_double(double value) {
  char buffer[32];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof(buffer), value);
  if (ec != std::errc{}) return "nan";
  return std::string(buffer, ptr);
}

void write_time_tags(const std::string& path, const PhotonStream& stream,
                     const EmitterConfig& config) {
  auto out = open_output(path);
  nlohmann::json header{{"bright_rate_cps", config.bright_rate_cps},
                        {"antibunch_tau_ns", config.antibunch_tau_s * 1e9},
                        {"bright_to_dark_rate_hz", config.bright_to_dark_rate_hz},
                        {"dark_to_bright_rate_hz", config.dark_to_bright_rate_hz},
                        {"dark_brightness", config.dark_brightness},
                        {"duration_s", config.duration_s},
                        {"seed", config.seed}};
  out << "# wmmzi-tags v1\n";
  out << "# " << header.dump() << "\n";
  char line[48];
  for (const auto& record : stream.records) {
    std::snprintf(line, sizeof(line), "%.12e\t%s\n", record.time_s,
                  record.state == EmitterState::bright ? "bright" : "dark");
    out << line;
  }
}

TimeTagFile read_time_tags(const std::string& path) {
  auto in = open_input(path);
  TimeTagFile file;
  bool header_seen = false;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto brace = line.find('{');
      if (!header_seen && brace != std::string::npos) {
        const auto header = nlohmann::json::parse(line.substr(brace));
        file.config.bright_rate_cps = header.value("bright_rate_cps", 0.0);
        file.config.antibunch_tau_s = header.value("antibunch_tau_ns", 0.0) * 1e-9;
        file.config.bright_to_dark_rate_hz =
            header.value("bright_to_dark_rate_hz", 0.0);
        file.config.dark_to_bright_rate_hz =
            header.value("dark_to_bright_rate_hz", 0.0);
        file.config.dark_brightness = header.value("dark_brightness", 0.0);
        file.config.duration_s = header.value("duration_s", 0.0);
        file.config.seed = header.value("seed", std::uint64_t{0});
        header_seen = true;
      }
      continue;
    }
    std::istringstream fields(line);
    double t;
    std::string state;
    if (!(fields >> t >> state)) {
      throw std::runtime_error("malformed time-tag line: " + line);
    }
    file.stream.records.push_back(
        {t, state == "dark" ? EmitterState::dark : EmitterState::bright});
  }
  file.stream.duration_s = file.config.duration_s;
  return file;
}

SweepFormat sweep_format(SweepVariable variable) {
  if (variable == SweepVariable::wedge_position) {
    return {"wedge_position_mm", 1e3};
  }
  return {"slit_position_mm", 1e3};
}

void write_scan_csv(const std::string& path, const ScanResult& scan) {
  auto out = open_output(path);
  const SweepFormat format = sweep_format(scan.variable);
  out << "# wmmzi-scan sweep_variable=" << format.variable_name << "\n";
  out << "sweep_value,integration_s,apd1_cps,apd2_cps,apd3_cps,"
         "apd3_dark_corrected_cps\n";
  for (const auto& point : scan.points) {
    out << format_double(point.sweep_value * format.scale) << ','
        << format_double(point.integration_s) << ','
        << format_double(point.apd1_cps) << ','
        << format_double(point.apd2_cps) << ','
        << format_double(point.apd3_cps) << ','
        << format_double(point.apd3_dark_corrected_cps) << '\n';
  }
}

ScanCsvFile read_scan_csv(const std::string& path) {
  auto in = open_input(path);
  ScanCsvFile file;
  std::string line;
  bool header_skipped = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto pos = line.find("sweep_variable=");
      if (pos != std::string::npos) {
        file.sweep_variable = line.substr(pos + 15);
      }
      continue;
    }
    if (!header_skipped) {
      header_skipped = true;  // column header
      continue;
    }
    std::istringstream fields(line);
    ScanCsvRow row;
    char comma;
    if (!(fields >> row.sweep_value >> comma >> row.integration_s >> comma >>
          row.apd1_cps >> comma >> row.apd2_cps >> comma >> row.apd3_cps >>
          comma >> row.apd3_dark_corrected_cps)) {
      throw std::runtime_error("malformed scan CSV line: " + line);
    }
    file.rows.push_back(row);
  }
  if (file.rows.empty()) {
    throw std::runtime_error("scan CSV contains no data rows: " + path);
  }
  return file;
}

void write_event_log(const std::string& path,
                     const std::vector<DetectionEvent>& events) {
  auto out = open_output(path);
  out << "# wmmzi-events v1\n";
  out << "# time_s\tchannel\tprovenance\tbranch\tposition_m\n";
  char line[96];
  for (const auto& event : events) {
    if (std::isnan(event.position_m)) {
      std::snprintf(line, sizeof(line), "%.12e\t%s\t%s\t%s\t-\n", event.time_s,
                    to_string(event.channel), to_string(event.provenance),
                    to_string(event.prism_branch));
    } else {
      std::snprintf(line, sizeof(line), "%.12e\t%s\t%s\t%s\t%.9e\n",
                    event.time_s, to_string(event.channel),
                    to_string(event.provenance), to_string(event.prism_branch),
                    event.position_m);
    }
    out << line;
  }
}

}  // namespace wmmzi
