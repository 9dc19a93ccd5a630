#include "wmmzi/instrument.hpp"

#include <stdexcept>

namespace wmmzi {

namespace {
void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}
}  // namespace

const char* to_string(Channel channel) {
  switch (channel) {
    case Channel::apd1: return "APD1";
    case Channel::apd2: return "APD2";
    case Channel::apd3: return "APD3";
    case Channel::lost: return "LOST";
  }
  return "?";
}

const char* to_string(EventSource source) {
  return source == EventSource::photon ? "photon" : "dark";
}

const char* to_string(PrismBranch branch) {
  switch (branch) {
    case PrismBranch::none: return "none";
    case PrismBranch::reflected: return "reflected";
    case PrismBranch::scattered: return "scattered";
  }
  return "?";
}

const char* to_string(SweepVariable variable) {
  return variable == SweepVariable::wedge_position ? "wedge_position"
                                                   : "slit_position";
}

void InstrumentConfig::validate() const {
  beam.validate();
  screen.validate();
  apd1.validate();
  apd2.validate();
  apd3.validate();
  require(beam_splitter_reflectance >= 0.0 && beam_splitter_reflectance <= 1.0,
          "InstrumentConfig: beam splitter reflectance must lie in [0, 1]");
  require(arm1_transmission >= 0.0 && arm1_transmission <= 1.0,
          "InstrumentConfig: arm 1 transmission must lie in [0, 1]");
  require(arm2_transmission >= 0.0 && arm2_transmission <= 1.0,
          "InstrumentConfig: arm 2 transmission must lie in [0, 1]");
  require(wedge_angle_rad > 0.0 && wedge_angle_rad < std::numbers::pi / 4.0,
          "InstrumentConfig: wedge angle must lie in (0, pi/4)");
  require(wedge_index >= 1.0, "InstrumentConfig: wedge index must be >= 1");
  require(slit_width_m > 0.0, "InstrumentConfig: slit width must be positive");
  require(magnification > 0.0,
          "InstrumentConfig: magnification must be positive");
  require(beam_waist_m > 0.0, "InstrumentConfig: beam waist must be positive");
  require(beam_separation_m >= 0.0,
          "InstrumentConfig: beam separation must be >= 0");
  require(fringe_contrast >= 0.0 && fringe_contrast <= 1.0,
          "InstrumentConfig: fringe contrast must lie in [0, 1]");
}

double wedge_phase(double position_m, const InstrumentConfig& config) {
  return config.beam.wavenumber() * (config.wedge_index - 1.0) * position_m *
         std::tan(config.wedge_angle_rad);
}

double total_phase(const InstrumentConfig& config) {
  return config.beam.relative_phase_rad +
         wedge_phase(config.wedge_position_m, config);
}

}  // namespace wmmzi
