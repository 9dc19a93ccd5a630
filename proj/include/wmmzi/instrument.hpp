#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "wmmzi/wave_model.hpp"

namespace wmmzi {

enum class Channel : std::uint8_t { apd1, apd2, apd3, lost };
enum class EventSource : std::uint8_t { photon, dark };
enum class PrismBranch : std::uint8_t { none, reflected, scattered };

const char* to_string(Channel channel);
const char* to_string(EventSource source);
const char* to_string(PrismBranch branch);

/// Outcome of one transported photon (or one injected dark count).
/// position_m is the scatter coordinate d = x - y on the prism surface and
/// is NaN unless channel == apd3 and provenance == photon.
struct DetectionEvent {
  double time_s = 0.0;
  Channel channel = Channel::lost;
  EventSource provenance = EventSource::photon;
  PrismBranch prism_branch = PrismBranch::none;
  double position_m = std::numeric_limits<double>::quiet_NaN();
};

/// Full description of the interferometer: beam pair, screen, per-channel
/// detection, arm optics, wedge phase tuner, imaging and slit.
///
/// The scattered pattern is sampled in the surface coordinate d = x - y.
/// Two Gaussian beam spots of equal waist, centered separation_m apart,
/// carry the fringe in their overlap; fringe_contrast scales the
/// interference cross term (1 = ideal mutual coherence).
struct InstrumentConfig {
  BeamPairConfig beam;
  PrismScreen screen;
  DetectionConfig apd1;
  DetectionConfig apd2;
  DetectionConfig apd3{1.0, 1.0, 32.0};

  double beam_splitter_reflectance = 0.5;
  double arm1_transmission = 0.5011872336272722;  ///< 0.3 OD neutral filter
  double arm2_transmission = 0.5011872336272722;  ///< balanced against arm 1

  double wedge_angle_rad = 0.008726646259971648;  ///< 0.5 deg
  double wedge_index = 1.5;
  double wedge_position_m = 0.0;

  double slit_width_m = 150e-6;   ///< in the image plane
  double slit_center_m = 0.0;     ///< image coordinate
  double magnification = 1.0;     ///< image coordinate = M * surface coordinate

  double beam_waist_m = 0.5e-3;       ///< intensity 1/e^2 half-width
  double beam_separation_m = 0.25e-3; ///< spot center distance on the surface
  double fringe_contrast = 1.0;       ///< cross-term scale, in [0, 1]

  void validate() const;
};

/// Phase advance of the wedged arm when the wedge plate sits at the given
/// translation position: k (n_g - 1) position tan(alpha). Linear in
/// position; one fringe per 2 pi.
double wedge_phase(double position_m, const InstrumentConfig& config);

/// Total relative phase between the arms at the configured wedge position.
double total_phase(const InstrumentConfig& config);

enum class SweepVariable : std::uint8_t { wedge_position, slit_position };

const char* to_string(SweepVariable variable);

struct ScanPoint {
  double sweep_value = 0.0;
  double integration_s = 0.0;
  std::uint64_t apd1_counts = 0;
  std::uint64_t apd2_counts = 0;
  std::uint64_t apd3_counts = 0;
  double apd1_cps = 0.0;
  double apd2_cps = 0.0;
  double apd3_cps = 0.0;
  double apd3_dark_corrected_cps = 0.0;
};

/// Per-point channel rates of a wedge or slit sweep.
struct ScanResult {
  SweepVariable variable = SweepVariable::wedge_position;
  std::vector<ScanPoint> points;
};

}  // namespace wmmzi
