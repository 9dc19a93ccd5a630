#include "wmmzi/wave_model.hpp"

#include <cmath>
#include <stdexcept>

namespace wmmzi {

namespace {
constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}
}  // namespace

void BeamPairConfig::validate() const {
  require(wavelength_m > 0.0, "BeamPairConfig: wavelength must be positive");
  require(inter_beam_angle_rad > 0.0 && inter_beam_angle_rad < kPi / 4.0,
          "BeamPairConfig: inter-beam angle must lie in (0, pi/4)");
  require(input_intensity() >= 0.0, "BeamPairConfig: intensity must be >= 0");
}

double PrismScreen::reflection_amplitude() const {
  return std::sqrt(reflection_probability);
}

double PrismScreen::scattering_amplitude() const {
  return std::sqrt(scattering_probability());
}

void PrismScreen::validate() const {
  require(refractive_index >= 1.0, "PrismScreen: refractive index must be >= 1");
  require(reflection_probability >= 0.0 && reflection_probability <= 1.0,
          "PrismScreen: reflection probability must lie in [0, 1]");
  require(face_transmission > 0.0 && face_transmission <= 1.0,
          "PrismScreen: face transmission must lie in (0, 1]");
}

void DetectionConfig::validate() const {
  require(collection_efficiency >= 0.0 && collection_efficiency <= 1.0,
          "DetectionConfig: collection efficiency must lie in [0, 1]");
  require(detector_efficiency >= 0.0 && detector_efficiency <= 1.0,
          "DetectionConfig: detector efficiency must lie in [0, 1]");
  require(dark_rate_cps >= 0.0, "DetectionConfig: dark rate must be >= 0");
}

double refraction_angle(double refractive_index, double external_angle_rad) {
  if (refractive_index < 1.0) {
    throw std::invalid_argument("refraction_angle: index must be >= 1");
  }
  if (std::abs(external_angle_rad) >= kPi / 2.0) {
    throw std::invalid_argument("refraction_angle: |angle| must be < pi/2");
  }
  return std::asin(std::sin(external_angle_rad) / refractive_index);
}

PathIntensities path_output_intensity(const BeamPairConfig& beam,
                                      const PrismScreen& screen) {
  const double p = screen.reflection_probability * beam.input_intensity();
  return {p, p};
}

double scattered_fringe_wavenumber(const BeamPairConfig& beam,
                                   const PrismScreen& screen) {
  const double n = screen.refractive_index;
  const double theta1 = refraction_angle(n, beam.inter_beam_angle_rad);
  return beam.wavenumber() * n * (std::sin(theta1) + std::cos(theta1) - 1.0) /
         2.0;
}

double scattered_intensity(double surface_coord_m, const BeamPairConfig& beam,
                           const PrismScreen& screen,
                           const DetectionConfig& detection) {
  const double k_fringe = scattered_fringe_wavenumber(beam, screen);
  const double prefactor = 8.0 * screen.scattering_probability() *
                           detection.collection_efficiency *
                           beam.input_intensity();
  return prefactor *
         (1.0 + std::cos(k_fringe * surface_coord_m + beam.relative_phase_rad));
}

double fringe_period(const BeamPairConfig& beam, const PrismScreen& screen) {
  if (beam.inter_beam_angle_rad == 0.0) {
    throw std::invalid_argument("degenerate geometry: no spatial fringes");
  }
  const double n = screen.refractive_index;
  const double theta1 = refraction_angle(n, beam.inter_beam_angle_rad);
  return 2.0 * beam.wavelength_m /
         (n * (std::sin(theta1) + std::cos(theta1) - 1.0));
}

double ideal_visibility(const BeamPairConfig& beam, const PrismScreen& screen) {
  if (screen.scattering_probability() <= 0.0) {
    throw std::invalid_argument("no scattered signal");
  }
  // The pattern is a pure cosine: extremes sit at fringe argument 0 and pi.
  const double k_fringe = scattered_fringe_wavenumber(beam, screen);
  const double d_max = -beam.relative_phase_rad / k_fringe;
  const double d_min = d_max + fringe_period(beam, screen) / 2.0;
  DetectionConfig unit;
  const double i_max = scattered_intensity(d_max, beam, screen, unit);
  const double i_min = scattered_intensity(d_min, beam, screen, unit);
  return (i_max - i_min) / (i_max + i_min);
}

double two_beam_visibility(double amplitude_a, double amplitude_b) {
  const double denom = amplitude_a * amplitude_a + amplitude_b * amplitude_b;
  if (denom <= 0.0) {
    throw std::invalid_argument("no scattered signal");
  }
  return 2.0 * amplitude_a * amplitude_b / denom;
}

}  // namespace wmmzi
