#pragma once

#include <numbers>

namespace wmmzi {

/// Two single-photon beams incident on the prism hypotenuse with a small
/// angle difference. Holds the amplitude, wavelength and relative phase of
/// the pair; wavenumber and input intensity are derived so they can never
/// drift out of sync with the wavelength.
struct BeamPairConfig {
  double amplitude = 1.0;            ///< psi0, sqrt of the input intensity
  double wavelength_m = 650e-9;
  double inter_beam_angle_rad = 0.030543261909900768;  ///< theta, 1.75 deg
  double relative_phase_rad = 0.0;   ///< phi, phase of arm 1 vs arm 2

  double wavenumber() const { return 2.0 * std::numbers::pi / wavelength_m; }
  double input_intensity() const { return amplitude * amplitude; }  ///< P0

  /// Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

/// Weakly scattering total-internal-reflection screen: the milk-coated
/// prism hypotenuse. Stores the reflection probability R; the scattering
/// probability is defined as S = 1 - R so the two always sum to one.
struct PrismScreen {
  double refractive_index = 1.5;
  double reflection_probability = 0.83;  ///< R = |r|^2
  double face_transmission = 0.96;       ///< per right-angle face

  double scattering_probability() const { return 1.0 - reflection_probability; }
  double reflection_amplitude() const;   ///< r = sqrt(R)
  double scattering_amplitude() const;   ///< s = sqrt(S)
  /// Evanescent amplitude factor t = 1 + r, in [1, 2].
  double evanescent_amplitude() const { return 1.0 + reflection_amplitude(); }

  void validate() const;
};

/// Collection and detection of one APD channel.
struct DetectionConfig {
  double collection_efficiency = 1.0;  ///< A, includes optics throughput
  double detector_efficiency = 1.0;    ///< eta
  double dark_rate_cps = 0.0;

  void validate() const;
};

/// Internal refraction angle from Snell's law, n sin(theta1) = sin(theta).
/// Monotone in theta; returns theta itself for n = 1.
double refraction_angle(double refractive_index, double external_angle_rad);

struct PathIntensities {
  double path1;
  double path2;
};

/// Intensities of the two reflected output paths, R * P0 each. Independent
/// of phase and surface position: the which-path channels carry no fringe.
PathIntensities path_output_intensity(const BeamPairConfig& beam,
                                      const PrismScreen& screen);

/// Spatial angular frequency of the interference pattern in the surface
/// coordinate d = x - y: K = k n (sin theta1 + cos theta1 - 1) / 2.
double scattered_fringe_wavenumber(const BeamPairConfig& beam,
                                   const PrismScreen& screen);

/// Scattered intensity at surface coordinate d = x - y:
///   8 S A P0 { 1 + cos(K d + phi) }.
/// Bounded by [0, 16 S A P0].
double scattered_intensity(double surface_coord_m, const BeamPairConfig& beam,
                           const PrismScreen& screen,
                           const DetectionConfig& detection);

/// Spacing of adjacent intensity maxima in d = x - y:
///   2 lambda / [n (sin theta1 + cos theta1 - 1)].
/// Throws for a degenerate zero inter-beam angle (period diverges).
double fringe_period(const BeamPairConfig& beam, const PrismScreen& screen);

/// (I_max - I_min) / (I_max + I_min) of the scattered pattern over one
/// period; exactly 1 for the equal-amplitude two-beam model. Throws when
/// S = 0 (no scattered signal to observe).
double ideal_visibility(const BeamPairConfig& beam, const PrismScreen& screen);

/// Fringe contrast of two interfering beams with unequal amplitudes a, b:
///   2 a b / (a^2 + b^2).
double two_beam_visibility(double amplitude_a, double amplitude_b);

}  // namespace wmmzi
