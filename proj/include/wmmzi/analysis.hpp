#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace wmmzi {

/// Collects non-fatal analysis warnings (clamped corrections, out-of-range
/// calibrations). Passed as an optional sink; a null sink drops messages.
struct WarningLog {
  std::vector<std::string> messages;
  void add(std::string message) { messages.push_back(std::move(message)); }
};

/// Dark-corrected rate max(measured - dark, 0). Clamping records a warning
/// instead of failing.
double subtract_dark(double measured_cps, double dark_cps,
                     WarningLog* warnings = nullptr);

/// Classifies trace bins as bright using a threshold at the midpoint of the
/// two modes of the rate histogram; pass fixed_threshold to override.
/// Throws when the default policy finds no bright/dark separation.
std::vector<bool> segment_bright(std::span<const double> bin_rates,
                                 std::optional<double> fixed_threshold = {});

/// Sinusoid fit of a fringe trace. visibility = amplitude / offset.
struct FringeFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double period = 0.0;      // in sweep units
  double phase_rad = 0.0;
  double visibility = 0.0;
  double offset_err = 0.0;
  double amplitude_err = 0.0;
  double period_err = 0.0;
  double phase_err = 0.0;
  double visibility_err = 0.0;
  double reduced_chi2 = 0.0;
};

/// Weighted least-squares fit of offset + amplitude cos(2 pi x / period +
/// phase). The period is seeded from the dominant peak of a discrete
/// spectrum scan, then refined together with the other parameters.
/// Requires at least 6 points spanning at least one period; throws on
/// non-convergence with the best residual in the message.
FringeFit fit_fringe(std::span<const double> sweep_values,
                     std::span<const double> rates_cps,
                     std::span<const double> rate_errors_cps,
                     WarningLog* warnings = nullptr);

/// Known geometry and starting values for the Gaussian-overlap fit. All
/// lengths are in the surface (object) coordinate.
struct LateralGeometry {
  double fringe_wavenumber = 0.0;  ///< K of the scattered pattern
  double slit_halfwidth_m = 0.0;   ///< slit half-width referred to the surface
  double waist_m = 0.0;            ///< initial guess
  double separation_m = 0.0;       ///< initial guess
  double center_m = 0.0;           ///< initial guess
};

struct LateralFit {
  FringeFit fringe;       ///< visibility = plane-wave-equivalent contrast
  double waist_m = 0.0;
  double separation_m = 0.0;
  double center_m = 0.0;
};

/// Fit of a lateral slit scan with the two-Gaussian-beam overlap model
/// (equal waists, cross-term fringe, rectangular slit acceptance). The
/// reported visibility is the fitted cross-term contrast, i.e. the fringe
/// visibility the same beams would show if fully overlapping plane waves.
/// Requires at least 10 points.
LateralFit fit_lateral(std::span<const double> slit_positions_m,
                       std::span<const double> rates_cps,
                       std::span<const double> rate_errors_cps,
                       const LateralGeometry& geometry,
                       WarningLog* warnings = nullptr);

/// Evaluates the fitted overlap model at a slit position (same object
/// coordinates as the fit); used for plotting fit overlays.
double lateral_fit_model(double slit_position_m, const LateralFit& fit,
                         const LateralGeometry& geometry);

/// Screen reflectivity from the mirror-referenced intensity comparison:
///   R = (I_prism / I_mirror) * R_mirror / T_face^2.
/// Clamps to [0, 1] with a warning when the inputs are inconsistent.
double calibrate_reflectivity(double mirror_cps, double prism_cps,
                              double mirror_reflectivity,
                              double face_transmission,
                              WarningLog* warnings = nullptr);

struct DualityMetrics {
  double visibility = 0.0;
  double distinguishability = 0.0;
  double duality = 0.0;  ///< V^2 + D^2
};

/// Duality metrics with the path distinguishability taken as the screen
/// reflectivity, D = R.
DualityMetrics duality_metrics(double visibility, double reflectivity);

/// Normalized coincidence histogram. Bins cover [-window, +window]; the
/// normalization uses the uncorrelated-coincidence baseline, so flat
/// uncorrelated streams give 1.
struct CorrelationHistogram {
  double bin_width_s = 0.0;
  double window_s = 0.0;
  std::vector<double> tau_s;            // bin centers
  std::vector<std::uint64_t> counts;
  std::vector<double> g2;
  std::vector<double> sigma;            // Poisson error per bin

  /// g2 of the bin containing tau = 0.
  double zero_delay() const;
};

/// All-pairs (start-stop-free) coincidence histogram of delays b - a within
/// the window, normalized by rate_a * rate_b * bin * duration. Feeding the
/// identical stream to both inputs keeps the self-pairs at zero delay, which
/// shows up as a delta-like zero bin; that mode is a sanity check only.
CorrelationHistogram compute_g2(std::span<const double> tags_a_s,
                                std::span<const double> tags_b_s,
                                double bin_width_s, double window_s);

}  // namespace wmmzi
