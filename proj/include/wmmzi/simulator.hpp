#pragma once

#include <cstdint>
#include <vector>

#include "wmmzi/instrument.hpp"
#include "wmmzi/rng.hpp"
#include "wmmzi/source.hpp"

namespace wmmzi {

/// Unnormalized scatter density at surface coordinate u: two equal-waist
/// Gaussian spots plus their interference cross term,
///   G1 + G2 + 2 C sqrt(G1 G2) cos(K u + phi),
/// with G_i = exp(-2 (u - u_i)^2 / w^2). Nonnegative for C <= 1.
double scatter_density(double u, double fringe_wavenumber, double phase,
                       double waist, double center1, double center2,
                       double contrast);

/// Draws scatter positions by inverting a dense tabulation of the density
/// (piecewise-linear between knots). The table spans the beam spots plus
/// three waists of margin and is rebuilt whenever phase or geometry change,
/// i.e. one build per sweep point.
class ScatterSampler {
 public:
  explicit ScatterSampler(const InstrumentConfig& config);

  double sample(CounterRng& rng) const;

  /// Normalized probability density at u (zero outside the table range).
  double density(double u) const;

  double range_min() const { return lo_; }
  double range_max() const { return hi_; }

 private:
  static constexpr std::size_t kIntervals = 65536;

  double lo_ = 0.0;
  double hi_ = 0.0;
  double step_ = 0.0;
  double norm_ = 0.0;                // integral of the unnormalized density
  std::vector<double> pdf_;          // kIntervals + 1 knots, unnormalized
  std::vector<double> cumulative_;   // trapezoid cumulative at knots
};

/// Samples the fate of individual photons through the interferometer:
/// beam splitter, arm attenuation, prism faces, reflect/scatter branch,
/// collection, slit and detection. Build once per instrument setting.
class Transporter {
 public:
  explicit Transporter(const InstrumentConfig& config);

  DetectionEvent transport(const PhotonRecord& photon, CounterRng& rng) const;

  const InstrumentConfig& config() const { return config_; }
  const ScatterSampler& sampler() const { return sampler_; }

 private:
  InstrumentConfig config_;
  ScatterSampler sampler_;
  double slit_lo_u_;
  double slit_hi_u_;
};

struct ScanOptions {
  int threads = 1;
  /// When set, receives every event (photons including lost ones, plus dark
  /// counts) of every point, ordered by point then time.
  std::vector<DetectionEvent>* event_log = nullptr;
};

/// Runs one sweep of the instrument. Per point: emits a fresh photon
/// stream segment, transports every photon, injects per-channel Poisson
/// dark counts and tabulates rates. Every random stream is derived from
/// (emitter.seed, point index, photon index), so results are identical for
/// any thread count.
ScanResult run_scan(const InstrumentConfig& config, const EmitterConfig& emitter,
                    SweepVariable variable, const std::vector<double>& sweep,
                    double integration_s, const ScanOptions& options = {});

enum class CalibrationTarget : std::uint8_t { mirror, prism };

struct CalibrationResult {
  double bright_rate_cps = 0.0;  ///< detected rate during bright dwells
  std::uint64_t detected_counts = 0;
  std::uint64_t bright_detected_counts = 0;
  double bright_time_s = 0.0;
  double duration_s = 0.0;
  double trace_bin_s = 0.1;                 ///< binning of the rate trace
  std::vector<std::uint64_t> trace_counts;  ///< detected counts per bin
};

/// Reflection calibration run: photons go to the path detectors either via
/// a reference mirror (single reflection, no prism faces) or via the full
/// prism chain T_face * R * T_face. Returns the summed APD1+APD2 rate
/// evaluated over the emitter's bright dwells.
CalibrationResult run_calibration(const InstrumentConfig& config,
                                  const EmitterConfig& emitter,
                                  CalibrationTarget target, double duration_s,
                                  double mirror_reflectivity = 0.955);

}  // namespace wmmzi
