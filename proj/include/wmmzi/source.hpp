#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "wmmzi/rng.hpp"

namespace wmmzi {

enum class EmitterState : std::uint8_t { bright, dark };

/// One emitted photon: when it left the source and which brightness state
/// the emitter occupied at that instant.
struct PhotonRecord {
  double time_s;
  EmitterState state;
};

/// One dwell interval of the two-state blinking process.
struct BlinkSegment {
  double start_s;
  EmitterState state;
};

/// Blinking, antibunched single-photon emitter (colloidal quantum dot
/// behind a single-mode fiber).
struct EmitterConfig {
  double bright_rate_cps = 100000.0;      ///< mean emission rate while bright
  double antibunch_tau_s = 30e-9;         ///< correlation time of the g2 dip
  double bright_to_dark_rate_hz = 1.0;    ///< 0 disables blinking
  double dark_to_bright_rate_hz = 5.0;
  double dark_brightness = 0.05;          ///< dark-state rate relative to bright
  double duration_s = 1.0;
  std::uint64_t seed = 0;

  void validate() const;
};

struct PhotonStream {
  std::vector<PhotonRecord> records;
  std::vector<BlinkSegment> segments;  ///< cover [0, duration), sorted
  double duration_s = 0.0;

  double bright_time_s() const;
};

/// Largest record count generate_stream will materialize.
inline constexpr std::uint64_t kMaxStreamRecords = 100000000;

/// Incremental photon generator. Emission is a renewal process whose
/// inter-arrival density is proportional to
///   (1 - exp(-dt/tau)) * exp(-lambda dt),
/// i.e. Poissonian arrivals with the zero-delay suppression of a single
/// two-level emitter. lambda is calibrated so the delivered mean rate in
/// the bright state equals the configured rate exactly. Blinking thins the
/// stream to dark_brightness while the two-state Markov chain is dark.
///
/// Consumes two derived counter streams (dwell times and emission), so the
/// produced sequence depends only on the seed.
class PhotonEmitter {
 public:
  explicit PhotonEmitter(const EmitterConfig& config);

  /// Next photon, or nullopt once the configured duration is exhausted.
  std::optional<PhotonRecord> next();

  /// Blink dwell segments generated so far (grown lazily as time advances).
  const std::vector<BlinkSegment>& segments() const { return segments_; }

  /// Extends the blink timeline to cover the full duration; call after the
  /// last photon when the complete segment list is needed.
  void finish_segments();

  const EmitterConfig& config() const { return config_; }

 private:
  void advance_blinking(double until_s);
  double draw_interval();

  EmitterConfig config_;
  CounterRng emit_rng_;
  CounterRng blink_rng_;
  double exp_rate_;              // calibrated proposal rate
  double clock_s_ = 0.0;         // time of the last candidate
  double next_switch_s_;
  EmitterState state_ = EmitterState::bright;
  std::vector<BlinkSegment> segments_;
};

/// Materializes a full stream. Throws when the expected record count
/// exceeds kMaxStreamRecords.
PhotonStream generate_stream(const EmitterConfig& config);

/// Second-order correlation of an ideal antibunched emitter,
///   g2(tau) = 1 - exp(-|tau|/tau_c).
double analytic_g2(double tau_s, const EmitterConfig& config);

}  // namespace wmmzi
