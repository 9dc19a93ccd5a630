#include "wmmzi/source.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace wmmzi {

namespace {

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

/// Proposal rate lambda such that the renewal process with density
/// proportional to (1 - exp(-dt/tau)) exp(-lambda dt) has mean rate r.
/// The mean rate of that density is lambda (1 + c) / (1 + 2c) with
/// c = lambda tau, so lambda solves tau x^2 + (1 - 2 r tau) x - r = 0.
double calibrated_rate(double rate, double tau) {
  if (rate <= 0.0) return 0.0;
  if (tau <= 0.0) return rate;
  const double b = 1.0 - 2.0 * rate * tau;
  return (-b + std::sqrt(b * b + 4.0 * tau * rate)) / (2.0 * tau);
}

}  // namespace

void EmitterConfig::validate() const {
  require(bright_rate_cps >= 0.0, "EmitterConfig: bright rate must be >= 0");
  require(antibunch_tau_s >= 0.0, "EmitterConfig: antibunch tau must be >= 0");
  require(bright_to_dark_rate_hz >= 0.0,
          "EmitterConfig: bright->dark rate must be >= 0");
  require(dark_to_bright_rate_hz >= 0.0,
          "EmitterConfig: dark->bright rate must be >= 0");
  require(dark_brightness >= 0.0 && dark_brightness < 1.0,
          "EmitterConfig: dark brightness must lie in [0, 1)");
  require(duration_s > 0.0, "EmitterConfig: duration must be positive");
}

double PhotonStream::bright_time_s() const {
  double total = 0.0;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const double end =
        (i + 1 < segments.size()) ? segments[i + 1].start_s : duration_s;
    if (segments[i].state == EmitterState::bright) {
      total += std::min(end, duration_s) - segments[i].start_s;
    }
  }
  return total;
}

PhotonEmitter::PhotonEmitter(const EmitterConfig& config)
    : config_(config),
      emit_rng_(derive_key(config.seed, stream_tag::emission)),
      blink_rng_(derive_key(config.seed, stream_tag::blinking)),
      exp_rate_(calibrated_rate(config.bright_rate_cps, config.antibunch_tau_s)) {
  config_.validate();
  segments_.push_back({0.0, state_});
  if (config_.bright_to_dark_rate_hz > 0.0) {
    next_switch_s_ = blink_rng_.next_exponential(config_.bright_to_dark_rate_hz);
  } else {
    next_switch_s_ = std::numeric_limits<double>::infinity();
  }
}

void PhotonEmitter::advance_blinking(double until_s) {
  while (next_switch_s_ <= until_s) {
    const double switch_time = next_switch_s_;
    state_ = (state_ == EmitterState::bright) ? EmitterState::dark
                                              : EmitterState::bright;
    segments_.push_back({switch_time, state_});
    const double dwell_rate = (state_ == EmitterState::bright)
                                  ? config_.bright_to_dark_rate_hz
                                  : config_.dark_to_bright_rate_hz;
    if (dwell_rate > 0.0) {
      next_switch_s_ = switch_time + blink_rng_.next_exponential(dwell_rate);
    } else {
      next_switch_s_ = std::numeric_limits<double>::infinity();
    }
  }
}

double PhotonEmitter::draw_interval() {
  // Rejection against the Exp(lambda) proposal; the acceptance factor
  // (1 - exp(-dt/tau)) suppresses zero-delay pairs.
  for (;;) {
    const double dt = emit_rng_.next_exponential(exp_rate_);
    if (config_.antibunch_tau_s <= 0.0) return dt;
    if (emit_rng_.next_double() <
        1.0 - std::exp(-dt / config_.antibunch_tau_s)) {
      return dt;
    }
  }
}

std::optional<PhotonRecord> PhotonEmitter::next() {
  if (config_.bright_rate_cps <= 0.0) return std::nullopt;
  for (;;) {
    const double candidate = clock_s_ + draw_interval();
    if (candidate >= config_.duration_s) {
      clock_s_ = config_.duration_s;
      return std::nullopt;
    }
    clock_s_ = candidate;
    advance_blinking(candidate);
    if (state_ == EmitterState::dark &&
        !emit_rng_.next_bernoulli(config_.dark_brightness)) {
      continue;  // thinned away while dark
    }
    return PhotonRecord{candidate, state_};
  }
}

void PhotonEmitter::finish_segments() { advance_blinking(config_.duration_s); }

PhotonStream generate_stream(const EmitterConfig& config) {
  config.validate();
  const double expected = config.bright_rate_cps * config.duration_s;
  if (expected > static_cast<double>(kMaxStreamRecords)) {
    throw std::runtime_error(
        "stream too large: expected ~" +
        std::to_string(static_cast<std::uint64_t>(expected)) +
        " records exceeds budget " + std::to_string(kMaxStreamRecords));
  }

  PhotonStream stream;
  stream.duration_s = config.duration_s;
  PhotonEmitter emitter(config);
  while (auto photon = emitter.next()) {
    stream.records.push_back(*photon);
  }
  emitter.finish_segments();
  stream.segments = emitter.segments();
  return stream;
}

double analytic_g2(double tau_s, const EmitterConfig& config) {
  if (config.antibunch_tau_s <= 0.0) {
    throw std::invalid_argument("analytic_g2: antibunch tau must be positive");
  }
  return 1.0 - std::exp(-std::abs(tau_s) / config.antibunch_tau_s);
}

}  // namespace wmmzi
