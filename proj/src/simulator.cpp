#include "wmmzi/simulator.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace wmmzi {

double scatter_density(double u, double fringe_wavenumber, double phase,
                       double waist, double center1, double center2,
                       double contrast) {
  const double w2 = waist * waist;
  const double g1 = std::exp(-2.0 * (u - center1) * (u - center1) / w2);
  const double g2 = std::exp(-2.0 * (u - center2) * (u - center2) / w2);
  const double cross = 2.0 * contrast * std::sqrt(g1 * g2) *
                       std::cos(fringe_wavenumber * u + phase);
  return g1 + g2 + cross;
}

ScatterSampler::ScatterSampler(const InstrumentConfig& config) {
  config.validate();
  const double k_fringe = scattered_fringe_wavenumber(config.beam, config.screen);
  const double phase = total_phase(config);
  const double half_sep = config.beam_separation_m / 2.0;
  lo_ = -half_sep - 3.0 * config.beam_waist_m;
  hi_ = half_sep + 3.0 * config.beam_waist_m;
  step_ = (hi_ - lo_) / static_cast<double>(kIntervals);

  pdf_.resize(kIntervals + 1);
  cumulative_.resize(kIntervals + 1);
  for (std::size_t i = 0; i <= kIntervals; ++i) {
    pdf_[i] = scatter_density(lo_ + step_ * static_cast<double>(i), k_fringe,
                              phase, config.beam_waist_m, -half_sep, half_sep,
                              config.fringe_contrast);
  }
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i <= kIntervals; ++i) {
    cumulative_[i] = cumulative_[i - 1] + 0.5 * (pdf_[i - 1] + pdf_[i]) * step_;
  }
  norm_ = cumulative_.back();
  if (!(norm_ > 0.0)) {
    throw std::invalid_argument("ScatterSampler: density integrates to zero");
  }
}

double ScatterSampler::sample(CounterRng& rng) const {
  const double target = rng.next_double() * norm_;
  const auto it =
      std::upper_bound(cumulative_.begin(), cumulative_.end(), target);
  const std::size_t hi_idx = std::min<std::size_t>(
      static_cast<std::size_t>(it - cumulative_.begin()), kIntervals);
  const std::size_t i = hi_idx - 1;

  // Invert the quadratic CDF of the linear density segment.
  const double f0 = pdf_[i];
  const double f1 = pdf_[i + 1];
  const double area = target - cumulative_[i];
  const double df = f1 - f0;
  double s;
  if (std::abs(df) * step_ < 1e-12 * (f0 + f1 + 1e-300)) {
    s = (f0 > 0.0) ? area / (f0 * step_) : 0.5;
  } else {
    const double disc = f0 * f0 + 2.0 * df * area / step_;
    s = (-f0 + std::sqrt(std::max(disc, 0.0))) / df;
  }
  s = std::clamp(s, 0.0, 1.0);
  return lo_ + (static_cast<double>(i) + s) * step_;
}

double ScatterSampler::density(double u) const {
  if (u < lo_ || u > hi_) return 0.0;
  const double pos = (u - lo_) / step_;
  const std::size_t i =
      std::min(static_cast<std::size_t>(pos), kIntervals - 1);
  const double s = pos - static_cast<double>(i);
  return (pdf_[i] * (1.0 - s) + pdf_[i + 1] * s) / norm_;
}

Transporter::Transporter(const InstrumentConfig& config)
    : config_(config), sampler_(config) {
  config_.validate();
  const double half = config_.slit_width_m / 2.0;
  slit_lo_u_ = (config_.slit_center_m - half) / config_.magnification;
  slit_hi_u_ = (config_.slit_center_m + half) / config_.magnification;
}

DetectionEvent Transporter::transport(const PhotonRecord& photon,
                                      CounterRng& rng) const {
  DetectionEvent event;
  event.time_s = photon.time_s;

  const bool arm1 = rng.next_bernoulli(config_.beam_splitter_reflectance);
  const double arm_transmission =
      arm1 ? config_.arm1_transmission : config_.arm2_transmission;
  if (!rng.next_bernoulli(arm_transmission)) return event;
  if (!rng.next_bernoulli(config_.screen.face_transmission)) return event;

  if (rng.next_bernoulli(config_.screen.reflection_probability)) {
    event.prism_branch = PrismBranch::reflected;
    if (!rng.next_bernoulli(config_.screen.face_transmission)) return event;
    const DetectionConfig& det = arm1 ? config_.apd1 : config_.apd2;
    if (!rng.next_bernoulli(det.collection_efficiency *
                            det.detector_efficiency)) {
      return event;
    }
    event.channel = arm1 ? Channel::apd1 : Channel::apd2;
    return event;
  }

  event.prism_branch = PrismBranch::scattered;
  if (!rng.next_bernoulli(config_.apd3.collection_efficiency)) return event;
  const double u = sampler_.sample(rng);
  if (u < slit_lo_u_ || u > slit_hi_u_) return event;
  if (!rng.next_bernoulli(config_.apd3.detector_efficiency)) return event;
  event.channel = Channel::apd3;
  event.position_m = u;
  return event;
}

namespace {

struct PointResult {
  ScanPoint point;
  std::vector<DetectionEvent> events;
};

PointResult run_point(const InstrumentConfig& config,
                      const EmitterConfig& emitter_template,
                      std::uint64_t master_seed, std::size_t point_index,
                      SweepVariable variable, double sweep_value,
                      double integration_s, bool keep_events) {
  InstrumentConfig point_config = config;
  if (variable == SweepVariable::wedge_position) {
    point_config.wedge_position_m = sweep_value;
  } else {
    point_config.slit_center_m = sweep_value;
  }

  EmitterConfig emitter_config = emitter_template;
  emitter_config.duration_s = integration_s;
  emitter_config.seed =
      derive_key(master_seed, stream_tag::emission, point_index);

  PointResult result;
  result.point.sweep_value = sweep_value;
  result.point.integration_s = integration_s;

  Transporter transporter(point_config);
  PhotonEmitter emitter(emitter_config);
  std::uint64_t photon_index = 0;
  while (auto photon = emitter.next()) {
    CounterRng rng(
        derive_key(master_seed, stream_tag::transport, point_index, photon_index));
    ++photon_index;
    const DetectionEvent event = transporter.transport(*photon, rng);
    switch (event.channel) {
      case Channel::apd1: ++result.point.apd1_counts; break;
      case Channel::apd2: ++result.point.apd2_counts; break;
      case Channel::apd3: ++result.point.apd3_counts; break;
      case Channel::lost: break;
    }
    if (keep_events) result.events.push_back(event);
  }

  const DetectionConfig* channels[3] = {&point_config.apd1, &point_config.apd2,
                                        &point_config.apd3};
  for (std::size_t ch = 0; ch < 3; ++ch) {
    if (channels[ch]->dark_rate_cps <= 0.0) continue;
    CounterRng rng(derive_key(master_seed, stream_tag::dark_counts, point_index,
                              ch));
    double t = rng.next_exponential(channels[ch]->dark_rate_cps);
    while (t < integration_s) {
      DetectionEvent event;
      event.time_s = t;
      event.channel = static_cast<Channel>(ch);
      event.provenance = EventSource::dark;
      switch (event.channel) {
        case Channel::apd1: ++result.point.apd1_counts; break;
        case Channel::apd2: ++result.point.apd2_counts; break;
        case Channel::apd3: ++result.point.apd3_counts; break;
        case Channel::lost: break;
      }
      if (keep_events) result.events.push_back(event);
      t += rng.next_exponential(channels[ch]->dark_rate_cps);
    }
  }
  if (keep_events) {
    std::stable_sort(result.events.begin(), result.events.end(),
                     [](const DetectionEvent& a, const DetectionEvent& b) {
                       return a.time_s < b.time_s;
                     });
  }

  result.point.apd1_cps =
      static_cast<double>(result.point.apd1_counts) / integration_s;
  result.point.apd2_cps =
      static_cast<double>(result.point.apd2_counts) / integration_s;
  result.point.apd3_cps =
      static_cast<double>(result.point.apd3_counts) / integration_s;
  result.point.apd3_dark_corrected_cps =
      std::max(result.point.apd3_cps - point_config.apd3.dark_rate_cps, 0.0);
  return result;
}

}  // namespace

ScanResult run_scan(const InstrumentConfig& config, const EmitterConfig& emitter,
                    SweepVariable variable, const std::vector<double>& sweep,
                    double integration_s, const ScanOptions& options) {
  config.validate();
  if (sweep.empty()) {
    throw std::invalid_argument("run_scan: sweep must be non-empty");
  }
  for (std::size_t i = 1; i < sweep.size(); ++i) {
    if (!(sweep[i] > sweep[i - 1])) {
      throw std::invalid_argument("run_scan: sweep values must be strictly increasing");
    }
  }
  if (!(integration_s > 0.0)) {
    throw std::invalid_argument("run_scan: integration time must be positive");
  }
  if (emitter.bright_rate_cps * integration_s >
      static_cast<double>(kMaxStreamRecords)) {
    throw std::runtime_error(
        "stream too large: a sweep point would exceed the record budget " +
        std::to_string(kMaxStreamRecords));
  }

  const bool keep_events = options.event_log != nullptr;
  std::vector<PointResult> results(sweep.size());

  const int threads =
      std::max(1, std::min<int>(options.threads,
                                static_cast<int>(sweep.size())));
  if (threads == 1) {
    for (std::size_t i = 0; i < sweep.size(); ++i) {
      results[i] = run_point(config, emitter, emitter.seed, i, variable,
                             sweep[i], integration_s, keep_events);
    }
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= sweep.size()) return;
        results[i] = run_point(config, emitter, emitter.seed, i, variable,
                               sweep[i], integration_s, keep_events);
      }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  ScanResult scan;
  scan.variable = variable;
  scan.points.reserve(sweep.size());
  for (auto& result : results) {
    scan.points.push_back(result.point);
    if (keep_events) {
      options.event_log->insert(options.event_log->end(),
                                result.events.begin(), result.events.end());
    }
  }
  return scan;
}

CalibrationResult run_calibration(const InstrumentConfig& config,
                                  const EmitterConfig& emitter,
                                  CalibrationTarget target, double duration_s,
                                  double mirror_reflectivity) {
  config.validate();
  if (!(duration_s > 0.0)) {
    throw std::invalid_argument("run_calibration: duration must be positive");
  }
  if (mirror_reflectivity <= 0.0 || mirror_reflectivity > 1.0) {
    throw std::invalid_argument(
        "run_calibration: mirror reflectivity must lie in (0, 1]");
  }

  EmitterConfig emitter_config = emitter;
  emitter_config.duration_s = duration_s;

  CalibrationResult result;
  result.duration_s = duration_s;
  result.trace_counts.assign(
      static_cast<std::size_t>(std::ceil(duration_s / result.trace_bin_s)), 0);

  PhotonEmitter source(emitter_config);
  std::uint64_t photon_index = 0;
  while (auto photon = source.next()) {
    CounterRng rng(derive_key(emitter_config.seed, stream_tag::transport,
                              photon_index));
    ++photon_index;

    const bool arm1 = rng.next_bernoulli(config.beam_splitter_reflectance);
    const double arm_transmission =
        arm1 ? config.arm1_transmission : config.arm2_transmission;
    if (!rng.next_bernoulli(arm_transmission)) continue;

    bool reflected;
    if (target == CalibrationTarget::mirror) {
      reflected = rng.next_bernoulli(mirror_reflectivity);
    } else {
      reflected = rng.next_bernoulli(config.screen.face_transmission) &&
                  rng.next_bernoulli(config.screen.reflection_probability) &&
                  rng.next_bernoulli(config.screen.face_transmission);
    }
    if (!reflected) continue;

    const DetectionConfig& det = arm1 ? config.apd1 : config.apd2;
    if (!rng.next_bernoulli(det.collection_efficiency *
                            det.detector_efficiency)) {
      continue;
    }
    ++result.detected_counts;
    if (photon->state == EmitterState::bright) ++result.bright_detected_counts;
    const auto bin = std::min(
        static_cast<std::size_t>(photon->time_s / result.trace_bin_s),
        result.trace_counts.size() - 1);
    ++result.trace_counts[bin];
  }

  source.finish_segments();
  PhotonStream timeline;
  timeline.segments = source.segments();
  timeline.duration_s = duration_s;
  result.bright_time_s = timeline.bright_time_s();
  result.bright_rate_cps =
      result.bright_time_s > 0.0
          ? static_cast<double>(result.bright_detected_counts) /
                result.bright_time_s
          : 0.0;
  return result;
}

}  // namespace wmmzi
