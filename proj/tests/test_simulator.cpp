// Transport and sweep machinery. Branch probabilities are checked against
// analytic products with binomial 3-sigma bounds; the scatter sampler is
// checked against a Simpson-integrated reference CDF (Kolmogorov-Smirnov).

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "wmmzi/simulator.hpp"

using namespace wmmzi;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

InstrumentConfig paper_instrument() {
  InstrumentConfig config;
  config.beam.wavelength_m = 650e-9;
  config.beam.inter_beam_angle_rad = 1.75 * kDeg;
  config.screen.refractive_index = 1.5;
  config.screen.reflection_probability = 0.83;
  config.screen.face_transmission = 0.96;
  config.apd3.collection_efficiency = 0.3;
  config.apd3.dark_rate_cps = 32.0;
  config.magnification = 50.0;
  config.beam_waist_m = 80e-6;
  config.beam_separation_m = 0.0;
  config.fringe_contrast = 0.98;
  return config;
}

EmitterConfig test_emitter(double rate, double duration, std::uint64_t seed) {
  EmitterConfig config;
  config.bright_rate_cps = rate;
  config.antibunch_tau_s = 30e-9;
  config.bright_to_dark_rate_hz = 0.0;
  config.dark_to_bright_rate_hz = 0.0;
  config.duration_s = duration;
  config.seed = seed;
  return config;
}

struct ChannelTally {
  std::size_t apd1 = 0, apd2 = 0, apd3 = 0, lost = 0;
  std::size_t reflected = 0, scattered = 0, reached_prism = 0;
};

ChannelTally transport_many(const InstrumentConfig& config, std::size_t n,
                            std::uint64_t seed) {
  Transporter transporter(config);
  ChannelTally tally;
  for (std::size_t i = 0; i < n; ++i) {
    CounterRng rng(derive_key(seed, stream_tag::transport, i));
    const DetectionEvent event =
        transporter.transport({static_cast<double>(i), EmitterState::bright},
                              rng);
    switch (event.channel) {
      case Channel::apd1: ++tally.apd1; break;
      case Channel::apd2: ++tally.apd2; break;
      case Channel::apd3: ++tally.apd3; break;
      case Channel::lost: ++tally.lost; break;
    }
    if (event.prism_branch == PrismBranch::reflected) ++tally.reflected;
    if (event.prism_branch == PrismBranch::scattered) ++tally.scattered;
    if (event.prism_branch != PrismBranch::none) ++tally.reached_prism;
  }
  return tally;
}

void check_fraction(double observed, double expected, std::size_t n) {
  const double sigma =
      std::sqrt(expected * (1.0 - expected) / static_cast<double>(n));
  CHECK(std::abs(observed - expected) < 3.0 * sigma + 1e-12);
}

}  // namespace

TEST_CASE("wedge phase: zero, linearity and frozen paper-parameter value") {
  const InstrumentConfig config = paper_instrument();
  CHECK(wedge_phase(0.0, config) == 0.0);
  // k (n-1) tan(0.5 deg) per mm at 650 nm = 42.1789 rad = 6.713 fringes
  const double per_mm = wedge_phase(1e-3, config);
  CHECK(per_mm == doctest::Approx(42.17886729).epsilon(1e-8));
  CHECK(per_mm / (2.0 * std::numbers::pi) ==
        doctest::Approx(6.712975).epsilon(1e-6));
  CHECK(wedge_phase(2e-3, config) == doctest::Approx(2.0 * per_mm));
}

TEST_CASE("transport: perfect mirror screen sends photons to the path APDs") {
  InstrumentConfig config = paper_instrument();
  config.screen.reflection_probability = 1.0;  // S = 0
  config.screen.face_transmission = 1.0;
  config.arm1_transmission = 1.0;
  config.arm2_transmission = 1.0;
  const std::size_t n = 200000;
  const ChannelTally tally = transport_many(config, n, 101);
  CHECK(tally.apd3 == 0);
  CHECK(tally.lost == 0);
  CHECK(tally.apd1 + tally.apd2 == n);
  check_fraction(static_cast<double>(tally.apd1) / n, 0.5, n);
}

TEST_CASE("transport: pure scattering screen feeds APD3 through a wide slit") {
  InstrumentConfig config = paper_instrument();
  config.screen.reflection_probability = 0.0;
  config.apd3.collection_efficiency = 1.0;
  config.slit_width_m = 1.0;  // covers the full pattern
  config.magnification = 1.0;
  const std::size_t n = 100000;
  const ChannelTally tally = transport_many(config, n, 202);
  CHECK(tally.reflected == 0);
  CHECK(tally.apd3 == tally.scattered);  // every scattered survivor detected
  CHECK(tally.apd1 + tally.apd2 == 0);
}

TEST_CASE("transport: branch fractions at R = 0.83 with unit efficiencies") {
  InstrumentConfig config = paper_instrument();
  config.arm1_transmission = 1.0;
  config.arm2_transmission = 1.0;
  config.apd3.collection_efficiency = 1.0;
  config.slit_width_m = 1.0;
  config.magnification = 1.0;
  const std::size_t n = 1000000;
  const ChannelTally tally = transport_many(config, n, 303);

  const double t_face = config.screen.face_transmission;
  check_fraction(static_cast<double>(tally.apd1 + tally.apd2) / n,
                 0.83 * t_face * t_face, n);
  // Scattered fraction of the photons that reached the prism surface.
  check_fraction(static_cast<double>(tally.scattered) / tally.reached_prism,
                 0.17, tally.reached_prism);
  // At the prism every photon either reflects or scatters.
  CHECK(tally.reflected + tally.scattered == tally.reached_prism);
}

TEST_CASE("APD3 positions: KS distance below the 1% critical value") {
  // Slit removed (covers everything), M = 1, pure scattering so every
  // surviving photon reports a position.
  InstrumentConfig config = paper_instrument();
  config.beam_waist_m = 100e-6;
  config.beam_separation_m = 80e-6;
  config.fringe_contrast = 0.84;
  config.beam.relative_phase_rad = 1.1;
  config.screen.reflection_probability = 0.0;
  config.apd3.collection_efficiency = 1.0;
  config.slit_width_m = 1.0;
  config.magnification = 1.0;

  const Transporter transporter(config);
  const ScatterSampler& sampler = transporter.sampler();
  const std::size_t n = 1000000;
  std::vector<double> samples;
  samples.reserve(n);
  for (std::size_t i = 0; samples.size() < n; ++i) {
    CounterRng rng(derive_key(404, stream_tag::transport, i));
    const DetectionEvent event =
        transporter.transport({0.0, EmitterState::bright}, rng);
    if (event.channel == Channel::apd3) samples.push_back(event.position_m);
  }
  std::sort(samples.begin(), samples.end());

  // Reference CDF by Simpson integration of the density formula, written
  // out here independently of the sampler's tabulation.
  const double k_fringe =
      scattered_fringe_wavenumber(config.beam, config.screen);
  const double w = config.beam_waist_m;
  const double u1 = -config.beam_separation_m / 2.0;
  const double u2 = config.beam_separation_m / 2.0;
  const auto density = [&](double u) {
    const double g1 = std::exp(-2.0 * (u - u1) * (u - u1) / (w * w));
    const double g2 = std::exp(-2.0 * (u - u2) * (u - u2) / (w * w));
    return g1 + g2 +
           2.0 * config.fringe_contrast * std::sqrt(g1 * g2) *
               std::cos(k_fringe * u + config.beam.relative_phase_rad);
  };
  const double lo = sampler.range_min();
  const double hi = sampler.range_max();
  const std::size_t m = 1 << 21;  // Simpson panels
  const double h = (hi - lo) / static_cast<double>(m);
  std::vector<double> cdf(m + 1, 0.0);
  for (std::size_t i = 1; i <= m; ++i) {
    const double a = lo + (static_cast<double>(i) - 1.0) * h;
    cdf[i] = cdf[i - 1] +
             h / 6.0 * (density(a) + 4.0 * density(a + h / 2.0) +
                        density(a + h));
  }
  const double norm = cdf.back();
  const auto reference_cdf = [&](double u) {
    const double pos = std::clamp((u - lo) / h, 0.0, static_cast<double>(m));
    const auto i = static_cast<std::size_t>(pos);
    if (i >= m) return 1.0;
    const double frac = pos - static_cast<double>(i);
    return (cdf[i] * (1.0 - frac) + cdf[i + 1] * frac) / norm;
  };

  double ks = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double f = reference_cdf(samples[i]);
    const double hi_emp = static_cast<double>(i + 1) / static_cast<double>(n);
    const double lo_emp = static_cast<double>(i) / static_cast<double>(n);
    ks = std::max({ks, std::abs(f - hi_emp), std::abs(f - lo_emp)});
  }
  const double critical = 1.628 / std::sqrt(static_cast<double>(n));  // 1%
  CHECK(ks < critical);
}

TEST_CASE("run_scan: deterministic across repeats and thread counts") {
  const InstrumentConfig config = paper_instrument();
  const EmitterConfig emitter = test_emitter(50000.0, 0.0, 505);
  const std::vector<double> sweep{0.0, 0.05e-3, 0.1e-3, 0.15e-3};

  ScanOptions serial;
  serial.threads = 1;
  ScanOptions parallel;
  parallel.threads = 3;

  const ScanResult a = run_scan(config, emitter, SweepVariable::wedge_position,
                                sweep, 0.2, serial);
  const ScanResult b = run_scan(config, emitter, SweepVariable::wedge_position,
                                sweep, 0.2, serial);
  const ScanResult c = run_scan(config, emitter, SweepVariable::wedge_position,
                                sweep, 0.2, parallel);
  REQUIRE(a.points.size() == sweep.size());
  for (std::size_t i = 0; i < sweep.size(); ++i) {
    CHECK(a.points[i].apd1_counts == b.points[i].apd1_counts);
    CHECK(a.points[i].apd3_counts == b.points[i].apd3_counts);
    CHECK(a.points[i].apd1_counts == c.points[i].apd1_counts);
    CHECK(a.points[i].apd2_counts == c.points[i].apd2_counts);
    CHECK(a.points[i].apd3_counts == c.points[i].apd3_counts);
  }
}

TEST_CASE("run_scan: rates equal counts over integration, dark corrected") {
  InstrumentConfig config = paper_instrument();
  const EmitterConfig emitter = test_emitter(20000.0, 0.0, 606);
  const ScanResult scan = run_scan(config, emitter,
                                   SweepVariable::slit_position,
                                   {0.0, 1e-3}, 0.5);
  for (const auto& point : scan.points) {
    CHECK(point.apd1_cps ==
          doctest::Approx(point.apd1_counts / point.integration_s));
    CHECK(point.apd3_dark_corrected_cps ==
          doctest::Approx(std::max(
              point.apd3_cps - config.apd3.dark_rate_cps, 0.0)));
  }
}

TEST_CASE("run_scan: a silent source leaves only dark counts") {
  InstrumentConfig config = paper_instrument();
  const EmitterConfig emitter = test_emitter(0.0, 0.0, 707);
  const ScanResult scan = run_scan(config, emitter,
                                   SweepVariable::wedge_position,
                                   {0.0, 0.1e-3}, 2.0);
  for (const auto& point : scan.points) {
    CHECK(point.apd1_counts == 0);
    CHECK(point.apd2_counts == 0);
    // APD3 sees its Poisson dark process, 32 cps.
    const double expected = config.apd3.dark_rate_cps * point.integration_s;
    CHECK(std::abs(static_cast<double>(point.apd3_counts) - expected) <
          3.0 * std::sqrt(expected) + 1e-9);
  }
}

TEST_CASE("run_scan: input validation") {
  const InstrumentConfig config = paper_instrument();
  const EmitterConfig emitter = test_emitter(1000.0, 0.0, 808);
  CHECK_THROWS_AS(run_scan(config, emitter, SweepVariable::wedge_position, {},
                           1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_scan(config, emitter, SweepVariable::wedge_position,
                           {0.0, 0.0}, 1.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(run_scan(config, emitter, SweepVariable::wedge_position,
                           {0.0, 1e-3}, 0.0),
                  std::invalid_argument);
}

TEST_CASE("run_calibration: lossless chain returns the source rate") {
  InstrumentConfig config = paper_instrument();
  config.arm1_transmission = 1.0;
  config.arm2_transmission = 1.0;
  const EmitterConfig emitter = test_emitter(100000.0, 0.0, 909);
  const CalibrationResult result = run_calibration(
      config, emitter, CalibrationTarget::mirror, 10.0, 1.0);
  CHECK(result.bright_rate_cps ==
        doctest::Approx(100000.0)
            .epsilon(3.0 / std::sqrt(static_cast<double>(
                         result.bright_detected_counts))));
}

TEST_CASE("run_calibration: prism/mirror ratio follows the face-R-face chain") {
  InstrumentConfig config = paper_instrument();
  config.arm1_transmission = 1.0;
  config.arm2_transmission = 1.0;
  EmitterConfig emitter = test_emitter(106806.0, 0.0, 1010);
  const double mirror_reflectivity = 0.955;

  const CalibrationResult mirror = run_calibration(
      config, emitter, CalibrationTarget::mirror, 20.0, mirror_reflectivity);
  emitter.seed = 1011;
  const CalibrationResult prism = run_calibration(
      config, emitter, CalibrationTarget::prism, 20.0, mirror_reflectivity);

  const double expected_ratio = config.screen.face_transmission *
                                config.screen.face_transmission *
                                config.screen.reflection_probability /
                                mirror_reflectivity;
  const double ratio = prism.bright_rate_cps / mirror.bright_rate_cps;
  const double sigma =
      ratio * std::sqrt(1.0 / static_cast<double>(
                                  mirror.bright_detected_counts) +
                        1.0 / static_cast<double>(
                                  prism.bright_detected_counts));
  CHECK(std::abs(ratio - expected_ratio) < 3.0 * sigma);
}

TEST_CASE("run_calibration: fully scattering screen detects nothing") {
  InstrumentConfig config = paper_instrument();
  config.screen.reflection_probability = 0.0;
  const EmitterConfig emitter = test_emitter(50000.0, 0.0, 1111);
  const CalibrationResult result = run_calibration(
      config, emitter, CalibrationTarget::prism, 5.0);
  CHECK(result.detected_counts == 0);
  CHECK(result.bright_rate_cps == 0.0);
}

TEST_CASE("event log keeps every outcome including losses") {
  InstrumentConfig config = paper_instrument();
  const EmitterConfig emitter = test_emitter(20000.0, 0.0, 1212);
  std::vector<DetectionEvent> events;
  ScanOptions options;
  options.event_log = &events;
  const ScanResult scan = run_scan(config, emitter,
                                   SweepVariable::wedge_position, {0.0}, 0.5,
                                   options);
  std::size_t lost = 0, dark = 0, detected = 0;
  for (const auto& event : events) {
    if (event.channel == Channel::lost) ++lost;
    if (event.provenance == EventSource::dark) ++dark;
    if (event.channel != Channel::lost) ++detected;
    if (event.channel == Channel::apd3 &&
        event.provenance == EventSource::photon) {
      CHECK(std::isfinite(event.position_m));
    } else {
      CHECK(std::isnan(event.position_m));
    }
  }
  CHECK(lost > 0);
  CHECK(dark > 0);
  CHECK(detected == scan.points[0].apd1_counts + scan.points[0].apd2_counts +
                        scan.points[0].apd3_counts);
}
