// Analysis pipeline: dark correction, bright segmentation, fringe and
// overlap fits, reflectivity calibration, duality metrics, coincidence
// histograms. Synthetic inputs come from the deterministic counter RNG;
// expected values are computed in-test or frozen from hand evaluation.

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "wmmzi/analysis.hpp"
#include "wmmzi/rng.hpp"
#include "wmmzi/source.hpp"

using namespace wmmzi;

namespace {

constexpr double kPi = std::numbers::pi;

// Poisson counts via exponential gaps; fine for the modest means used here.
std::uint64_t poisson(CounterRng& rng, double mean) {
  double t = rng.next_exponential(1.0);
  std::uint64_t n = 0;
  while (t < mean) {
    ++n;
    t += rng.next_exponential(1.0);
  }
  return n;
}

std::vector<double> poisson_tags(CounterRng& rng, double rate,
                                 double duration) {
  std::vector<double> tags;
  double t = rng.next_exponential(rate);
  while (t < duration) {
    tags.push_back(t);
    t += rng.next_exponential(rate);
  }
  return tags;
}

}  // namespace

TEST_CASE("subtract_dark: plain difference and clamped case") {
  CHECK(subtract_dark(532.0, 32.0) == doctest::Approx(500.0));
  CHECK(subtract_dark(123.4, 0.0) == doctest::Approx(123.4));

  WarningLog warnings;
  CHECK(subtract_dark(10.0, 32.0, &warnings) == 0.0);
  REQUIRE(warnings.messages.size() == 1);
  CHECK(warnings.messages[0].find("clamped") != std::string::npos);

  CHECK_THROWS_AS(subtract_dark(-1.0, 0.0), std::invalid_argument);
}

TEST_CASE("segment_bright: recovers a synthetic two-level trace") {
  // Two-state dwell sequence, 100 ms bins, Poisson counts at 100 k / 5 kcps.
  CounterRng rng(2024);
  const double bin_s = 0.1;
  const double bright_cps = 100000.0, dark_cps = 5000.0;
  std::vector<bool> truth;
  std::vector<double> rates;
  bool bright = true;
  double dwell_left = 0.0;
  for (int bin = 0; bin < 600; ++bin) {
    if (dwell_left <= 0.0) {
      bright = !bright;
      dwell_left = rng.next_exponential(bright ? 1.0 : 5.0);
    }
    // Bins that straddle a dwell boundary are excluded from the check below,
    // so the per-bin state here is the state at bin start.
    truth.push_back(bright);
    const double mean = (bright ? bright_cps : dark_cps) * bin_s;
    rates.push_back(static_cast<double>(poisson(rng, mean)) / bin_s);
    dwell_left -= bin_s;
  }

  const std::vector<bool> mask = segment_bright(rates);
  std::size_t mismatches = 0;
  for (std::size_t i = 0; i < mask.size(); ++i) {
    const bool boundary =
        (i > 0 && truth[i] != truth[i - 1]) ||
        (i + 1 < truth.size() && truth[i] != truth[i + 1]);
    if (!boundary && mask[i] != truth[i]) ++mismatches;
  }
  CHECK(mismatches == 0);
}

TEST_CASE("segment_bright: fixed threshold and degenerate traces") {
  const std::vector<double> all_bright(50, 90000.0);
  const std::vector<bool> mask = segment_bright(all_bright, 1000.0);
  CHECK(std::all_of(mask.begin(), mask.end(), [](bool b) { return b; }));

  const std::vector<double> flat(50, 0.0);
  CHECK_THROWS_WITH_AS(segment_bright(flat), "no bright/dark separation found",
                       std::runtime_error);
}

TEST_CASE("fit_fringe: exact recovery of a noise-free sinusoid") {
  const double offset = 100.0, amplitude = 97.0, period = 0.173, phase = 0.9;
  std::vector<double> x, y, err;
  for (int i = 0; i < 40; ++i) {
    x.push_back(0.011 * i);
    y.push_back(offset + amplitude * std::cos(2.0 * kPi * x[i] / period + phase));
    err.push_back(1.0);
  }
  const FringeFit fit = fit_fringe(x, y, err);
  CHECK(fit.visibility == doctest::Approx(0.97).epsilon(1e-9));
  CHECK(fit.offset == doctest::Approx(offset).epsilon(1e-9));
  CHECK(fit.amplitude == doctest::Approx(amplitude).epsilon(1e-9));
  CHECK(fit.period == doctest::Approx(period).epsilon(1e-9));
  CHECK(fit.phase_rad == doctest::Approx(phase).epsilon(1e-7));
  CHECK(fit.reduced_chi2 < 1e-12);
}

TEST_CASE("fit_fringe: constant signal gives zero amplitude and visibility") {
  std::vector<double> x, y, err;
  for (int i = 0; i < 12; ++i) {
    x.push_back(0.05 * i);
    y.push_back(250.0);
    err.push_back(2.0);
  }
  const FringeFit fit = fit_fringe(x, y, err);
  CHECK(fit.amplitude == 0.0);
  CHECK(fit.visibility == 0.0);
  CHECK(fit.offset == doctest::Approx(250.0));
}

TEST_CASE("fit_fringe: too few points") {
  std::vector<double> x{0, 1, 2, 3, 4}, y{1, 2, 1, 2, 1}, e{1, 1, 1, 1, 1};
  CHECK_THROWS_AS(fit_fringe(x, y, e), std::invalid_argument);
}

TEST_CASE("fit_fringe: amplitude above offset clamps at the boundary") {
  // Non-physical input (negative rates at the troughs): the fit itself
  // recovers amplitude > offset, which must clamp to visibility 1.
  std::vector<double> x, y, err;
  for (int i = 0; i < 24; ++i) {
    x.push_back(0.02 * i);
    y.push_back(100.0 + 115.0 * std::cos(2.0 * kPi * x[i] / 0.16));
    err.push_back(1.0);
  }
  WarningLog warnings;
  const FringeFit fit = fit_fringe(x, y, err, &warnings);
  CHECK(fit.amplitude == fit.offset);
  CHECK(fit.visibility == 1.0);
  CHECK(!warnings.messages.empty());
}

TEST_CASE("fit_fringe: scale equivariance") {
  CounterRng rng(5150);
  std::vector<double> x, y, err;
  for (int i = 0; i < 30; ++i) {
    x.push_back(0.013 * i);
    y.push_back(80.0 + 60.0 * std::cos(2.0 * kPi * x[i] / 0.11 + 0.4) +
                (rng.next_double() - 0.5));
    err.push_back(1.0 + rng.next_double());
  }
  const FringeFit base = fit_fringe(x, y, err);
  for (double scale : {3.0, 0.25, 1700.0}) {
    std::vector<double> ys(y), es(err);
    for (auto& v : ys) v *= scale;
    for (auto& v : es) v *= scale;
    const FringeFit scaled = fit_fringe(x, ys, es);
    CHECK(scaled.visibility == doctest::Approx(base.visibility).epsilon(1e-9));
    CHECK(scaled.period == doctest::Approx(base.period).epsilon(1e-9));
    CHECK(scaled.phase_rad == doctest::Approx(base.phase_rad).epsilon(1e-7));
    CHECK(scaled.offset == doctest::Approx(base.offset * scale).epsilon(1e-9));
    CHECK(scaled.amplitude ==
          doctest::Approx(base.amplitude * scale).epsilon(1e-9));
  }
}

TEST_CASE("fit_fringe: Poisson-noised scan recovers the true visibility") {
  // Paper-like statistics: offset ~105 cps x 50 s, 33 points, 2.15 periods.
  const double true_v = 0.972, offset = 105.0, period = 0.1490;
  const double integration = 50.0;
  CounterRng rng(77001);
  std::vector<double> x, y, err;
  for (int i = 0; i < 33; ++i) {
    x.push_back(0.01 * i);
    const double rate =
        offset * (1.0 + true_v * std::cos(2.0 * kPi * x[i] / period + 0.3));
    const double counts =
        static_cast<double>(poisson(rng, rate * integration));
    y.push_back(counts / integration);
    err.push_back(std::sqrt(std::max(counts, 1.0)) / integration);
  }
  const FringeFit fit = fit_fringe(x, y, err);
  CHECK(std::abs(fit.visibility - true_v) < 0.02);
  CHECK(fit.visibility_err < 0.02);
  CHECK(std::abs(fit.period - period) < 0.002);
}

TEST_CASE("fit_lateral: closed-loop recovery from the overlap model") {
  // Expected rates built directly from the density formula integrated over
  // the slit with fine trapezoid panels (independent of the fit's own
  // quadrature), then Poisson-noised.
  const double k_fringe = 2.0 * kPi / 43.007e-6;
  const double waist = 100e-6, separation = 80e-6, contrast = 0.84;
  const double halfwidth = 1.5e-6;
  const double scale = 70.0, phase = 0.65;
  const double integration = 50.0;

  const auto density = [&](double u) {
    const double g1 =
        std::exp(-2.0 * std::pow(u + separation / 2.0, 2) / (waist * waist));
    const double g2 =
        std::exp(-2.0 * std::pow(u - separation / 2.0, 2) / (waist * waist));
    return g1 + g2 + 2.0 * contrast * std::sqrt(g1 * g2) *
                         std::cos(k_fringe * u + phase);
  };
  const auto slit_mean = [&](double center) {
    const int panels = 400;
    double sum = 0.0;
    for (int i = 0; i <= panels; ++i) {
      const double u = center - halfwidth + 2.0 * halfwidth * i / panels;
      sum += density(u) * ((i == 0 || i == panels) ? 0.5 : 1.0);
    }
    return sum / panels;
  };

  CounterRng rng(88002);
  std::vector<double> x, y, err;
  for (int i = -29; i <= 29; ++i) {
    const double u = i * 6e-6;
    x.push_back(u);
    const double rate = scale * slit_mean(u);
    const double counts =
        static_cast<double>(poisson(rng, rate * integration));
    y.push_back(counts / integration);
    err.push_back(std::sqrt(std::max(counts, 1.0)) / integration);
  }

  LateralGeometry geometry;
  geometry.fringe_wavenumber = k_fringe;
  geometry.slit_halfwidth_m = halfwidth;
  geometry.waist_m = waist;
  geometry.separation_m = separation;
  geometry.center_m = 0.0;

  const LateralFit fit = fit_lateral(x, y, err, geometry);
  CHECK(std::abs(fit.fringe.visibility - contrast) < 0.03);
  CHECK(fit.waist_m == doctest::Approx(waist).epsilon(0.08));
  CHECK(fit.separation_m == doctest::Approx(separation).epsilon(0.15));
}

TEST_CASE("fit_lateral: plane-wave limit matches fit_fringe") {
  // Zero separation, waist far beyond the scan, narrow slit: the overlap
  // model degenerates to offset (1 + C cos), which is fit_fringe's model.
  const double k_fringe = 2.0 * kPi / 43.007e-6;
  const double contrast = 0.71, phase = 1.2;
  std::vector<double> x, y, err;
  for (int i = 0; i < 24; ++i) {
    const double u = i * 5e-6;
    x.push_back(u);
    y.push_back(50.0 * (1.0 + contrast * std::cos(k_fringe * u + phase)));
    err.push_back(0.5);
  }

  LateralGeometry geometry;
  geometry.fringe_wavenumber = k_fringe;
  geometry.slit_halfwidth_m = 1e-9;
  geometry.waist_m = 1.0;
  geometry.separation_m = 0.0;
  geometry.center_m = 0.0;

  const LateralFit lateral = fit_lateral(x, y, err, geometry);
  const FringeFit fringe = fit_fringe(x, y, err);
  CHECK(std::abs(lateral.fringe.visibility - fringe.visibility) < 1e-6);
  CHECK(lateral.fringe.visibility == doctest::Approx(contrast).epsilon(1e-6));
}

TEST_CASE("fit_lateral: vanishing fringe term fits zero visibility") {
  CounterRng rng(99003);
  const double waist = 100e-6;
  std::vector<double> x, y, err;
  for (int i = -14; i <= 14; ++i) {
    const double u = i * 12e-6;
    x.push_back(u);
    const double envelope = 2.0 * std::exp(-2.0 * u * u / (waist * waist));
    const double counts = static_cast<double>(poisson(rng, 3000.0 * envelope));
    y.push_back(counts);
    err.push_back(std::sqrt(std::max(counts, 1.0)));
  }
  LateralGeometry geometry;
  geometry.fringe_wavenumber = 2.0 * kPi / 43.007e-6;
  geometry.slit_halfwidth_m = 1.5e-6;
  geometry.waist_m = waist;
  geometry.separation_m = 0.0;
  geometry.center_m = 0.0;
  const LateralFit fit = fit_lateral(x, y, err, geometry);
  CHECK(fit.fringe.visibility <
        std::max(3.0 * fit.fringe.visibility_err, 0.05));
}

TEST_CASE("calibrate_reflectivity: paper chain and invariances") {
  // (81/102) * 0.955 / 0.96^2 = 0.82289751838...
  CHECK(calibrate_reflectivity(102000.0, 81000.0, 0.955, 0.96) ==
        doctest::Approx(0.8228975183823529).epsilon(1e-12));
  CHECK(calibrate_reflectivity(5000.0, 5000.0, 1.0, 1.0) == doctest::Approx(1.0));
  CHECK(calibrate_reflectivity(5000.0, 0.0, 0.955, 0.96) == 0.0);

  // Homogeneous of degree zero in the two count rates.
  for (double scale : {0.01, 3.0, 1e4}) {
    CHECK(calibrate_reflectivity(102000.0 * scale, 81000.0 * scale, 0.955,
                                 0.96) ==
          doctest::Approx(0.8228975183823529).epsilon(1e-12));
  }

  CHECK_THROWS_AS(calibrate_reflectivity(0.0, 100.0, 0.955, 0.96),
                  std::invalid_argument);

  WarningLog warnings;
  CHECK(calibrate_reflectivity(1000.0, 5000.0, 1.0, 1.0, &warnings) == 1.0);
  CHECK(warnings.messages.size() == 1);
}

TEST_CASE("duality_metrics: paper values and monotonicity") {
  CHECK(duality_metrics(0.97, 0.83).duality ==
        doctest::Approx(1.6298).epsilon(1e-12));
  CHECK(duality_metrics(0.84, 0.83).duality ==
        doctest::Approx(1.3945).epsilon(1e-12));
  CHECK(duality_metrics(1.0, 0.0).duality == doctest::Approx(1.0));
  CHECK(duality_metrics(0.0, 0.0).duality == 0.0);

  double prev = -1.0;
  for (int i = 0; i <= 10; ++i) {
    const double v = i / 10.0;
    const double duality = duality_metrics(v, 0.5).duality;
    CHECK(duality > prev);
    prev = duality;
  }
  CHECK_THROWS_AS(duality_metrics(1.2, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(duality_metrics(0.5, -0.1), std::invalid_argument);
}

TEST_CASE("compute_g2: independent Poisson streams sit at 1") {
  CounterRng rng_a(314001), rng_b(314002);
  const std::vector<double> a = poisson_tags(rng_a, 50000.0, 25.0);
  const std::vector<double> b = poisson_tags(rng_b, 50000.0, 25.0);
  const CorrelationHistogram hist = compute_g2(a, b, 10e-9, 200e-9);

  CHECK(hist.tau_s.front() <= -200e-9);
  CHECK(hist.tau_s.back() >= 200e-9);
  double mean = 0.0;
  for (std::size_t i = 0; i < hist.g2.size(); ++i) {
    CHECK(std::abs(hist.g2[i] - 1.0) < 3.0 * hist.sigma[i]);
    mean += hist.g2[i];
  }
  mean /= static_cast<double>(hist.g2.size());
  CHECK(mean == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("compute_g2: split antibunched stream shows the dip") {
  EmitterConfig config;
  config.bright_rate_cps = 100000.0;
  config.antibunch_tau_s = 30e-9;
  config.bright_to_dark_rate_hz = 0.0;
  config.dark_to_bright_rate_hz = 0.0;
  config.duration_s = 30.0;
  config.seed = 424242;
  const PhotonStream stream = generate_stream(config);

  CounterRng splitter(515151);
  std::vector<double> a, b;
  for (const auto& record : stream.records) {
    (splitter.next_bernoulli(0.5) ? a : b).push_back(record.time_s);
  }
  // Window wide enough to hold baseline bins beyond 10 correlation times.
  const CorrelationHistogram hist = compute_g2(a, b, 3e-9, 450e-9);

  CHECK(hist.zero_delay() < 0.5);

  // Pointwise agreement with the analytic dip at a few delays, and a
  // baseline of 1 beyond 10 correlation times.
  const auto bin_at = [&](double tau) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < hist.tau_s.size(); ++i) {
      if (std::abs(hist.tau_s[i] - tau) <
          std::abs(hist.tau_s[best] - tau)) {
        best = i;
      }
    }
    return best;
  };
  for (double tau : {0.0, 30e-9, 60e-9, -30e-9, 120e-9}) {
    const std::size_t i = bin_at(tau);
    CHECK(std::abs(hist.g2[i] - analytic_g2(hist.tau_s[i], config)) <
          3.0 * hist.sigma[i] + 0.02);
  }

  double baseline = 0.0;
  std::size_t n_baseline = 0;
  for (std::size_t i = 0; i < hist.tau_s.size(); ++i) {
    if (std::abs(hist.tau_s[i]) > 10.0 * config.antibunch_tau_s) {
      baseline += hist.g2[i];
      ++n_baseline;
    }
  }
  baseline /= static_cast<double>(n_baseline);
  CHECK(baseline == doctest::Approx(1.0).epsilon(0.02));

  // Dip width: half depth recovered within a couple of correlation times.
  const std::size_t half_bin = bin_at(config.antibunch_tau_s * std::log(2.0));
  CHECK(hist.g2[half_bin] > 0.2);
  CHECK(hist.g2[half_bin] < 0.8);
}

TEST_CASE("compute_g2: exchanging the streams mirrors the delay axis") {
  CounterRng rng_a(717001), rng_b(717002);
  const std::vector<double> a = poisson_tags(rng_a, 30000.0, 4.0);
  const std::vector<double> b = poisson_tags(rng_b, 30000.0, 4.0);
  const CorrelationHistogram ab = compute_g2(a, b, 5e-9, 100e-9);
  const CorrelationHistogram ba = compute_g2(b, a, 5e-9, 100e-9);
  REQUIRE(ab.counts.size() == ba.counts.size());
  const std::size_t n = ab.counts.size();
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(ab.counts[i] == ba.counts[n - 1 - i]);
  }
}

TEST_CASE("compute_g2: identical streams produce a delta-like zero bin") {
  CounterRng rng(606060);
  const std::vector<double> tags = poisson_tags(rng, 20000.0, 5.0);
  const CorrelationHistogram hist = compute_g2(tags, tags, 5e-9, 100e-9);
  CHECK(hist.zero_delay() > 100.0);  // self pairs dominate the zero bin
}

TEST_CASE("compute_g2: input validation") {
  const std::vector<double> good{0.1, 0.2, 0.3};
  const std::vector<double> empty;
  const std::vector<double> unsorted{0.3, 0.1};
  CHECK_THROWS_WITH_AS(compute_g2(empty, good, 1e-9, 1e-8),
                       "compute_g2: empty stream", std::invalid_argument);
  CHECK_THROWS_AS(compute_g2(unsorted, good, 1e-9, 1e-8),
                  std::invalid_argument);
  CHECK_THROWS_AS(compute_g2(good, good, 0.0, 1e-8), std::invalid_argument);
  CHECK_THROWS_AS(compute_g2(good, good, 1e-8, 1e-9), std::invalid_argument);
}
