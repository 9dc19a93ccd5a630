#include "wmmzi/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "wmmzi/fit.hpp"

namespace wmmzi {

namespace {

constexpr double kPi = std::numbers::pi;

void require(bool ok, const char* message) {
  if (!ok) throw std::invalid_argument(message);
}

double wrap_phase(double phase) {
  phase = std::fmod(phase, 2.0 * kPi);
  if (phase > kPi) phase -= 2.0 * kPi;
  if (phase <= -kPi) phase += 2.0 * kPi;
  return phase;
}

// 16-point Gauss-Legendre rule on [-1, 1].
constexpr double kGlNode[8] = {
    0.0950125098376374, 0.2816035507792589, 0.4580167776572274,
    0.6178762444026438, 0.7554044083550030, 0.8656312023878318,
    0.9445750230732326, 0.9894009349916499};
constexpr double kGlWeight[8] = {
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025,
    0.1495959888165767, 0.1246289712555339, 0.0951585116824928,
    0.0622535239386479, 0.0271524594117541};

}  // namespace

double subtract_dark(double measured_cps, double dark_cps,
                     WarningLog* warnings) {
  require(measured_cps >= 0.0 && dark_cps >= 0.0,
          "subtract_dark: rates must be >= 0");
  const double corrected = measured_cps - dark_cps;
  if (corrected < 0.0) {
    if (warnings) {
      std::ostringstream msg;
      msg << "dark correction clamped to 0 (measured " << measured_cps
          << " cps below dark rate " << dark_cps << " cps)";
      warnings->add(msg.str());
    }
    return 0.0;
  }
  return corrected;
}

std::vector<bool> segment_bright(std::span<const double> bin_rates,
                                 std::optional<double> fixed_threshold) {
  require(!bin_rates.empty(), "segment_bright: trace must be non-empty");

  double threshold;
  if (fixed_threshold) {
    threshold = *fixed_threshold;
  } else {
    const auto [lo_it, hi_it] =
        std::minmax_element(bin_rates.begin(), bin_rates.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (!(hi > lo)) {
      throw std::runtime_error("no bright/dark separation found");
    }

    constexpr std::size_t kBins = 64;
    std::vector<double> hist(kBins, 0.0);
    const double width = (hi - lo) / static_cast<double>(kBins);
    for (double rate : bin_rates) {
      auto idx = static_cast<std::size_t>((rate - lo) / width);
      hist[std::min(idx, kBins - 1)] += 1.0;
    }
    // Light smoothing so Poisson scatter does not fragment the modes.
    for (int pass = 0; pass < 3; ++pass) {
      std::vector<double> smooth(kBins);
      for (std::size_t i = 0; i < kBins; ++i) {
        const double left = (i > 0) ? hist[i - 1] : hist[i];
        const double right = (i + 1 < kBins) ? hist[i + 1] : hist[i];
        smooth[i] = 0.25 * left + 0.5 * hist[i] + 0.25 * right;
      }
      hist.swap(smooth);
    }

    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < kBins; ++i) {
      const double left = (i > 0) ? hist[i - 1] : -1.0;
      const double right = (i + 1 < kBins) ? hist[i + 1] : -1.0;
      if (hist[i] > left && hist[i] >= right && hist[i] > 0.0) {
        peaks.push_back(i);
      }
    }
    std::sort(peaks.begin(), peaks.end(),
              [&](std::size_t a, std::size_t b) { return hist[a] > hist[b]; });

    // The two modes must be well separated, not shoulders of one cluster.
    constexpr std::size_t kMinSeparation = kBins / 8;
    std::optional<std::size_t> second;
    if (!peaks.empty()) {
      for (std::size_t i = 1; i < peaks.size(); ++i) {
        const auto gap = peaks[i] > peaks[0] ? peaks[i] - peaks[0]
                                             : peaks[0] - peaks[i];
        if (gap >= kMinSeparation) {
          second = peaks[i];
          break;
        }
      }
    }
    if (!second) {
      throw std::runtime_error("no bright/dark separation found");
    }
    const double center_a = lo + (static_cast<double>(peaks[0]) + 0.5) * width;
    const double center_b = lo + (static_cast<double>(*second) + 0.5) * width;
    threshold = 0.5 * (center_a + center_b);
  }

  std::vector<bool> mask(bin_rates.size());
  for (std::size_t i = 0; i < bin_rates.size(); ++i) {
    mask[i] = bin_rates[i] >= threshold;
  }
  return mask;
}

namespace {

struct SpectrumPeak {
  double frequency = 0.0;
  double cos_coeff = 0.0;
  double sin_coeff = 0.0;
  double mean = 0.0;
  double power = 0.0;
};

// Three-parameter harmonic fit (mean + cos + sin) at a fixed frequency,
// optionally weighted; used to scan the discrete spectrum for the dominant
// peak. The tiny diagonal damping keeps the solve sane when a basis column
// degenerates (the sine vanishes at the Nyquist frequency of a uniform grid).
SpectrumPeak harmonic_fit(std::span<const double> x, std::span<const double> y,
                          std::span<const double> sigma, double frequency) {
  Eigen::Matrix3d ata = Eigen::Matrix3d::Zero();
  Eigen::Vector3d atb = Eigen::Vector3d::Zero();
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double w = sigma.empty() ? 1.0 : 1.0 / (sigma[i] * sigma[i]);
    const Eigen::Vector3d basis(1.0, std::cos(2.0 * kPi * frequency * x[i]),
                                std::sin(2.0 * kPi * frequency * x[i]));
    ata += w * basis * basis.transpose();
    atb += w * basis * y[i];
  }
  ata += 1e-12 * ata.trace() * Eigen::Matrix3d::Identity();
  const Eigen::Vector3d coeff = ata.ldlt().solve(atb);
  SpectrumPeak peak;
  peak.frequency = frequency;
  peak.mean = coeff(0);
  peak.cos_coeff = coeff(1);
  peak.sin_coeff = coeff(2);
  peak.power = coeff(1) * coeff(1) + coeff(2) * coeff(2);
  return peak;
}

}  // namespace

FringeFit fit_fringe(std::span<const double> sweep_values,
                     std::span<const double> rates_cps,
                     std::span<const double> rate_errors_cps,
                     WarningLog* warnings) {
  const std::size_t n = sweep_values.size();
  if (n < 6) {
    throw std::invalid_argument("fit_fringe: needs at least 6 points");
  }
  require(rates_cps.size() == n && rate_errors_cps.size() == n,
          "fit_fringe: input sizes must match");
  for (std::size_t i = 0; i < n; ++i) {
    require(rate_errors_cps[i] > 0.0, "fit_fringe: errors must be positive");
  }

  double weight_sum = 0.0;
  double mean = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = 1.0 / (rate_errors_cps[i] * rate_errors_cps[i]);
    weight_sum += w;
    mean += w * rates_cps[i];
  }
  mean /= weight_sum;

  const double span = sweep_values.back() - sweep_values.front();
  require(span > 0.0, "fit_fringe: sweep must span a positive range");
  double min_dx = span;
  for (std::size_t i = 1; i < n; ++i) {
    min_dx = std::min(min_dx, sweep_values[i] - sweep_values[i - 1]);
  }
  require(min_dx > 0.0, "fit_fringe: sweep values must be strictly increasing");

  const bool constant =
      std::all_of(rates_cps.begin(), rates_cps.end(),
                  [&](double v) { return v == rates_cps[0]; });
  if (constant) {
    FringeFit flat;
    flat.offset = rates_cps[0];
    flat.offset_err = std::sqrt(1.0 / weight_sum);
    return flat;
  }

  // Discrete-spectrum scan for the starting period: peak located on the
  // unweighted spectrum (plain periodogram, no leakage from heteroscedastic
  // weights), coefficients then refitted with weights at the peak.
  const double f_lo = 1.0 / span;
  const double f_hi = 0.5 / min_dx;
  const double f_step = 1.0 / (8.0 * span);
  SpectrumPeak best;
  for (double f = f_lo; f <= f_hi; f += f_step) {
    const SpectrumPeak peak = harmonic_fit(sweep_values, rates_cps, {}, f);
    if (peak.power > best.power) best = peak;
  }
  best = harmonic_fit(sweep_values, rates_cps, rate_errors_cps, best.frequency);

  Eigen::VectorXd initial(4);
  initial(0) = best.mean;
  initial(1) = std::hypot(best.cos_coeff, best.sin_coeff);
  initial(2) = 1.0 / best.frequency;
  initial(3) = std::atan2(-best.sin_coeff, best.cos_coeff);

  const auto model = [](double x, const Eigen::VectorXd& p) {
    return p(0) + p(1) * std::cos(2.0 * kPi * x / p(2) + p(3));
  };

  detail::FitOptions options;
  options.step_scale = Eigen::VectorXd(4);
  options.step_scale << std::max(std::abs(mean), 1.0),
      std::max(initial(1), 1e-3 * std::max(std::abs(mean), 1.0)),
      initial(2), 1.0;

  const detail::FitResult fit = detail::levenberg_marquardt(
      model, sweep_values, rates_cps, rate_errors_cps, initial, options);
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "fit_fringe: no convergence after " << fit.iterations
        << " iterations (best chi2 " << fit.chi2 << ")";
    throw std::runtime_error(msg.str());
  }

  FringeFit result;
  result.offset = fit.params(0);
  result.amplitude = fit.params(1);
  result.period = fit.params(2);
  result.phase_rad = fit.params(3);
  if (result.period < 0.0) {
    result.period = -result.period;
    result.phase_rad = -result.phase_rad;
  }
  if (result.amplitude < 0.0) {
    result.amplitude = -result.amplitude;
    result.phase_rad += kPi;
  }
  result.phase_rad = wrap_phase(result.phase_rad);

  result.offset_err = std::sqrt(std::max(fit.covariance(0, 0), 0.0));
  result.amplitude_err = std::sqrt(std::max(fit.covariance(1, 1), 0.0));
  result.period_err = std::sqrt(std::max(fit.covariance(2, 2), 0.0));
  result.phase_err = std::sqrt(std::max(fit.covariance(3, 3), 0.0));
  result.reduced_chi2 =
      (n > 4) ? fit.chi2 / static_cast<double>(n - 4) : fit.chi2;

  if (result.offset <= 0.0) {
    if (warnings) warnings->add("fit_fringe: non-positive offset, visibility set to 0");
    result.visibility = 0.0;
    return result;
  }
  if (result.amplitude > result.offset) {
    if (warnings) {
      std::ostringstream msg;
      msg << "fit_fringe: amplitude " << result.amplitude
          << " clamped to offset " << result.offset;
      warnings->add(msg.str());
    }
    result.amplitude = result.offset;
  }
  result.visibility = result.amplitude / result.offset;
  const double o = fit.params(0);
  const double a = fit.params(1);
  const double var_v = fit.covariance(1, 1) / (o * o) +
                       a * a * fit.covariance(0, 0) / (o * o * o * o) -
                       2.0 * a * fit.covariance(0, 1) / (o * o * o);
  result.visibility_err = std::sqrt(std::max(var_v, 0.0));
  return result;
}

namespace {

// Mean of the Gaussian-overlap fringe density over one slit placement.
// p = (scale, contrast, phase, center, separation, waist).
double lateral_model(double slit_center, const Eigen::VectorXd& p,
                     double fringe_wavenumber, double slit_halfwidth) {
  const double contrast = p(1);
  const double phase = p(2);
  const double mid = p(3);
  const double half_sep = std::abs(p(4)) / 2.0;
  const double waist = std::abs(p(5));
  const double w2 = waist * waist;

  double integral = 0.0;
  for (int half = 0; half < 2; ++half) {
    for (int k = 0; k < 8; ++k) {
      const double node = (half == 0) ? -kGlNode[k] : kGlNode[k];
      const double u = slit_center + node * slit_halfwidth;
      const double g1 =
          std::exp(-2.0 * (u - (mid - half_sep)) * (u - (mid - half_sep)) / w2);
      const double g2 =
          std::exp(-2.0 * (u - (mid + half_sep)) * (u - (mid + half_sep)) / w2);
      const double density =
          g1 + g2 +
          2.0 * contrast * std::sqrt(g1 * g2) *
              std::cos(fringe_wavenumber * u + phase);
      integral += kGlWeight[k] * density;
    }
  }
  return p(0) * integral / 2.0;  // mean over the slit, times the scale
}

}  // namespace

LateralFit fit_lateral(std::span<const double> slit_positions_m,
                       std::span<const double> rates_cps,
                       std::span<const double> rate_errors_cps,
                       const LateralGeometry& geometry, WarningLog* warnings) {
  const std::size_t n = slit_positions_m.size();
  if (n < 10) {
    throw std::invalid_argument("fit_lateral: needs at least 10 points");
  }
  require(rates_cps.size() == n && rate_errors_cps.size() == n,
          "fit_lateral: input sizes must match");
  require(geometry.fringe_wavenumber > 0.0,
          "fit_lateral: fringe wavenumber must be positive");
  require(geometry.slit_halfwidth_m > 0.0,
          "fit_lateral: slit half-width must be positive");
  require(geometry.waist_m > 0.0, "fit_lateral: waist guess must be positive");
  for (std::size_t i = 0; i < n; ++i) {
    require(rate_errors_cps[i] > 0.0, "fit_lateral: errors must be positive");
  }

  const double k_fringe = geometry.fringe_wavenumber;
  const double halfwidth = geometry.slit_halfwidth_m;
  const auto model = [k_fringe, halfwidth](double x, const Eigen::VectorXd& p) {
    return lateral_model(x, p, k_fringe, halfwidth);
  };

  // Coarse phase/contrast grid, scale solved by weighted projection.
  const double peak_rate = *std::max_element(rates_cps.begin(), rates_cps.end());
  Eigen::VectorXd initial(6);
  double best_chi2 = std::numeric_limits<double>::infinity();
  for (int pc = 0; pc < 3; ++pc) {
    for (int pp = 0; pp < 8; ++pp) {
      Eigen::VectorXd trial(6);
      trial << 1.0, 0.3 * static_cast<double>(pc + 1),
          2.0 * kPi * static_cast<double>(pp) / 8.0, geometry.center_m,
          geometry.separation_m, geometry.waist_m;
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double g = model(slit_positions_m[i], trial);
        const double w = 1.0 / (rate_errors_cps[i] * rate_errors_cps[i]);
        num += w * rates_cps[i] * g;
        den += w * g * g;
      }
      trial(0) = (den > 0.0) ? num / den : peak_rate;
      double chi2 = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double r =
            (rates_cps[i] - model(slit_positions_m[i], trial)) /
            rate_errors_cps[i];
        chi2 += r * r;
      }
      if (chi2 < best_chi2) {
        best_chi2 = chi2;
        initial = trial;
      }
    }
  }

  detail::FitOptions options;
  options.step_scale = Eigen::VectorXd(6);
  options.step_scale << std::max(std::abs(initial(0)), 1.0), 0.1, 0.5,
      geometry.waist_m, geometry.waist_m, geometry.waist_m;

  const detail::FitResult fit = detail::levenberg_marquardt(
      model, slit_positions_m, rates_cps, rate_errors_cps, initial, options);
  if (!fit.converged) {
    std::ostringstream msg;
    msg << "fit_lateral: no convergence after " << fit.iterations
        << " iterations (best chi2 " << fit.chi2 << ")";
    throw std::runtime_error(msg.str());
  }

  double scale = fit.params(0);
  double contrast = fit.params(1);
  double phase = fit.params(2);
  if (contrast < 0.0) {
    contrast = -contrast;
    phase += kPi;
  }

  LateralFit result;
  result.center_m = fit.params(3);
  result.separation_m = std::abs(fit.params(4));
  result.waist_m = std::abs(fit.params(5));

  FringeFit& fringe = result.fringe;
  fringe.offset = scale;
  fringe.amplitude = scale * contrast;
  fringe.period = 2.0 * kPi / geometry.fringe_wavenumber;
  fringe.phase_rad = wrap_phase(phase);
  fringe.offset_err = std::sqrt(std::max(fit.covariance(0, 0), 0.0));
  fringe.phase_err = std::sqrt(std::max(fit.covariance(2, 2), 0.0));
  const double var_amp = contrast * contrast * fit.covariance(0, 0) +
                         scale * scale * fit.covariance(1, 1) +
                         2.0 * scale * contrast * fit.covariance(0, 1);
  fringe.amplitude_err = std::sqrt(std::max(var_amp, 0.0));
  fringe.visibility_err = std::sqrt(std::max(fit.covariance(1, 1), 0.0));
  fringe.reduced_chi2 =
      (n > 6) ? fit.chi2 / static_cast<double>(n - 6) : fit.chi2;

  if (contrast > 1.0) {
    if (warnings) {
      std::ostringstream msg;
      msg << "fit_lateral: contrast " << contrast << " clamped to 1";
      warnings->add(msg.str());
    }
    contrast = 1.0;
    fringe.amplitude = fringe.offset;
  }
  fringe.visibility = contrast;
  return result;
}

double lateral_fit_model(double slit_position_m, const LateralFit& fit,
                         const LateralGeometry& geometry) {
  Eigen::VectorXd p(6);
  p << fit.fringe.offset, fit.fringe.visibility, fit.fringe.phase_rad,
      fit.center_m, fit.separation_m, fit.waist_m;
  return lateral_model(slit_position_m, p, geometry.fringe_wavenumber,
                       geometry.slit_halfwidth_m);
}

double calibrate_reflectivity(double mirror_cps, double prism_cps,
                              double mirror_reflectivity,
                              double face_transmission, WarningLog* warnings) {
  if (mirror_cps <= 0.0) {
    throw std::invalid_argument(
        "calibrate_reflectivity: mirror rate must be positive");
  }
  require(prism_cps >= 0.0, "calibrate_reflectivity: prism rate must be >= 0");
  require(mirror_reflectivity > 0.0 && mirror_reflectivity <= 1.0,
          "calibrate_reflectivity: mirror reflectivity must lie in (0, 1]");
  require(face_transmission > 0.0 && face_transmission <= 1.0,
          "calibrate_reflectivity: face transmission must lie in (0, 1]");

  const double reflectivity = (prism_cps / mirror_cps) * mirror_reflectivity /
                              (face_transmission * face_transmission);
  if (reflectivity > 1.0) {
    if (warnings) {
      std::ostringstream msg;
      msg << "calibrated reflectivity " << reflectivity << " clamped to 1";
      warnings->add(msg.str());
    }
    return 1.0;
  }
  return reflectivity;
}

DualityMetrics duality_metrics(double visibility, double reflectivity) {
  require(visibility >= 0.0 && visibility <= 1.0,
          "duality_metrics: visibility must lie in [0, 1]");
  require(reflectivity >= 0.0 && reflectivity <= 1.0,
          "duality_metrics: reflectivity must lie in [0, 1]");
  DualityMetrics metrics;
  metrics.visibility = visibility;
  metrics.distinguishability = reflectivity;
  metrics.duality = visibility * visibility + reflectivity * reflectivity;
  return metrics;
}

double CorrelationHistogram::zero_delay() const {
  return g2[(g2.size() - 1) / 2];
}

CorrelationHistogram compute_g2(std::span<const double> tags_a_s,
                                std::span<const double> tags_b_s,
                                double bin_width_s, double window_s) {
  if (tags_a_s.empty() || tags_b_s.empty()) {
    throw std::invalid_argument("compute_g2: empty stream");
  }
  require(bin_width_s > 0.0, "compute_g2: bin width must be positive");
  require(window_s >= bin_width_s, "compute_g2: window must be >= bin width");
  for (std::size_t i = 1; i < tags_a_s.size(); ++i) {
    require(tags_a_s[i] >= tags_a_s[i - 1], "compute_g2: stream a not sorted");
  }
  for (std::size_t i = 1; i < tags_b_s.size(); ++i) {
    require(tags_b_s[i] >= tags_b_s[i - 1], "compute_g2: stream b not sorted");
  }

  // Odd bin grid centered on zero delay so "the zero bin" is well defined.
  const auto n_half = static_cast<std::size_t>(
      std::ceil(window_s / bin_width_s - 1e-9));
  const std::size_t n_bins = 2 * n_half + 1;
  const double edge = (static_cast<double>(n_half) + 0.5) * bin_width_s;

  CorrelationHistogram hist;
  hist.bin_width_s = bin_width_s;
  hist.window_s = edge;
  hist.counts.assign(n_bins, 0);

  std::size_t j_lo = 0;
  for (const double a : tags_a_s) {
    while (j_lo < tags_b_s.size() && tags_b_s[j_lo] < a - edge) ++j_lo;
    for (std::size_t j = j_lo; j < tags_b_s.size() && tags_b_s[j] <= a + edge;
         ++j) {
      const double tau = tags_b_s[j] - a;
      const auto idx = static_cast<std::size_t>(
          std::floor(tau / bin_width_s + static_cast<double>(n_half) + 0.5));
      hist.counts[std::min(idx, n_bins - 1)]++;
    }
  }

  const double t0 = std::min(tags_a_s.front(), tags_b_s.front());
  const double t1 = std::max(tags_a_s.back(), tags_b_s.back());
  const double duration = t1 - t0;
  require(duration > 0.0, "compute_g2: streams span zero time");
  const double baseline = static_cast<double>(tags_a_s.size()) *
                          static_cast<double>(tags_b_s.size()) * bin_width_s /
                          duration;

  hist.tau_s.resize(n_bins);
  hist.g2.resize(n_bins);
  hist.sigma.resize(n_bins);
  for (std::size_t i = 0; i < n_bins; ++i) {
    hist.tau_s[i] =
        (static_cast<double>(i) - static_cast<double>(n_half)) * bin_width_s;
    hist.g2[i] = static_cast<double>(hist.counts[i]) / baseline;
    hist.sigma[i] =
        std::sqrt(static_cast<double>(std::max<std::uint64_t>(hist.counts[i], 1))) /
        baseline;
  }
  return hist;
}

}  // namespace wmmzi
