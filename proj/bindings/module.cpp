// Python bindings for the core simulation and analysis operations.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <stdexcept>
#include <string>

#include "wmmzi/analysis.hpp"
#include "wmmzi/config.hpp"
#include "wmmzi/scenario.hpp"
#include "wmmzi/simulator.hpp"

namespace py = pybind11;
using namespace wmmzi;

namespace {

SweepVariable sweep_variable_from(const std::string& name) {
  if (name == "wedge_position") return SweepVariable::wedge_position;
  if (name == "slit_position") return SweepVariable::slit_position;
  throw std::invalid_argument(
      "sweep variable must be 'wedge_position' or 'slit_position'");
}

CalibrationTarget target_from(const std::string& name) {
  if (name == "mirror") return CalibrationTarget::mirror;
  if (name == "prism") return CalibrationTarget::prism;
  throw std::invalid_argument("target must be 'mirror' or 'prism'");
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Weak-measurement Mach-Zehnder interferometer: Monte Carlo "
            "photon transport and fringe/duality analysis";

  // ---- wave model ----
  py::class_<BeamPairConfig>(m, "BeamPairConfig")
      .def(py::init<>())
      .def_readwrite("amplitude", &BeamPairConfig::amplitude)
      .def_readwrite("wavelength_m", &BeamPairConfig::wavelength_m)
      .def_readwrite("inter_beam_angle_rad",
                     &BeamPairConfig::inter_beam_angle_rad)
      .def_readwrite("relative_phase_rad", &BeamPairConfig::relative_phase_rad)
      .def("wavenumber", &BeamPairConfig::wavenumber)
      .def("input_intensity", &BeamPairConfig::input_intensity)
      .def("validate", &BeamPairConfig::validate);

  py::class_<PrismScreen>(m, "PrismScreen")
      .def(py::init<>())
      .def_readwrite("refractive_index", &PrismScreen::refractive_index)
      .def_readwrite("reflection_probability",
                     &PrismScreen::reflection_probability)
      .def_readwrite("face_transmission", &PrismScreen::face_transmission)
      .def("scattering_probability", &PrismScreen::scattering_probability)
      .def("evanescent_amplitude", &PrismScreen::evanescent_amplitude)
      .def("validate", &PrismScreen::validate);

  py::class_<DetectionConfig>(m, "DetectionConfig")
      .def(py::init<>())
      .def_readwrite("collection_efficiency",
                     &DetectionConfig::collection_efficiency)
      .def_readwrite("detector_efficiency",
                     &DetectionConfig::detector_efficiency)
      .def_readwrite("dark_rate_cps", &DetectionConfig::dark_rate_cps);

  m.def("refraction_angle", &refraction_angle, py::arg("refractive_index"),
        py::arg("external_angle_rad"),
        "Internal angle from Snell's law, n sin(t1) = sin(t)");
  m.def(
      "path_output_intensity",
      [](const BeamPairConfig& beam, const PrismScreen& screen) {
        const PathIntensities out = path_output_intensity(beam, screen);
        return py::make_tuple(out.path1, out.path2);
      },
      py::arg("beam"), py::arg("screen"));
  m.def("scattered_intensity", &scattered_intensity, py::arg("surface_coord_m"),
        py::arg("beam"), py::arg("screen"), py::arg("detection"));
  m.def("scattered_fringe_wavenumber", &scattered_fringe_wavenumber,
        py::arg("beam"), py::arg("screen"));
  m.def("fringe_period", &fringe_period, py::arg("beam"), py::arg("screen"));
  m.def("ideal_visibility", &ideal_visibility, py::arg("beam"),
        py::arg("screen"));
  m.def("two_beam_visibility", &two_beam_visibility, py::arg("amplitude_a"),
        py::arg("amplitude_b"));

  // ---- photon source ----
  py::enum_<EmitterState>(m, "EmitterState")
      .value("bright", EmitterState::bright)
      .value("dark", EmitterState::dark);

  py::class_<EmitterConfig>(m, "EmitterConfig")
      .def(py::init<>())
      .def_readwrite("bright_rate_cps", &EmitterConfig::bright_rate_cps)
      .def_readwrite("antibunch_tau_s", &EmitterConfig::antibunch_tau_s)
      .def_readwrite("bright_to_dark_rate_hz",
                     &EmitterConfig::bright_to_dark_rate_hz)
      .def_readwrite("dark_to_bright_rate_hz",
                     &EmitterConfig::dark_to_bright_rate_hz)
      .def_readwrite("dark_brightness", &EmitterConfig::dark_brightness)
      .def_readwrite("duration_s", &EmitterConfig::duration_s)
      .def_readwrite("seed", &EmitterConfig::seed)
      .def("validate", &EmitterConfig::validate);

  py::class_<PhotonStream>(m, "PhotonStream")
      .def_property_readonly(
          "times",
          [](const PhotonStream& stream) {
            std::vector<double> times;
            times.reserve(stream.records.size());
            for (const auto& record : stream.records) {
              times.push_back(record.time_s);
            }
            return times;
          })
      .def_property_readonly(
          "states",
          [](const PhotonStream& stream) {
            std::vector<int> states;
            states.reserve(stream.records.size());
            for (const auto& record : stream.records) {
              states.push_back(record.state == EmitterState::bright ? 1 : 0);
            }
            return states;
          })
      .def_readonly("duration_s", &PhotonStream::duration_s)
      .def("bright_time_s", &PhotonStream::bright_time_s)
      .def("__len__",
           [](const PhotonStream& stream) { return stream.records.size(); });

  m.def("generate_stream", &generate_stream, py::arg("config"));
  m.def("analytic_g2", &analytic_g2, py::arg("tau_s"), py::arg("config"));

  // ---- instrument and transport ----
  py::class_<InstrumentConfig>(m, "InstrumentConfig")
      .def(py::init<>())
      .def_readwrite("beam", &InstrumentConfig::beam)
      .def_readwrite("screen", &InstrumentConfig::screen)
      .def_readwrite("apd1", &InstrumentConfig::apd1)
      .def_readwrite("apd2", &InstrumentConfig::apd2)
      .def_readwrite("apd3", &InstrumentConfig::apd3)
      .def_readwrite("beam_splitter_reflectance",
                     &InstrumentConfig::beam_splitter_reflectance)
      .def_readwrite("arm1_transmission", &InstrumentConfig::arm1_transmission)
      .def_readwrite("arm2_transmission", &InstrumentConfig::arm2_transmission)
      .def_readwrite("wedge_angle_rad", &InstrumentConfig::wedge_angle_rad)
      .def_readwrite("wedge_index", &InstrumentConfig::wedge_index)
      .def_readwrite("wedge_position_m", &InstrumentConfig::wedge_position_m)
      .def_readwrite("slit_width_m", &InstrumentConfig::slit_width_m)
      .def_readwrite("slit_center_m", &InstrumentConfig::slit_center_m)
      .def_readwrite("magnification", &InstrumentConfig::magnification)
      .def_readwrite("beam_waist_m", &InstrumentConfig::beam_waist_m)
      .def_readwrite("beam_separation_m", &InstrumentConfig::beam_separation_m)
      .def_readwrite("fringe_contrast", &InstrumentConfig::fringe_contrast)
      .def("validate", &InstrumentConfig::validate);

  m.def(
      "wedge_phase",
      [](double position_m, const InstrumentConfig& config) {
        return wedge_phase(position_m, config);
      },
      py::arg("position_m"), py::arg("config"));

  py::class_<ScanPoint>(m, "ScanPoint")
      .def_readonly("sweep_value", &ScanPoint::sweep_value)
      .def_readonly("integration_s", &ScanPoint::integration_s)
      .def_readonly("apd1_counts", &ScanPoint::apd1_counts)
      .def_readonly("apd2_counts", &ScanPoint::apd2_counts)
      .def_readonly("apd3_counts", &ScanPoint::apd3_counts)
      .def_readonly("apd1_cps", &ScanPoint::apd1_cps)
      .def_readonly("apd2_cps", &ScanPoint::apd2_cps)
      .def_readonly("apd3_cps", &ScanPoint::apd3_cps)
      .def_readonly("apd3_dark_corrected_cps",
                    &ScanPoint::apd3_dark_corrected_cps);

  py::class_<ScanResult>(m, "ScanResult")
      .def_property_readonly(
          "variable",
          [](const ScanResult& scan) {
            return std::string(to_string(scan.variable));
          })
      .def_readonly("points", &ScanResult::points);

  m.def(
      "run_scan",
      [](const InstrumentConfig& config, const EmitterConfig& emitter,
         const std::string& variable, const std::vector<double>& sweep,
         double integration_s, int threads) {
        ScanOptions options;
        options.threads = threads;
        return run_scan(config, emitter, sweep_variable_from(variable), sweep,
                        integration_s, options);
      },
      py::arg("config"), py::arg("emitter"), py::arg("variable"),
      py::arg("sweep"), py::arg("integration_s"), py::arg("threads") = 1);

  py::class_<CalibrationResult>(m, "CalibrationResult")
      .def_readonly("bright_rate_cps", &CalibrationResult::bright_rate_cps)
      .def_readonly("detected_counts", &CalibrationResult::detected_counts)
      .def_readonly("bright_detected_counts",
                    &CalibrationResult::bright_detected_counts)
      .def_readonly("bright_time_s", &CalibrationResult::bright_time_s)
      .def_readonly("duration_s", &CalibrationResult::duration_s);

  m.def(
      "run_calibration",
      [](const InstrumentConfig& config, const EmitterConfig& emitter,
         const std::string& target, double duration_s,
         double mirror_reflectivity) {
        return run_calibration(config, emitter, target_from(target),
                               duration_s, mirror_reflectivity);
      },
      py::arg("config"), py::arg("emitter"), py::arg("target"),
      py::arg("duration_s"), py::arg("mirror_reflectivity") = 0.955);

  m.def(
      "sample_scatter_positions",
      [](const InstrumentConfig& config, std::size_t n, std::uint64_t seed) {
        const ScatterSampler sampler(config);
        CounterRng rng(seed);
        std::vector<double> samples;
        samples.reserve(n);
        for (std::size_t i = 0; i < n; ++i) {
          samples.push_back(sampler.sample(rng));
        }
        return samples;
      },
      py::arg("config"), py::arg("n"), py::arg("seed"),
      "Draw scatter positions from the instrument's fringe density");

  // ---- analysis ----
  py::class_<FringeFit>(m, "FringeFit")
      .def_readonly("offset", &FringeFit::offset)
      .def_readonly("amplitude", &FringeFit::amplitude)
      .def_readonly("period", &FringeFit::period)
      .def_readonly("phase_rad", &FringeFit::phase_rad)
      .def_readonly("visibility", &FringeFit::visibility)
      .def_readonly("offset_err", &FringeFit::offset_err)
      .def_readonly("amplitude_err", &FringeFit::amplitude_err)
      .def_readonly("period_err", &FringeFit::period_err)
      .def_readonly("phase_err", &FringeFit::phase_err)
      .def_readonly("visibility_err", &FringeFit::visibility_err)
      .def_readonly("reduced_chi2", &FringeFit::reduced_chi2);

  py::class_<LateralGeometry>(m, "LateralGeometry")
      .def(py::init<>())
      .def_readwrite("fringe_wavenumber", &LateralGeometry::fringe_wavenumber)
      .def_readwrite("slit_halfwidth_m", &LateralGeometry::slit_halfwidth_m)
      .def_readwrite("waist_m", &LateralGeometry::waist_m)
      .def_readwrite("separation_m", &LateralGeometry::separation_m)
      .def_readwrite("center_m", &LateralGeometry::center_m);

  py::class_<LateralFit>(m, "LateralFit")
      .def_readonly("fringe", &LateralFit::fringe)
      .def_readonly("waist_m", &LateralFit::waist_m)
      .def_readonly("separation_m", &LateralFit::separation_m)
      .def_readonly("center_m", &LateralFit::center_m);

  py::class_<DualityMetrics>(m, "DualityMetrics")
      .def_readonly("visibility", &DualityMetrics::visibility)
      .def_readonly("distinguishability", &DualityMetrics::distinguishability)
      .def_readonly("duality", &DualityMetrics::duality);

  py::class_<CorrelationHistogram>(m, "CorrelationHistogram")
      .def_readonly("bin_width_s", &CorrelationHistogram::bin_width_s)
      .def_readonly("window_s", &CorrelationHistogram::window_s)
      .def_readonly("tau_s", &CorrelationHistogram::tau_s)
      .def_readonly("counts", &CorrelationHistogram::counts)
      .def_readonly("g2", &CorrelationHistogram::g2)
      .def_readonly("sigma", &CorrelationHistogram::sigma)
      .def("zero_delay", &CorrelationHistogram::zero_delay);

  m.def(
      "subtract_dark",
      [](double measured, double dark) { return subtract_dark(measured, dark); },
      py::arg("measured_cps"), py::arg("dark_cps"));
  m.def(
      "segment_bright",
      [](const std::vector<double>& rates, std::optional<double> threshold) {
        return segment_bright(rates, threshold);
      },
      py::arg("bin_rates"), py::arg("fixed_threshold") = std::nullopt);
  m.def(
      "fit_fringe",
      [](const std::vector<double>& x, const std::vector<double>& y,
         const std::vector<double>& err) { return fit_fringe(x, y, err); },
      py::arg("sweep_values"), py::arg("rates_cps"),
      py::arg("rate_errors_cps"));
  m.def(
      "fit_lateral",
      [](const std::vector<double>& x, const std::vector<double>& y,
         const std::vector<double>& err, const LateralGeometry& geometry) {
        return fit_lateral(x, y, err, geometry);
      },
      py::arg("slit_positions_m"), py::arg("rates_cps"),
      py::arg("rate_errors_cps"), py::arg("geometry"));
  m.def(
      "calibrate_reflectivity",
      [](double mirror_cps, double prism_cps, double mirror_reflectivity,
         double face_transmission) {
        return calibrate_reflectivity(mirror_cps, prism_cps,
                                      mirror_reflectivity, face_transmission);
      },
      py::arg("mirror_cps"), py::arg("prism_cps"),
      py::arg("mirror_reflectivity"), py::arg("face_transmission"));
  m.def("duality_metrics", &duality_metrics, py::arg("visibility"),
        py::arg("reflectivity"));
  m.def(
      "compute_g2",
      [](const std::vector<double>& a, const std::vector<double>& b,
         double bin_width_s, double window_s) {
        return compute_g2(a, b, bin_width_s, window_s);
      },
      py::arg("tags_a_s"), py::arg("tags_b_s"), py::arg("bin_width_s"),
      py::arg("window_s"));

  // ---- scenarios ----
  m.def(
      "run_scenario_file",
      [](const std::string& config_path, std::optional<std::uint64_t> seed,
         std::optional<std::string> out_dir, int threads, bool deterministic) {
        const ScenarioConfig config = load_scenario_config(config_path);
        RunFlags flags;
        flags.seed = seed;
        flags.output_dir = std::move(out_dir);
        flags.threads = threads;
        flags.deterministic = deterministic;
        const ScenarioOutcome outcome = run_scenario(config, flags);
        return py::make_tuple(outcome.summary, json_to_py(outcome.report));
      },
      py::arg("config_path"), py::arg("seed") = std::nullopt,
      py::arg("out_dir") = std::nullopt, py::arg("threads") = 1,
      py::arg("deterministic") = true,
      "Run a scenario config; returns (summary, report dict)");
}
