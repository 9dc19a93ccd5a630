"""Weak-measurement Mach-Zehnder interferometer: Monte Carlo photon
transport and the fringe/duality analysis pipeline."""

from wmmzi._core import (  # noqa: F401
    BeamPairConfig,
    CalibrationResult,
    CorrelationHistogram,
    DetectionConfig,
    DualityMetrics,
    EmitterConfig,
    EmitterState,
    FringeFit,
    InstrumentConfig,
    LateralFit,
    LateralGeometry,
    PhotonStream,
    PrismScreen,
    ScanPoint,
    ScanResult,
    analytic_g2,
    calibrate_reflectivity,
    compute_g2,
    duality_metrics,
    fit_fringe,
    fit_lateral,
    fringe_period,
    generate_stream,
    ideal_visibility,
    path_output_intensity,
    refraction_angle,
    run_calibration,
    run_scan,
    run_scenario_file,
    sample_scatter_positions,
    scattered_fringe_wavenumber,
    scattered_intensity,
    segment_bright,
    subtract_dark,
    two_beam_visibility,
    wedge_phase,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
