"""Smoke tests for the python bindings: a few frozen physics values and a
tiny end-to-end scan. Heavier statistics live in the C++ suites."""

import math

import pytest

import wmmzi


def paper_beam():
    beam = wmmzi.BeamPairConfig()
    beam.wavelength_m = 650e-9
    beam.inter_beam_angle_rad = math.radians(1.75)
    return beam


def paper_screen():
    screen = wmmzi.PrismScreen()
    screen.refractive_index = 1.5
    screen.reflection_probability = 0.83
    screen.face_transmission = 0.96
    return screen


def test_refraction_angle():
    assert wmmzi.refraction_angle(1.5, 0.0) == 0.0
    assert wmmzi.refraction_angle(1.5, math.radians(1.75)) == pytest.approx(
        0.020360415500620862, abs=1e-12
    )
    with pytest.raises(ValueError):
        wmmzi.refraction_angle(0.5, 0.1)


def test_fringe_period_is_43um():
    period = wmmzi.fringe_period(paper_beam(), paper_screen())
    assert period == pytest.approx(43.007e-6, rel=1e-3)


def test_path_intensities_and_visibility():
    p1, p2 = wmmzi.path_output_intensity(paper_beam(), paper_screen())
    assert p1 == p2 == pytest.approx(0.83)
    assert wmmzi.ideal_visibility(paper_beam(), paper_screen()) == 1.0
    assert wmmzi.two_beam_visibility(1.0, 1.0) == pytest.approx(1.0)


def test_calibration_and_duality():
    r = wmmzi.calibrate_reflectivity(102000.0, 81000.0, 0.955, 0.96)
    assert r == pytest.approx(0.8229, abs=5e-4)
    metrics = wmmzi.duality_metrics(0.97, 0.83)
    assert metrics.duality == pytest.approx(1.6298, abs=1e-9)


def test_analytic_g2():
    emitter = wmmzi.EmitterConfig()
    emitter.antibunch_tau_s = 30e-9
    assert wmmzi.analytic_g2(0.0, emitter) == 0.0
    assert wmmzi.analytic_g2(30e-9, emitter) == pytest.approx(1 - math.exp(-1))


def test_generate_stream_deterministic():
    emitter = wmmzi.EmitterConfig()
    emitter.bright_rate_cps = 50000.0
    emitter.duration_s = 0.2
    emitter.bright_to_dark_rate_hz = 0.0
    emitter.seed = 99
    a = wmmzi.generate_stream(emitter)
    b = wmmzi.generate_stream(emitter)
    assert len(a) == len(b) > 0
    assert a.times == b.times


def test_small_scan_and_fit():
    instrument = wmmzi.InstrumentConfig()
    instrument.beam = paper_beam()
    instrument.screen = paper_screen()
    instrument.apd3.collection_efficiency = 1.0
    instrument.apd3.dark_rate_cps = 0.0
    instrument.magnification = 50.0
    instrument.beam_waist_m = 80e-6
    instrument.beam_separation_m = 0.0
    instrument.fringe_contrast = 0.98

    emitter = wmmzi.EmitterConfig()
    emitter.bright_rate_cps = 50000.0
    emitter.bright_to_dark_rate_hz = 0.0
    emitter.seed = 12345

    sweep = [i * 0.01e-3 for i in range(33)]
    scan = wmmzi.run_scan(instrument, emitter, "wedge_position", sweep, 2.0,
                          threads=2)
    assert scan.variable == "wedge_position"
    assert len(scan.points) == 33

    x = [p.sweep_value * 1e3 for p in scan.points]
    y = [p.apd3_dark_corrected_cps for p in scan.points]
    err = [max(p.apd3_counts, 1) ** 0.5 / p.integration_s for p in scan.points]
    fit = wmmzi.fit_fringe(x, y, err)
    assert 0.85 < fit.visibility <= 1.0
    assert fit.period == pytest.approx(1.0 / 6.713, rel=0.05)


def test_exact_sinusoid_recovery():
    x = [0.011 * i for i in range(40)]
    y = [100.0 + 97.0 * math.cos(2 * math.pi * xi / 0.173 + 0.9) for xi in x]
    fit = wmmzi.fit_fringe(x, y, [1.0] * len(x))
    assert fit.visibility == pytest.approx(0.97, abs=1e-9)
