"""Line spectra: closed form vs quadrature, reduced models, model error."""

import io
import math
import warnings

import numpy as np
import pytest

from stepdrive import (
    DegenerateFrequencyWarning,
    PulseSequence,
    SpectralComponent,
    SpectralModel,
    dominant_model,
    effective_hamiltonian,
    fourier_closed_form_two_step,
    fourier_numeric,
    model_error,
    piecewise_coefficients,
    piecewise_evaluate,
    transition_probabilities,
    two_step_empirical_model,
    write_csv,
)
from stepdrive.spectrum import _aligned_times

from helpers import resonant_plus_detuned

# frozen Richardson-extrapolated lines of the resonant-plus-detuned pair
RPD_OFFSET = 0.50002174406081423
RPD_LINES = (
    # (family, index, frequency, amplitude, phase)
    ("sideband", -1, 1.9654586822323394, 0.25482453903973751, 3.1177471920840234),
    ("sideband", 0, 1.8442914738226523, 0.24690442072107194, 3.0114004962292569),
    ("sideband", 1, 5.6540416298776446, 0.0092231879358422256, -0.26195005442991126),
)

CLOSED_VS_NUMERIC_AMP = 1e-5
CLOSED_VS_NUMERIC_PHASE = 1e-4
STRONG_LINE = 1e-3


def test_piecewise_model_reconstructs_signal_exactly():
    seq = resonant_plus_detuned()
    K = 12
    coeffs = piecewise_coefficients(seq, K)
    times = _aligned_times(seq, K * seq.period, 16)
    exact = transition_probabilities(seq, times)
    got = piecewise_evaluate(seq, coeffs, times)
    assert np.max(np.abs(got - exact)) < 1e-12


def test_piecewise_coefficients_need_two_steps():
    seq = PulseSequence.from_arrays([0.0], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError, match="two steps"):
        piecewise_coefficients(seq, 4)


def test_resonant_single_step_has_one_exact_line():
    # P12(t) = sin(eps*t)^2 = 1/2 - cos(2*eps*t)/2: one tone, amplitude 1/2
    seq = PulseSequence.from_arrays([0.0], [1.0], [0.0], [0.5 * math.pi])
    model = fourier_numeric(seq, l_range=(-2, 2), K=256)
    assert model.offset == pytest.approx(0.5, abs=1e-12)
    line = model.components[0]
    assert line.frequency == pytest.approx(2.0, abs=1e-12)
    assert line.amplitude == pytest.approx(0.5, abs=1e-10)
    assert line.phase == pytest.approx(math.pi, abs=1e-9)
    assert line.family == "sideband"
    # every other retained line is noise-level
    assert all(c.amplitude < 1e-10 for c in model.components[1:])


def test_resonant_detuned_pair_frozen_lines():
    model = fourier_closed_form_two_step(resonant_plus_detuned())
    assert model.offset == pytest.approx(RPD_OFFSET, abs=1e-12)
    for want, got in zip(RPD_LINES, model.components):
        family, index, freq, amp, phase = want
        assert got.family == family
        assert got.index == index
        assert got.frequency == pytest.approx(freq, rel=1e-14)
        assert got.amplitude == pytest.approx(amp, rel=1e-12)
        assert got.phase == pytest.approx(phase, rel=1e-10)


def test_closed_form_matches_quadrature():
    seq = resonant_plus_detuned()
    closed = fourier_closed_form_two_step(seq, l_range=(-3, 3), K=256)
    numeric = fourier_numeric(seq, l_range=(-3, 3), K=256)
    assert closed.offset == pytest.approx(numeric.offset, abs=1e-12)
    by_freq = {round(c.frequency, 9): c for c in numeric.components}
    matched = 0
    for comp in closed.components:
        other = by_freq[round(comp.frequency, 9)]
        assert comp.amplitude == pytest.approx(
            other.amplitude, abs=CLOSED_VS_NUMERIC_AMP
        )
        if comp.amplitude > STRONG_LINE:
            assert comp.phase == pytest.approx(other.phase, abs=CLOSED_VS_NUMERIC_PHASE)
            matched += 1
    assert matched >= 3


def test_spectral_weight_matches_signal_variance():
    seq = resonant_plus_detuned()
    model = fourier_closed_form_two_step(seq, l_range=(-6, 6))
    weight = 0.5 * sum(c.amplitude**2 for c in model.components)
    # a probability signal can carry at most variance 1/4
    assert weight <= 0.25 + 1e-9
    times = np.linspace(0.0, 4096 * seq.period, 2_000_001)
    signal = transition_probabilities(seq, times)
    variance = float(np.mean((signal - np.mean(signal)) ** 2))
    assert weight == pytest.approx(variance, abs=5e-3)


def test_degenerate_probe_substitutes_window_limit():
    # identical resonant steps: the probe at 2*E lands exactly on the
    # window tone, where the integral needs its limiting form
    seq = PulseSequence.from_arrays(
        [0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [0.25 * math.pi, 0.25 * math.pi]
    )
    with pytest.warns(DegenerateFrequencyWarning):
        model = fourier_closed_form_two_step(seq, l_range=(-2, 2), K=256)
    line = model.components[0]
    assert line.frequency == pytest.approx(2.0, abs=1e-12)
    assert line.amplitude == pytest.approx(0.5, abs=1e-10)


def test_unresolved_lines_are_merged_not_double_counted():
    # near-degenerate pair: 2*omega_eff almost equals omega_T - 2*omega_eff;
    # the window cannot resolve them, so exactly one merged line survives
    # and the spectral weight stays physical
    seq = PulseSequence.from_arrays(
        [0.0, 40.0], [1.0, 1.0], [0.0, 0.0], [1.5708, 3.1377]
    )
    model = fourier_closed_form_two_step(seq)
    freqs = sorted(c.frequency for c in model.components)
    min_gap = min(b - a for a, b in zip(freqs, freqs[1:]))
    assert min_gap >= math.pi / (1024 * seq.period)
    weight = 0.5 * sum(c.amplitude**2 for c in model.components)
    assert weight <= 0.25 + 1e-9
    assert 0.19 < weight < 0.22
    amps = [c.amplitude for c in model.components[:3]]
    assert 0.60 < amps[0] < 0.63
    assert amps[1] == pytest.approx(0.1666, abs=2e-3)
    assert amps[2] == pytest.approx(0.0624, abs=2e-3)


def test_full_model_stays_within_probability_bounds():
    seq = resonant_plus_detuned()
    model = fourier_closed_form_two_step(seq, l_range=(-6, 6))
    times = np.linspace(0.0, 40.0 * seq.period, 20001)
    values = model.evaluate(times)
    assert values.min() > -0.05
    assert values.max() < 1.05


def test_closed_form_input_validation():
    single = PulseSequence.from_arrays([0.0], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError, match="two steps"):
        fourier_closed_form_two_step(single)
    seq = resonant_plus_detuned()
    with pytest.raises(ValueError, match="at least one period"):
        fourier_closed_form_two_step(seq, K=0)
    with pytest.raises(ValueError, match="at least one period"):
        fourier_numeric(seq, K=0)
    with pytest.raises(ValueError, match="empty index range"):
        fourier_numeric(seq, l_range=(2, 1))


def test_dominant_model_truncates_sorted_components():
    model = SpectralModel(
        0.5,
        (
            SpectralComponent(1.0, 0.4, 0.0, "sideband", 0),
            SpectralComponent(2.0, 0.2, 0.0, "sideband", 1),
            SpectralComponent(3.0, 0.05, 0.0, "harmonic", 1),
            SpectralComponent(4.0, 0.01, 0.0, "harmonic", 2),
        ),
    )
    reduced = dominant_model(model, max_terms=3)
    # the floor drops the 0.01 line even though three terms are allowed
    assert [c.amplitude for c in reduced.components] == [0.4, 0.2, 0.05]
    assert dominant_model(model, max_terms=1).components == model.components[:1]
    assert dominant_model(model, max_terms=0).components == ()
    assert dominant_model(model, floor=0.3).components == model.components[:1]
    with pytest.raises(ValueError, match="non-negative"):
        dominant_model(model, max_terms=-1)


def test_empirical_model_equal_tone_weights():
    # resonant + detuned quarter cycles: dynamical phases 1/2 each, weight
    # p = 1, so lam = 1/2 and the two tones carry 1/4 each
    seq = resonant_plus_detuned()
    h = effective_hamiltonian(seq, branch="positive_a")
    model = two_step_empirical_model(seq)
    assert model.offset == 0.5
    assert len(model.components) == 2
    freqs = sorted(c.frequency for c in model.components)
    assert freqs[0] == pytest.approx(2.0 * h.omega_eff, rel=1e-12)
    assert freqs[1] == pytest.approx(2.0 * h.sideband_minus, rel=1e-12)
    for comp in model.components:
        assert comp.amplitude == pytest.approx(0.25, abs=1e-12)
    assert model_error(seq, model).value < 0.05


def test_empirical_model_collapses_to_single_tone():
    # merged resonant drive with phase product 1/2: lam = 0 and only the
    # primary tone survives
    seq = PulseSequence.from_arrays(
        [0.0, 0.0], [1.0, 1.0], [0.0, 0.0], [math.pi, 0.5 * math.pi]
    )
    model = two_step_empirical_model(seq)
    assert len(model.components) == 1
    assert model.components[0].amplitude == pytest.approx(0.5, abs=1e-12)


def test_empirical_model_input_validation():
    single = PulseSequence.from_arrays([0.0], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError, match="two steps"):
        two_step_empirical_model(single)
    biased = PulseSequence.from_arrays(
        [3.0, 2.19], [1.0, 1.0], [0.0, 0.0], [0.2066, 1.6729]
    )
    with pytest.raises(ValueError, match="effective detuning too large"):
        two_step_empirical_model(biased)


def test_model_error_self_consistency():
    # the full closed-form model is a faithful reduced description
    seq = resonant_plus_detuned()
    model = fourier_closed_form_two_step(seq, l_range=(-6, 6))
    err = model_error(seq, model)
    assert err.value < 1e-2
    assert err.horizon == pytest.approx(40.0 * seq.period)
    # a wrong model scores badly
    flat = SpectralModel(0.5, ())
    assert model_error(seq, flat).value > 0.1
    with pytest.raises(ValueError, match="horizon"):
        model_error(seq, model, t_s=0.0)


def test_aligned_times_hit_every_step_boundary():
    seq = resonant_plus_detuned()
    t_end = 2.0 * seq.period + 0.3 * seq.steps[0].tau
    times = _aligned_times(seq, t_end, 4)
    assert times[0] == 0.0
    assert times[-1] <= t_end + 1e-12
    assert np.all(np.diff(times) > 0.0)
    for k in range(2):
        for bound in seq.boundaries[:-1]:
            target = k * seq.period + bound
            assert np.min(np.abs(times - target)) < 1e-12


def test_write_csv_golden_bytes():
    model = SpectralModel(
        0.5,
        (
            SpectralComponent(2.0, 0.25, math.pi, "sideband", 0),
            SpectralComponent(3.0, 0.125, -0.5, "harmonic", None),
        ),
    )
    out = io.StringIO()
    write_csv(model, out)
    assert out.getvalue() == (
        "# offset = 0.5\n"
        "l,frequency,amplitude,phase,family\n"
        "0,2,0.25,3.1415926535897931,sideband\n"
        ",3,0.125,-0.5,harmonic\n"
    )
