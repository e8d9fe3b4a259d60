"""Fourier content of the transition probability under periodic driving.

Between any two period boundaries the transition probability is a constant
plus a single tone at twice the segment energy, with coefficients that
depend on the period index k only through cos(k*Theta) and
sin(k*Theta)/sin(Theta).  Two routes to the line spectrum follow:

* a numeric route valid for any step count, sampling the exact signal on a
  boundary-aligned grid and projecting on the probe frequencies with a
  composite Simpson rule;
* a closed-form route for two-step sequences that evaluates every window
  integral analytically and sums the per-period coefficients directly, so
  the only truncation left is the number K of retained periods.

Both label lines the same way: "sideband" components sit at
|2*omega_eff + l*omega_T| with omega_eff on the positive-a branch, and
"harmonic" components at integer multiples of omega_T.
"""

import cmath
import math
import warnings
from collections import namedtuple

import numpy as np

from .core import (
    DegenerateFrequencyWarning,
    SpectralComponent,
    SpectralModel,
)
from .effective import effective_hamiltonian
from .propagator import (
    _combine,
    _power_factors_array,
    intra_period,
    step_propagator,
    transition_probabilities,
)

# denominators |probe +/- 2 E_n| below this are treated as exactly resonant
_DEGENERATE_TOL = 1e-10

# frequencies closer than this (in units of omega_T) are one spectral line
_FOLD_TOL = 1e-9

# Richardson extrapolation stages for the K -> infinity limit
_RICHARDSON_KS = (256, 512, 1024)

ModelError = namedtuple("ModelError", ["value", "horizon"])

PiecewiseSpectralCoeffs = namedtuple(
    "PiecewiseSpectralCoeffs", ["r0", "rc", "rs", "q0", "qc", "qs"]
)


def _phase_integral(x, tau):
    """G(x) = integral_0^tau exp(1j*x*s) ds, with the small-x limit."""
    if abs(x) < _DEGENERATE_TOL:
        return tau * (1.0 + 0.5j * x * tau)
    return (cmath.exp(1j * x * tau) - 1.0) / (1j * x)


def _window_integral(omega, tone, tau, warn):
    """Projection of (1, cos(tone*s), sin(tone*s)) on exp(1j*omega*s).

    Returns the three integrals over s in [0, tau].  When omega is within
    the degenerate tolerance of +/-tone the limiting form is used and a
    DegenerateFrequencyWarning is emitted (for probe frequencies only).
    """
    g0 = _phase_integral(omega, tau)
    xp = omega + tone
    xm = omega - tone
    if warn and tone != 0.0 and (abs(xp) < _DEGENERATE_TOL or abs(xm) < _DEGENERATE_TOL):
        warnings.warn(
            "probe frequency %g is resonant with a window tone %g; "
            "using the limiting form of the integral" % (omega, tone),
            DegenerateFrequencyWarning,
            stacklevel=3,
        )
    gp = _phase_integral(xp, tau)
    gm = _phase_integral(xm, tau)
    gc = 0.5 * (gp + gm)
    gs = (gp - gm) / 2j
    return g0, gc, gs


def _probe_list(l_range, omega_eff, omega_t):
    lmin, lmax = l_range
    if lmin > lmax:
        raise ValueError("empty index range %r" % (l_range,))
    probes = []
    for l in range(lmin, lmax + 1):
        probes.append(("sideband", l, 2.0 * omega_eff + l * omega_t))
    for l in range(lmin, lmax + 1):
        probes.append(("harmonic", l + 1, (l + 1) * omega_t))
    return probes


def _assemble_components(raw, omega_t, cap, dedup_tol):
    """Fold, deduplicate, and sort raw (family, l, frequency, z) probes.

    Negative frequencies fold to positive ones with conjugated phasors.
    Probes closer together than dedup_tol are unresolvable by the
    projection window, so each already carries the full merged line;
    keeping more than one would double-count it.  The first probe of such
    a cluster is kept, the rest are dropped (never summed).  Lines above
    the cap or at zero frequency are discarded.
    """
    dedup_tol = max(dedup_tol, _FOLD_TOL * omega_t)
    comps = []
    kept = []
    for family, l, freq, z in raw:
        if freq < 0.0:
            freq, z = -freq, z.conjugate()
        if freq < _FOLD_TOL * omega_t or freq > cap * (1.0 + 1e-12):
            continue
        if any(abs(freq - other) < dedup_tol for other in kept):
            continue
        kept.append(freq)
        comps.append(
            SpectralComponent(
                freq, abs(z), math.atan2(z.imag, z.real), family, l
            )
        )
    comps.sort(key=lambda comp: -comp.amplitude)
    return tuple(comps)


def _simpson_step_grid(sequence, samples_per_step):
    """Nodes and weights of a composite Simpson rule over one period.

    Each step gets an even number of panels, so every node lies strictly
    inside one smooth window or on a boundary; the rule is then O(h^4)
    despite the kinks of the signal at the step edges.
    """
    n = max(64, int(samples_per_step))
    if n % 2:
        n += 1
    nodes = []
    weights = []
    bounds = sequence.boundaries
    for t0, t1 in zip(bounds[:-1], bounds[1:]):
        h = (t1 - t0) / n
        nodes.append(np.linspace(t0, t1, n + 1))
        w = np.full(n + 1, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        weights.append(w * (h / 3.0))
    return np.concatenate(nodes), np.concatenate(weights)


def fourier_numeric(sequence, l_range=(-4, 4), K=256, samples_per_step=64):
    """Line spectrum of the transition probability by quadrature.

    Samples the exact signal over K periods on a boundary-aligned Simpson
    grid and projects it on the sideband frequencies 2*omega_eff +
    l*omega_T (positive-a branch) and the harmonics of omega_T.

    Parameters
    ----------
    sequence : PulseSequence
    l_range : (int, int)
        Inclusive range of the summation index l.
    K : int
        Number of periods retained in the projection window.
    samples_per_step : int
        Simpson panels per step, at least 64.

    Returns
    -------
    SpectralModel
        Offset (the windowed mean) plus folded, deduplicated components
        sorted by decreasing amplitude.  Frequencies above 2*pi/min(tau_n)
        are discarded.
    """
    if K < 1:
        raise ValueError("need at least one period, got K=%r" % (K,))
    period = sequence.period
    omega_t = sequence.omega_t
    heff = effective_hamiltonian(sequence, branch="positive_a")
    probes = _probe_list(l_range, heff.omega_eff, omega_t)

    nodes, weights = _simpson_step_grid(sequence, samples_per_step)
    ks = np.arange(K)
    times = (nodes[None, :] + period * ks[:, None]).ravel()
    values = transition_probabilities(sequence, times).reshape(K, nodes.size)

    total = K * period
    offset = float(np.sum(values @ weights)) / total

    raw = []
    for family, l, freq in probes:
        if freq == 0.0:
            continue
        inner = (values * weights) @ np.exp(1j * freq * nodes)
        z = (2.0 / total) * (np.exp(1j * freq * period * ks) @ inner)
        raw.append((family, l, freq, complex(z)))
    cap = 2.0 * math.pi / sequence.min_tau
    dedup = math.pi / total
    return SpectralModel(offset, _assemble_components(raw, omega_t, cap, dedup))


def _two_step_parts(sequence, K):
    """Per-period tone coefficients of both windows of a two-step drive.

    Within period k the transition probability is
    r0[k] + rc[k]*cos(2*E1*s) + rs[k]*sin(2*E1*s) for local time s in the
    first window and the q arrays with 2*E2 in the second.  The k
    dependence enters only through the power-identity factors, evaluated
    here for k = 0 .. K-1.
    """
    step1, step2 = sequence.steps
    per = intra_period(sequence, sequence.period)
    u1 = step_propagator(step1, step1.tau)
    cos_k, ratio_k = _power_factors_array(per.a, np.arange(K))

    def axis_product(left, axis):
        ax, ay, az = axis
        a, b, c, d = left
        return (
            -(d * ax + c * ay + b * az),
            c * ax - d * ay + a * az,
            -b * ax + a * ay + d * az,
            a * ax + b * ay - c * az,
        )

    # window 1: U(kT + s) = U1(s) U(T)^k is linear in (cos E1 s, sin E1 s)
    cos_part = _combine((1.0, 0.0, 0.0, 0.0), per, cos_k, ratio_k)
    ax, ay, az = step1.axis
    sin_part = _combine((0.0, az, ay, ax), per, cos_k, ratio_k)
    r1c, r1s = cos_part.c, sin_part.c
    r2c, r2s = cos_part.d, sin_part.d

    # window 2: U(kT + tau1 + u) = U2(u) U1(tau1) U(T)^k
    cos_part = _combine(tuple(u1), per, cos_k, ratio_k)
    sin_part = _combine(axis_product(u1, step2.axis), per, cos_k, ratio_k)
    q1c, q1s = cos_part.c, sin_part.c
    q2c, q2s = cos_part.d, sin_part.d

    def tone_triple(c1, s1, c2, s2):
        zero = 0.5 * (c1 * c1 + s1 * s1 + c2 * c2 + s2 * s2)
        cos_amp = 0.5 * (c1 * c1 - s1 * s1 + c2 * c2 - s2 * s2)
        sin_amp = c1 * s1 + c2 * s2
        return zero, cos_amp, sin_amp

    r0, rc, rs = tone_triple(r1c, r1s, r2c, r2s)
    q0, qc, qs = tone_triple(q1c, q1s, q2c, q2s)
    return PiecewiseSpectralCoeffs(r0, rc, rs, q0, qc, qs)


def piecewise_coefficients(sequence, K):
    """Per-window tone coefficients of a two-step sequence, k = 0 .. K-1.

    Returns
    -------
    PiecewiseSpectralCoeffs
        Arrays (r0, rc, rs) for the first window and (q0, qc, qs) for the
        second; see :func:`piecewise_evaluate` for the reconstruction.
    """
    if len(sequence.steps) != 2:
        raise ValueError("piecewise coefficients need exactly two steps")
    return _two_step_parts(sequence, K)


def piecewise_evaluate(sequence, coeffs, times):
    """Evaluate the piecewise window model at the given times.

    Exact reconstruction of the transition probability from
    :func:`piecewise_coefficients`, for times within the first K periods.
    """
    step1, step2 = sequence.steps
    period = sequence.period
    times = np.asarray(times, dtype=float)
    k = np.floor(times / period).astype(int)
    k = np.clip(k, 0, len(coeffs.r0) - 1)
    s = times - k * period
    first = s < step1.tau
    out = np.empty_like(times)
    tone = 2.0 * step1.energy * s[first]
    out[first] = (
        coeffs.r0[k[first]]
        + coeffs.rc[k[first]] * np.cos(tone)
        + coeffs.rs[k[first]] * np.sin(tone)
    )
    second = ~first
    tone = 2.0 * step2.energy * (s[second] - step1.tau)
    out[second] = (
        coeffs.q0[k[second]]
        + coeffs.qc[k[second]] * np.cos(tone)
        + coeffs.qs[k[second]] * np.sin(tone)
    )
    return out


def _two_step_projection(sequence, coeffs, omega, K, warn):
    """(2/KT) integral of the window model times exp(1j*omega*t)."""
    step1, step2 = sequence.steps
    period = sequence.period
    tau1 = step1.tau
    ks = np.arange(K)
    phases = np.exp(1j * omega * period * ks)

    g0, gc, gs = _window_integral(omega, 2.0 * step1.energy, tau1, warn)
    win1 = (
        (phases @ coeffs.r0) * g0
        + (phases @ coeffs.rc) * gc
        + (phases @ coeffs.rs) * gs
    )
    g0, gc, gs = _window_integral(omega, 2.0 * step2.energy, step2.tau, warn)
    win2 = (
        (phases @ coeffs.q0) * g0
        + (phases @ coeffs.qc) * gc
        + (phases @ coeffs.qs) * gs
    )
    return (2.0 / (K * period)) * (win1 + cmath.exp(1j * omega * tau1) * win2)


def _closed_form_at_k(sequence, l_range, K):
    omega_t = sequence.omega_t
    heff = effective_hamiltonian(sequence, branch="positive_a")
    probes = _probe_list(l_range, heff.omega_eff, omega_t)
    coeffs = _two_step_parts(sequence, K)
    offset = 0.5 * _two_step_projection(sequence, coeffs, 0.0, K, False).real
    raw = []
    for family, l, freq in probes:
        if freq == 0.0:
            continue
        z = _two_step_projection(sequence, coeffs, freq, K, True)
        raw.append((family, l, freq, z))
    return offset, raw


def fourier_closed_form_two_step(sequence, l_range=(-4, 4), K=None):
    """Line spectrum of a two-step drive from closed-form window integrals.

    Every integral over a window is evaluated analytically; the sum over
    the K retained periods is carried out exactly on the per-period
    coefficient arrays.  With K=None the infinite-window limit is estimated
    by Richardson extrapolation over K = 256, 512, 1024, which cancels the
    1/K and 1/K^2 truncation terms.

    Parameters
    ----------
    sequence : PulseSequence
        Exactly two steps.
    l_range : (int, int)
        Inclusive range of the summation index l.
    K : int or None
        Number of retained periods; None extrapolates to K -> infinity.

    Returns
    -------
    SpectralModel

    Warns
    -----
    DegenerateFrequencyWarning
        When a probe frequency is resonant with a window tone 2*E_n and
        the limiting form of the integral is substituted.
    """
    if len(sequence.steps) != 2:
        raise ValueError("closed form requires exactly two steps")
    cap = 2.0 * math.pi / sequence.min_tau
    omega_t = sequence.omega_t
    if K is not None:
        if K < 1:
            raise ValueError("need at least one period, got K=%r" % (K,))
        offset, raw = _closed_form_at_k(sequence, l_range, K)
        dedup = math.pi / (K * sequence.period)
        return SpectralModel(offset, _assemble_components(raw, omega_t, cap, dedup))

    stages = [_closed_form_at_k(sequence, l_range, k) for k in _RICHARDSON_KS]

    def extrapolate(f1, f2, f4):
        return (8.0 * f4 - 6.0 * f2 + f1) / 3.0

    offset = extrapolate(*(s[0] for s in stages))
    raw = []
    for triples in zip(*(s[1] for s in stages)):
        family, l, freq = triples[0][:3]
        z = extrapolate(*(t[3] for t in triples))
        raw.append((family, l, freq, z))
    dedup = math.pi / (_RICHARDSON_KS[-1] * sequence.period)
    return SpectralModel(offset, _assemble_components(raw, omega_t, cap, dedup))


def dominant_model(model, max_terms=3, floor=0.02):
    """Reduced model keeping at most max_terms components above the floor.

    Components are already amplitude-sorted, so this truncates the list;
    max_terms=0 yields the offset-only model.
    """
    if max_terms < 0:
        raise ValueError("max_terms must be non-negative")
    kept = tuple(c for c in model.components if c.amplitude >= floor)[:max_terms]
    return SpectralModel(model.offset, kept)


def two_step_empirical_model(sequence, p=None):
    """Two-tone model of a resonant-plus-detuned two-step drive.

    For sequences with vanishing effective detuning the transition
    probability is approximately

        1/2 - (1 - lam)/2 * cos(2*omega_eff*t) - lam/2 * cos(2*omega_minus*t)

    with lam = p * (1 - 2*theta_1*theta_2), theta_n = E_n*tau_n/pi the
    dynamical phases in units of pi, and p defaulting to max(eps_n/E_n)**2.

    Parameters
    ----------
    sequence : PulseSequence
        Exactly two steps with |delta_eff| * T < 1e-6 on the positive-a
        branch.
    p : float or None
        Weight of the secondary tone; None uses the default above.

    Returns
    -------
    SpectralModel
    """
    if len(sequence.steps) != 2:
        raise ValueError("empirical model requires exactly two steps")
    heff = effective_hamiltonian(sequence, branch="positive_a")
    if abs(heff.delta_eff) * sequence.period >= 1e-6:
        raise ValueError(
            "effective detuning too large for the empirical model: "
            "|delta_eff|*T = %g" % (abs(heff.delta_eff) * sequence.period)
        )
    if p is None:
        p = max((s.epsilon / s.energy) ** 2 for s in sequence.steps)
    phases = [s.energy * s.tau / math.pi for s in sequence.steps]
    lam = p * (1.0 - 2.0 * phases[0] * phases[1])
    comps = [
        SpectralComponent(
            2.0 * heff.omega_eff, 0.5 * (1.0 - lam), math.pi, "sideband", 0
        ),
        SpectralComponent(
            2.0 * heff.sideband_minus, 0.5 * lam, math.pi, "sideband", -1
        ),
    ]
    comps = [c for c in comps if abs(c.amplitude) > 1e-15]
    comps.sort(key=lambda comp: -comp.amplitude)
    return SpectralModel(0.5, tuple(comps))


def _aligned_times(sequence, t_end, per_step):
    """Boundary-aligned sample times on [0, t_end], >= per_step per step."""
    period = sequence.period
    bounds = sequence.boundaries
    n_full = int(math.floor(t_end / period))
    chunks = [np.array([0.0])]
    base = []
    for t0, t1 in zip(bounds[:-1], bounds[1:]):
        base.append(np.linspace(t0, t1, per_step + 1)[1:])
    base = np.concatenate(base)
    for k in range(n_full):
        chunks.append(base + k * period)
    left = t_end - n_full * period
    if left > 1e-12 * period:
        start = n_full * period
        for t0, t1 in zip(bounds[:-1], bounds[1:]):
            if t0 >= left:
                break
            hi = min(t1, left)
            n = max(2, int(math.ceil(per_step * (hi - t0) / (t1 - t0))))
            chunks.append(start + np.linspace(t0, hi, n + 1)[1:])
    return np.concatenate(chunks)


def model_error(sequence, model, t_s=None, per_step=64):
    """Time-averaged absolute deviation of a model from the exact signal.

    eps = (1/t_s) * integral_0^t_s |P_exact(t) - P_model(t)| dt, by
    trapezoidal quadrature on a boundary-aligned grid with at least 64
    samples per step.

    Parameters
    ----------
    sequence : PulseSequence
    model : SpectralModel or BeatPrediction
        Anything with an ``evaluate(times)`` method.
    t_s : float or None
        Averaging horizon; None uses 40 periods.
    per_step : int
        Samples per step, at least 64.

    Returns
    -------
    ModelError
        Fields (value, horizon).
    """
    if t_s is None:
        t_s = 40.0 * sequence.period
    if t_s <= 0.0:
        raise ValueError("horizon must be positive")
    times = _aligned_times(sequence, t_s, max(64, per_step))
    exact = transition_probabilities(sequence, times)
    approx = model.evaluate(times)
    value = float(np.trapezoid(np.abs(exact - approx), times)) / t_s
    return ModelError(value, t_s)


def write_csv(model, stream):
    """Write a spectral model as CSV: offset comment plus component rows.

    Columns are (l, frequency, amplitude, phase, family); all floats are
    rendered with %.17g so the output is byte-reproducible.
    """
    stream.write("# offset = %.17g\n" % model.offset)
    stream.write("l,frequency,amplitude,phase,family\n")
    for comp in model.components:
        index = "" if comp.index is None else str(comp.index)
        stream.write(
            "%s,%.17g,%.17g,%.17g,%s\n"
            % (index, comp.frequency, comp.amplitude, comp.phase, comp.family)
        )
