"""Closed-form propagators for periodic N-step driving.

A single constant segment rotates the Bloch vector about its field axis;
segments compose through a four-term real recursion on the SU(2)
coefficients (a, b, c, d).  Whole periods enter through a Chebyshev-style
power identity in the per-period rotation angle Theta = arccos(a(T)), so
evaluating the propagator at t' + script_N * T costs O(N) regardless of the
period count script_N.

The power identity needs cos(script_N*Theta) and the ratio
sin(script_N*Theta)/sin(Theta).  Both are evaluated in a reflected form
when a(T) < 0: writing Theta = pi - s and reducing arguments against s
instead of Theta keeps full precision where the naive expressions lose
about six digits as Theta approaches pi at large script_N.
"""

import math

import numpy as np

from .core import PropagatorCoeffs

# Below this value of sin(Theta)**2 the per-period rotation is within 1e-8
# of 0 or pi and the analytic limits of the power factors are substituted.
_SIN2_FLOOR = 1e-16


def step_propagator(step, s):
    """Propagator coefficients of one constant segment after time s.

    Parameters
    ----------
    step : DriveStep
    s : float
        Elapsed time inside the segment, 0 <= s <= step.tau.

    Returns
    -------
    PropagatorCoeffs
        a = cos(E s), (b, c, d) = (z, y, x) components of the field axis
        times sin(E s), with E the segment energy.
    """
    phase = step.energy * s
    sn = math.sin(phase)
    ax, ay, az = step.axis
    return PropagatorCoeffs(math.cos(phase), az * sn, ay * sn, ax * sn)


def compose(left, step, s):
    """Apply a segment rotation on top of an existing propagator.

    Returns the coefficients of U_step(s) @ U_left.  This is the
    elementary recursion: each new segment mixes (a, b, c, d) through
    fixed bilinear combinations with the segment axis.

    Parameters
    ----------
    left : PropagatorCoeffs
        Propagator accumulated so far (applied first in time).
    step : DriveStep
    s : float
        Duration spent in the new segment.

    Returns
    -------
    PropagatorCoeffs
    """
    phase = step.energy * s
    cn = math.cos(phase)
    sn = math.sin(phase)
    ax, ay, az = step.axis
    a, b, c, d = left
    return PropagatorCoeffs(
        a * cn - (d * ax + c * ay + b * az) * sn,
        b * cn + (c * ax - d * ay + a * az) * sn,
        c * cn + (-b * ax + a * ay + d * az) * sn,
        d * cn + (a * ax + b * ay - c * az) * sn,
    )


def intra_period(sequence, tprime):
    """Propagator from the period start to 0 <= t' <= T.

    Full segments before t' are folded in order; the segment containing t'
    contributes a partial rotation.

    Parameters
    ----------
    sequence : PulseSequence
    tprime : float

    Returns
    -------
    PropagatorCoeffs

    Raises
    ------
    ValueError
        If t' lies outside [0, T].
    """
    bounds = sequence.boundaries
    if tprime < 0.0 or tprime > bounds[-1]:
        raise ValueError(
            "intra-period time %r outside [0, %r]" % (tprime, bounds[-1])
        )
    coeffs = PropagatorCoeffs.identity()
    for step, t0, t1 in zip(sequence.steps, bounds[:-1], bounds[1:]):
        if tprime <= t0:
            break
        coeffs = compose(coeffs, step, min(tprime, t1) - t0)
    return coeffs


def period_propagator(sequence):
    """Propagator over one full period; its ``angle`` property is Theta."""
    return intra_period(sequence, sequence.period)


def _power_factors(a, n):
    """cos(n*Theta) and sin(n*Theta)/sin(Theta) for Theta = arccos(a).

    For a < 0 the computation is reflected, s = arccos(-a), using
    cos(n*Theta) = (-1)**n cos(n*s) and sin(n*Theta) = (-1)**(n+1) sin(n*s),
    so the small residual pi - Theta is never formed by cancellation.  When
    sin(Theta)**2 falls below the floor the analytic limits are returned:
    ratio -> n as Theta -> 0 and n*(-1)**(n-1) as Theta -> pi.
    """
    a = max(-1.0, min(1.0, a))
    odd = n % 2
    if (1.0 - a) * (1.0 + a) < _SIN2_FLOOR:
        if a >= 0.0:
            return 1.0, float(n)
        return (-1.0 if odd else 1.0), (float(n) if odd else -float(n))
    if a >= 0.0:
        ang = math.acos(a)
        return math.cos(n * ang), math.sin(n * ang) / math.sin(ang)
    ang = math.acos(-a)
    sign = -1.0 if odd else 1.0
    return sign * math.cos(n * ang), -sign * math.sin(n * ang) / math.sin(ang)


def _combine(inner, per, cos_n, ratio):
    # power identity: U(t' + nT) from U(t'), U(T), cos(n*Theta) and
    # sin(n*Theta)/sin(Theta); linear in `inner`, so it also serves the
    # spectral module with array-valued factors
    aw, bw, cw, dw = inner
    ap, bp, cp, dp = per
    return PropagatorCoeffs(
        aw * cos_n - (dw * dp + cw * cp + bw * bp) * ratio,
        bw * cos_n + (-cw * dp + dw * cp + aw * bp) * ratio,
        cw * cos_n + (bw * dp + aw * cp - dw * bp) * ratio,
        dw * cos_n + (aw * dp - bw * cp + cw * bp) * ratio,
    )


def _power_factors_array(a, ns):
    """Vectorized :func:`_power_factors` for an array of period counts."""
    a = max(-1.0, min(1.0, a))
    ns = np.asarray(ns, dtype=float)
    if (1.0 - a) * (1.0 + a) < _SIN2_FLOOR:
        if a >= 0.0:
            return np.ones_like(ns), ns.copy()
        parity = 1.0 - 2.0 * np.mod(ns, 2.0)
        return parity, -parity * ns
    if a >= 0.0:
        ang = math.acos(a)
        return np.cos(ns * ang), np.sin(ns * ang) / math.sin(ang)
    ang = math.acos(-a)
    parity = 1.0 - 2.0 * np.mod(ns, 2.0)
    return parity * np.cos(ns * ang), -parity * np.sin(ns * ang) / math.sin(ang)


def _split_time(t, period):
    # decompose t = n*T + t' with 0 <= t' < T; a t' within one ulp of T is
    # promoted to the next period boundary
    n = int(math.floor(t / period))
    tprime = t - n * period
    if tprime < 0.0:  # floor rounding at exact multiples
        n -= 1
        tprime = t - n * period
    if period - tprime <= math.ulp(period):
        n += 1
        tprime = 0.0
    return n, tprime


def evolve(sequence, t):
    """Propagator coefficients at an arbitrary time t >= 0.

    Splits t into full periods plus an intra-period remainder and combines
    the two propagators through the power identity; the cost does not grow
    with the number of elapsed periods.

    Parameters
    ----------
    sequence : PulseSequence
    t : float

    Returns
    -------
    PropagatorCoeffs
    """
    if t < 0.0:
        raise ValueError("time must be non-negative, got %r" % (t,))
    n, tprime = _split_time(t, sequence.period)
    inner = intra_period(sequence, tprime)
    if n == 0:
        return inner
    per = period_propagator(sequence)
    cos_n, ratio = _power_factors(per.a, n)
    return _combine(inner, per, cos_n, ratio)


def transition_probability(sequence, t):
    """Population transferred between the basis states at time t."""
    return evolve(sequence, t).transition_probability


def evolve_many(sequence, times):
    """Propagator coefficients on an array of times.

    Vectorized equivalent of :func:`evolve`: returns four arrays
    (a, b, c, d) with the shape of ``times``.  Times are grouped by the
    segment their intra-period remainder falls in, so the cost is O(N +
    len(times)).

    Parameters
    ----------
    sequence : PulseSequence
    times : array_like
        Non-negative times, any shape.

    Returns
    -------
    tuple of ndarray
    """
    times = np.asarray(times, dtype=float)
    if times.size and times.min() < 0.0:
        raise ValueError("times must be non-negative")
    shape = times.shape
    ts = times.ravel()
    period = sequence.period
    bounds = sequence.boundaries

    n_per = np.floor(ts / period)
    tp = ts - n_per * period
    neg = tp < 0.0
    if neg.any():
        n_per[neg] -= 1.0
        tp[neg] = ts[neg] - n_per[neg] * period
    wrap = period - tp <= math.ulp(period)
    n_per[wrap] += 1.0
    tp[wrap] = 0.0

    # intra-period part: prefix propagators at the boundaries are scalars,
    # the partial rotation inside the containing segment is vectorized
    a = np.empty_like(tp)
    b = np.empty_like(tp)
    c = np.empty_like(tp)
    d = np.empty_like(tp)
    idx = np.searchsorted(bounds, tp, side="right") - 1
    np.clip(idx, 0, len(sequence.steps) - 1, out=idx)
    prefix = PropagatorCoeffs.identity()
    for k, step in enumerate(sequence.steps):
        sel = idx == k
        if sel.any():
            s = tp[sel] - bounds[k]
            cn = np.cos(step.energy * s)
            sn = np.sin(step.energy * s)
            ax, ay, az = step.axis
            pa, pb, pc, pd = prefix
            a[sel] = pa * cn - (pd * ax + pc * ay + pb * az) * sn
            b[sel] = pb * cn + (pc * ax - pd * ay + pa * az) * sn
            c[sel] = pc * cn + (-pb * ax + pa * ay + pd * az) * sn
            d[sel] = pd * cn + (pa * ax + pb * ay - pc * az) * sn
        prefix = compose(prefix, step, step.tau)

    # whole-period part: per-time power factors, reflected when a(T) < 0
    per = prefix
    cos_n, ratio = _power_factors_array(per.a, n_per)
    out = _combine((a, b, c, d), per, cos_n, ratio)
    return tuple(x.reshape(shape) for x in out)


def transition_probabilities(sequence, times):
    """Transition probability on an array of times (vectorized)."""
    _, _, c, d = evolve_many(sequence, times)
    return c * c + d * d
