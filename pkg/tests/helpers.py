"""Shared factories for the test suite.

Energies are always built with math.hypot, matching the library, so frozen
reference values are reproduced bit for bit.
"""

import math

import numpy as np

from stepdrive import PulseSequence


def quarter_cycle_sequence(epsilons, deltas, thetas=None, half_cycle=()):
    """Sequence with every dynamical phase E_n*tau_n = pi/2.

    Indices listed in ``half_cycle`` get a full pi instead.
    """
    if thetas is None:
        thetas = [0.0] * len(epsilons)
    taus = []
    for i, (eps, delta) in enumerate(zip(epsilons, deltas)):
        energy = math.hypot(eps, 0.5 * delta)
        area = math.pi if i in half_cycle else 0.5 * math.pi
        taus.append(area / energy)
    return PulseSequence.from_arrays(deltas, epsilons, thetas, taus)


def detuned_pair():
    """Two strongly detuned quarter-cycle steps, eps = {1, 2}, delta = {50, 40}."""
    return quarter_cycle_sequence([1.0, 2.0], [50.0, 40.0])


def resonant_plus_detuned(theta2=0.0):
    """Resonant quarter-cycle step followed by a strongly detuned one.

    The canonical beat configuration: eps = {1, 1}, delta = {0, 40}.
    """
    return quarter_cycle_sequence([1.0, 1.0], [0.0, 40.0], [0.0, theta2])


def random_sequence(rng, max_steps=8, lo=0.01, hi=100.0):
    """Log-uniform random sequence in the style of the oracle comparisons."""
    n = int(rng.integers(1, max_steps + 1))
    eps = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    dmag = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    deltas = dmag * rng.choice([-1.0, 1.0], n)
    thetas = rng.uniform(-np.pi, np.pi, n)
    taus = np.exp(rng.uniform(np.log(lo), np.log(hi), n))
    return PulseSequence.from_arrays(deltas, eps, thetas, taus)


def coeffs_from_unitary(u):
    """Map a 2x2 SU(2) matrix to its (a, b, c, d) coefficient quadruple."""
    return (u[0, 0].real, u[0, 0].imag, u[0, 1].real, -u[0, 1].imag)
