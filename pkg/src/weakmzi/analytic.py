"""Closed-form results for the nested interferometer with a QND meter at C.

Everything here is written out by hand from the algebra, with no matrix
evolution, so the simulator can be checked against it. ``theta`` is the
dimensionless coupling phase eta*tau.
"""

from __future__ import annotations

import numpy as np

_SQRT2 = np.sqrt(2.0)


def preselected_amplitudes(r: float, t: float) -> np.ndarray:
    """Path amplitudes at stage L2 for a photon injected in |100>."""
    return np.array([r, t / _SQRT2, t / _SQRT2], dtype=complex)


def postselected_amplitudes(r: float, t: float) -> np.ndarray:
    """Ket amplitudes of the state whose bra is <100|U_L4 U_L3."""
    return np.array([r, -t / _SQRT2, t / _SQRT2], dtype=complex)


def unperturbed_output(r: float, t: float) -> np.ndarray:
    """Path amplitudes after all four stages, no measurement."""
    return np.array([r * r, r * t, t], dtype=complex)


def overlap(r: float, t: float) -> float:
    return r * r


def click_probability_unperturbed(r: float) -> float:
    return r**4


def weak_value_c(r: float, t: float) -> float:
    return t * t / (2 * r * r)


def weak_value_b(r: float, t: float) -> float:
    return -t * t / (2 * r * r)


def stage_two_coupled_state(r: float, t: float, theta: float) -> np.ndarray:
    """Joint state at L2 after exact coupling at C and the meter pulse.

    Returned as a (3, 2) array indexed [path mode, meter level (b, c)].
    """
    pre = preselected_amplitudes(r, t)
    meter = np.array([1.0, 1.0]) * (1 + 1j) / 2
    kick = (t / (2 * _SQRT2)) * (np.exp(-1j * theta) - 1)
    out = np.outer(pre, meter)
    out[2] += kick * np.array([1.0, 1j])
    return out


def final_joint_state(r: float, t: float, theta: float) -> np.ndarray:
    """Joint state after U_L4, same layout as :func:`stage_two_coupled_state`."""
    kick = (t / 4) * (np.exp(-1j * theta) - 1)
    out = np.outer(unperturbed_output(r, t), np.array([1.0, 1.0]) * (1 + 1j) / 2)
    out += kick * np.outer(np.array([t, -r, 1.0]), np.array([1.0, 1j]))
    return out


def exact_p_b(r: float, t: float, theta: float) -> float:
    """Probability of a D1 click with the meter found in |b>."""
    return abs((1 + 1j) * r * r / 2 + (t * t / 4) * (np.exp(-1j * theta) - 1)) ** 2


def exact_p_c(r: float, t: float, theta: float) -> float:
    return abs((1 + 1j) * r * r / 2 + 1j * (t * t / 4) * (np.exp(-1j * theta) - 1)) ** 2


def exact_click_probability(r: float, t: float, theta: float) -> float:
    """P_b + P_c: the D1 rate is shifted at second order in theta."""
    return r**4 + (t * t / 2) * (1 - np.cos(theta)) * (t * t / 2 - r * r)


def exact_p_e(t: float, theta: float) -> float:
    """Probability of the photon at E, summed over both meter levels."""
    return (t * t / 4) * (1 - np.cos(theta))


def first_order_p_b(overlap_sq: float, weak_value: float, theta: float) -> float:
    return 0.5 * overlap_sq * (1 - np.sin(theta * weak_value))


def first_order_p_c(overlap_sq: float, weak_value: float, theta: float) -> float:
    return 0.5 * overlap_sq * (1 + np.sin(theta * weak_value))


def first_order_leak_b(t: float, theta: float) -> float:
    """Linearized probability of the photon at E jointly with meter |b>."""
    return theta * theta * t * t / 16
