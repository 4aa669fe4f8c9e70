"""Leading-order GHZ infidelity from the theta4 / g coefficients."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .spin_moments import sx_moment


def _brackets(n: int) -> tuple[Fraction, Fraction, Fraction]:
    s2, s4, s6, s8 = (sx_moment(n, p) for p in (2, 4, 6, 8))
    return s8 - s4 ** 2, s6 - s4 * s2, s4 - s2 ** 2


def sx4_weight(n: int) -> Fraction:
    """Coefficient of theta4^2 in the infidelity at the optimal amplitude."""
    var8, cov, var4 = _brackets(n)
    return var8 - cov ** 2 / var4


def phonon_weight(n: int) -> Fraction:
    """Coefficient of |g|^2 (the sixth moment)."""
    return sx_moment(n, 6)


def phonon_probability(g: complex, n: int) -> float:
    return abs(g) ** 2 * float(sx_moment(n, 6))


def optimal_amplitude(n: int, theta4: float, eta: float) -> tuple[float, float]:
    """Optimal ``delta_theta2`` and the relative amplitude shift it implies.

    The shift includes the ``eta^2 / 2`` from renormalising the drive by
    ``1 - eta^2 / 2``.
    """
    if n < 2:
        raise ValueError("optimal amplitude needs n >= 2")
    _, cov, var4 = _brackets(n)
    dtheta2 = -theta4 * float(cov / var4)
    return dtheta2, dtheta2 / math.pi + eta ** 2 / 2.0


def amplitude_to_dtheta2(delta_omega_rel: float, eta: float) -> float:
    """Inverse of the amplitude map: relative drive shift to ``delta_theta2``."""
    return math.pi * (delta_omega_rel - eta ** 2 / 2.0)


def perturbative_infidelity(n: int, theta4: float, g: complex, delta_theta2: float) -> float:
    var8, cov, var4 = (float(x) for x in _brackets(n))
    return (
        theta4 ** 2 * var8
        + 2.0 * delta_theta2 * theta4 * cov
        + delta_theta2 ** 2 * var4
        + phonon_probability(g, n)
    )


@dataclass(frozen=True)
class PerturbativePrediction:
    delta_theta2_opt: float
    delta_omega_rel: float
    infidelity: float
    phonon_prob: float
    sx4_contribution: float


def predict(n: int, theta4: float, g: complex, eta: float) -> PerturbativePrediction:
    dtheta2, rel = optimal_amplitude(n, theta4, eta)
    p_ph = phonon_probability(g, n)
    sx4 = theta4 ** 2 * float(sx4_weight(n))
    return PerturbativePrediction(
        delta_theta2_opt=dtheta2,
        delta_omega_rel=rel,
        infidelity=perturbative_infidelity(n, theta4, g, dtheta2),
        phonon_prob=p_ph,
        sx4_contribution=sx4,
    )


def contribution_table(n_values, theta4: float, g: complex) -> list[tuple[int, float, float]]:
    """Rows ``(n, S_x^4 contribution, phonon contribution)`` at the optimal amplitude."""
    return [
        (n, theta4 ** 2 * float(sx4_weight(n)), phonon_probability(g, n))
        for n in n_values
    ]
