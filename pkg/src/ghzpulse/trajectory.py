"""Phase-space trajectory of the COM mode and the Magnus error coefficients.

The trajectory obeys ``d alpha = -(i eta / 2) f(t) dt`` with ``f`` the pulse
drive.  Values on the time grid are accumulated panel by panel with
Gauss-Legendre quadrature; line integrals along the curve use composite
Simpson weights on each smooth segment, so breakpoints of the pulse must sit
on even grid nodes.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq

from .pulses import Pulse

DEFAULT_STEPS = 4096
CLOSURE_RTOL = 1e-8
THETA4_IMAG_TOL = 1e-10

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(6)


class QuadratureWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PhaseTrajectory:
    """Sampled trajectory ``alpha(t)`` with its velocity ``d alpha / dt``.

    ``velocity`` holds right-hand limits; ``left_velocity`` maps the node
    index of each interior breakpoint to the left-hand limit there.
    """

    t: np.ndarray
    alpha: np.ndarray
    velocity: np.ndarray
    eta: float
    delta: float = 0.0
    left_velocity: dict = field(default_factory=dict)
    converged: bool = True

    def __post_init__(self):
        if len(self.t) < 2:
            raise ValueError("trajectory needs at least two samples")
        if np.any(np.diff(self.t) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    @classmethod
    def from_samples(cls, t, alpha, eta: float, delta: float = 0.0) -> "PhaseTrajectory":
        """Build a trajectory from samples alone; the velocity comes from a cubic spline."""
        t = np.asarray(t, dtype=float)
        alpha = np.asarray(alpha, dtype=complex)
        spline = CubicSpline(t, alpha)
        return cls(t=t, alpha=alpha, velocity=spline(t, 1), eta=eta, delta=delta)

    @property
    def duration(self) -> float:
        return float(self.t[-1] - self.t[0])

    @property
    def closure(self) -> float:
        return float(abs(self.alpha[-1]))

    @property
    def max_radius(self) -> float:
        return float(np.max(np.abs(self.alpha)))

    def is_closed(self, rtol: float = CLOSURE_RTOL) -> bool:
        return self.closure <= rtol * max(self.max_radius, 1e-300)

    def reversed(self) -> "PhaseTrajectory":
        """The same curve traversed backwards in time."""
        n = len(self.t) - 1
        left = self.velocity.copy()
        for j, v in self.left_velocity.items():
            left[j] = v
        return PhaseTrajectory(
            t=(self.t[-1] + self.t[0]) - self.t[::-1],
            alpha=self.alpha[::-1].copy(),
            velocity=-left[::-1],
            eta=self.eta,
            delta=-self.delta,
            left_velocity={n - j: -self.velocity[j] for j in self.left_velocity},
            converged=self.converged,
        )

    def to_csv(self, path) -> Path:
        path = Path(path)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "re_alpha", "im_alpha"])
            for ti, ai in zip(self.t, self.alpha):
                writer.writerow([repr(float(ti)), repr(float(ai.real)), repr(float(ai.imag))])
        return path


def _breakpoint_indices(pulse: Pulse, n_steps: int) -> list[int]:
    idx = []
    for b in pulse.breakpoints:
        x = b / pulse.t_gate * n_steps
        j = int(round(x))
        if abs(x - j) > 1e-9 or j % 2:
            raise ValueError(
                f"pulse breakpoint at t={b} is not on an even node of a {n_steps}-step grid"
            )
        if 0 < j < n_steps:
            idx.append(j)
    return sorted(set(idx))


def _cumulative_alpha(pulse: Pulse, eta: float, n_steps: int) -> np.ndarray:
    h = pulse.t_gate / n_steps
    starts = np.arange(n_steps) * h
    nodes = starts[:, None] + 0.5 * h * (_GL_NODES[None, :] + 1.0)
    panel = 0.5 * h * (pulse.drive(nodes) @ _GL_WEIGHTS)
    alpha = np.empty(n_steps + 1, dtype=complex)
    alpha[0] = 0.0
    alpha[1:] = np.cumsum(-0.5j * eta * panel)
    return alpha


def integrate_trajectory(pulse: Pulse, eta: float, n_steps: int = DEFAULT_STEPS) -> PhaseTrajectory:
    """Phase trajectory of ``pulse`` on a uniform grid of ``n_steps`` panels."""
    if n_steps < 64:
        raise ValueError("n_steps must be at least 64")
    if n_steps % 2:
        raise ValueError("n_steps must be even")
    breaks = _breakpoint_indices(pulse, n_steps)
    t = np.linspace(0.0, pulse.t_gate, n_steps + 1)
    alpha = _cumulative_alpha(pulse, eta, n_steps)
    fine_end = _cumulative_alpha(pulse, eta, 2 * n_steps)[-1]
    converged = abs(fine_end - alpha[-1]) <= 1e-8

    nudge = 1e-13 * pulse.t_gate
    probe = t.copy()
    probe[0] += nudge
    probe[-1] -= nudge
    for j in breaks:
        probe[j] += nudge
    velocity = -0.5j * eta * pulse.drive(probe)
    left = {j: complex(-0.5j * eta * pulse.drive(np.array([t[j] - nudge]))[0]) for j in breaks}
    return PhaseTrajectory(
        t=t, alpha=alpha, velocity=velocity, eta=eta, delta=pulse.detuning,
        left_velocity=left, converged=bool(converged),
    )


def _simpson_weights(n_points: int, h: float) -> np.ndarray:
    if n_points % 2 == 0:
        raise ValueError("Simpson segments need an even number of intervals")
    w = np.full(n_points, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * h / 3.0


def _line_integral(traj: PhaseTrajectory, integrand) -> complex:
    """Sum of Simpson integrals of ``integrand(alpha, velocity) dt`` over smooth segments."""
    n = len(traj.t) - 1
    uniform = np.allclose(np.diff(traj.t), traj.t[1] - traj.t[0], rtol=1e-9, atol=0)
    if not uniform or n % 2:
        # Irregular sample sets fall back to the trapezoid rule.
        vals = integrand(traj.alpha, traj.velocity)
        return complex(np.trapezoid(vals, traj.t))
    h = traj.t[1] - traj.t[0]
    edges = [0] + sorted(traj.left_velocity) + [n]
    total = 0.0 + 0.0j
    for lo, hi in zip(edges[:-1], edges[1:]):
        vel = traj.velocity[lo:hi + 1].copy()
        if hi in traj.left_velocity:
            vel[-1] = traj.left_velocity[hi]
        vals = integrand(traj.alpha[lo:hi + 1], vel)
        total += np.dot(_simpson_weights(hi - lo + 1, h), vals)
    return complex(total)


def chi_phase(traj: PhaseTrajectory) -> float:
    """Spin-spin phase ``-i oint (alpha d alpha* - alpha* d alpha)``.

    Four times the enclosed area, positive for clockwise circulation
    (the sense produced by rectangular gate pulses).
    """
    val = _line_integral(traj, lambda a, v: a * np.conj(v) - np.conj(a) * v)
    return float((-1j * val).real)


@dataclass(frozen=True)
class MagnusCoefficients:
    chi: float
    theta4: float
    g: complex
    sigma: complex
    h: float
    g2: complex
    theta4_imag: float = 0.0

    @property
    def theta4_is_real(self) -> bool:
        return abs(self.theta4_imag) <= THETA4_IMAG_TOL * max(1.0, abs(self.theta4))


def magnus_coefficients(traj: PhaseTrajectory) -> MagnusCoefficients:
    """Leading out-of-Lamb-Dicke coefficients of the interaction-picture T operator."""
    eta2 = traj.eta ** 2

    def area(a, v):
        return a * np.conj(v) - np.conj(a) * v

    chi_raw = _line_integral(traj, area)
    theta4 = 8j * eta2 * _line_integral(traj, lambda a, v: np.abs(a) ** 2 * area(a, v))
    g = 4.0 * eta2 * _line_integral(
        traj, lambda a, v: a ** 2 * np.conj(v) - 2.0 * np.abs(a) ** 2 * v
    )
    sigma = 1j * eta2 * _line_integral(traj, lambda a, v: np.conj(v))
    g2 = 2j * eta2 * _line_integral(traj, lambda a, v: np.conj(a) * np.conj(v))
    # Orientation fixed so that the number-operator shift equals 2 eta^2 chi.
    h = -2j * eta2 * chi_raw
    return MagnusCoefficients(
        chi=float((-1j * chi_raw).real),
        theta4=float(theta4.real),
        g=complex(g),
        sigma=complex(sigma),
        h=float(h.real),
        g2=complex(g2),
        theta4_imag=float(theta4.imag),
    )


def rectangular_closed_forms(k: int, eta: float) -> dict:
    """chi, theta4 and |g| of the k-circle rectangular gate."""
    return {
        "chi": math.pi / 4.0,
        "theta4": -3.0 * math.pi * eta ** 2 / (8.0 * k),
        "abs_g": math.pi * eta ** 2 / (2.0 * math.sqrt(k)),
    }


def lemniscate_shape_polynomial(a: float) -> float:
    """Cubic whose root in (1/2, 1) cancels theta4 of the figure eight."""
    return 6.0 - 10.0 * a + 3.5 * a ** 2 - 1.5 * a ** 3


def lemniscate_closed_forms(a: float, A: float, eta: float) -> dict:
    """chi and theta4 of the figure eight with half-curve trajectory."""
    return {
        "chi": math.pi * A ** 2 * (1.0 - a),
        "theta4": -math.pi * eta ** 2 * A ** 4 * lemniscate_shape_polynomial(a),
    }


@lru_cache(maxsize=1)
def lemniscate_design_point() -> tuple[float, float]:
    """Shape ``a0`` with vanishing theta4 and size ``A0`` giving chi = pi/4."""
    a0 = brentq(lemniscate_shape_polynomial, 0.5, 1.0, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    A0 = 1.0 / (2.0 * math.sqrt(1.0 - a0))
    return a0, A0
