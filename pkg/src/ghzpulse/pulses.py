"""Laser pulse families for the global Molmer-Sorensen interaction.

A pulse is the complex Rabi envelope ``Omega(t)`` on ``[0, t_gate]`` together
with the bichromatic detuning ``delta``.  The motional mode is driven by

    f(t) = Omega(t) * exp(-1j * delta * t)

and every downstream quantity (phase trajectory, error coefficients,
Hamiltonian blocks) is expressed through ``f``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping

import numpy as np

FAMILIES = (
    "rectangular",
    "echoed_rectangular",
    "lemniscate",
    "echoed_lemniscate",
    "custom",
)

DEFAULT_SAMPLES = 4096


class NonFigureEightError(ValueError):
    """Raised when lemniscate parameters leave the figure-eight regime."""


@dataclass(frozen=True)
class Pulse:
    """Immutable pulse description.

    ``shape`` is only evaluated inside the gate window; :meth:`envelope`
    returns zero outside of it.  ``breakpoints`` lists interior times where
    the envelope is discontinuous, so integrators can align their grids.
    """

    shape: Callable[[np.ndarray], np.ndarray]
    detuning: float
    t_gate: float
    family: str = "custom"
    params: Mapping[str, float] = field(default_factory=dict)
    breakpoints: tuple[float, ...] = ()

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown pulse family {self.family!r}")
        if not self.t_gate > 0:
            raise ValueError("t_gate must be positive")

    def envelope(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        out = np.zeros(t.shape, dtype=complex)
        inside = (t >= 0.0) & (t <= self.t_gate)
        if np.any(inside):
            out[inside] = self.shape(t[inside])
        return out

    def drive(self, t) -> np.ndarray:
        """Effective drive ``Omega(t) exp(-i delta t)`` seen by the COM mode."""
        t = np.asarray(t, dtype=float)
        return self.envelope(t) * np.exp(-1j * self.detuning * t)

    def scaled(self, factor: float) -> "Pulse":
        """Same pulse with the amplitude multiplied by ``factor``."""
        shape = self.shape
        params = dict(self.params)
        params["amplitude_scale"] = params.get("amplitude_scale", 1.0) * factor
        return replace(self, shape=lambda t: factor * shape(t), params=params)

    def rescaled(self, lam: float) -> "Pulse":
        """Time-dilated pulse: t -> lam t, delta -> delta/lam, Omega -> Omega(t/lam)/lam.

        The all-order Hamiltonian is invariant under this map, so gate
        fidelities must not change.
        """
        if not lam > 0:
            raise ValueError("rescaling factor must be positive")
        shape = self.shape
        return replace(
            self,
            shape=lambda t: shape(t / lam) / lam,
            detuning=self.detuning / lam,
            t_gate=self.t_gate * lam,
            breakpoints=tuple(b * lam for b in self.breakpoints),
        )

    def sample(self, n_points: int = DEFAULT_SAMPLES):
        t = np.linspace(0.0, self.t_gate, n_points)
        return t, self.envelope(t)

    def max_amplitude(self, n_points: int = DEFAULT_SAMPLES) -> float:
        return float(np.max(np.abs(self.sample(n_points)[1])))

    def to_csv(self, path, n_points: int = DEFAULT_SAMPLES) -> Path:
        """Write ``t, re_omega, im_omega, delta`` rows with a header."""
        path = Path(path)
        t, omega = self.sample(n_points)
        with path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["t", "re_omega", "im_omega", "delta"])
            for ti, wi in zip(t, omega):
                writer.writerow([repr(float(ti)), repr(float(wi.real)), repr(float(wi.imag)), repr(float(self.detuning))])
        return path


def _check_positive(**kwargs):
    for name, value in kwargs.items():
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")


def rectangular_parameters(k: int, t_gate: float, eta: float) -> tuple[float, float]:
    """Amplitude and detuning closing ``k`` circles with spin-spin phase pi/4."""
    omega0 = math.pi * math.sqrt(k) / (eta * t_gate)
    delta = 2.0 * math.pi * k / t_gate
    return omega0, delta


def make_rectangular(k: int, t_gate: float = 1.0, eta: float = 0.03) -> Pulse:
    if isinstance(k, bool) or int(k) != k:
        raise ValueError(f"k must be a positive integer, got {k!r}")
    k = int(k)
    _check_positive(k=k, t_gate=t_gate, eta=eta)
    if eta >= 1:
        raise ValueError("eta must be below 1")
    omega0, delta = rectangular_parameters(k, t_gate, eta)
    return Pulse(
        shape=lambda t: np.full(np.shape(t), omega0, dtype=complex),
        detuning=delta,
        t_gate=t_gate,
        family="rectangular",
        params={"k": k, "eta": eta, "omega0": omega0},
    )


def lemniscate_alpha(a: float, A: float, t_gate: float, t):
    """Figure-eight curve ``A(1 - cos gt) + i A sin gt (1 - a + a cos gt)``.

    The curve is the displacement ``2 alpha`` that enters ``D(2 alpha S_x)``;
    the phase trajectory itself is half of it.  This is the scale on which
    ``chi = pi A^2 (1 - a)`` holds.
    """
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > t_gate):
        raise ValueError("t must lie in [0, t_gate]")
    phi = 2.0 * np.pi / t_gate * t
    out = A * (1.0 - np.cos(phi)) + 1j * A * np.sin(phi) * (1.0 - a + a * np.cos(phi))
    return out if out.ndim else complex(out)


def lemniscate_velocity(a: float, A: float, t_gate: float, t):
    """Time derivative of :func:`lemniscate_alpha`."""
    gamma = 2.0 * np.pi / t_gate
    phi = gamma * np.asarray(t, dtype=float)
    return A * gamma * (np.sin(phi) + 1j * ((1.0 - a) * np.cos(phi) + a * np.cos(2.0 * phi)))


def make_lemniscate(a: float, A: float, t_gate: float = 1.0, eta: float = 0.03) -> Pulse:
    """Amplitude- and phase-modulated pulse (delta = 0) tracing the figure eight.

    With ``d alpha = -(i eta / 2) Omega dt`` and ``alpha`` equal to half the
    curve, ``Omega = (i / eta) d(curve)/dt``.
    """
    if not a > 0.5:
        raise NonFigureEightError(f"a = {a!r} gives no figure-eight trajectory (need a > 1/2)")
    _check_positive(A=A, t_gate=t_gate, eta=eta)

    def shape(t):
        return 1j / eta * lemniscate_velocity(a, A, t_gate, t)

    return Pulse(
        shape=shape,
        detuning=0.0,
        t_gate=t_gate,
        family="lemniscate",
        params={"a": a, "A": A, "eta": eta},
    )


def echo_transform(p: Pulse) -> Pulse:
    """Compress the pulse into the first half and replay it negated in the second.

    The second half uses ``Omega(2t - t_gate) exp(i delta t_gate)``, which is
    the same as ``Omega(2(t - t_gate))`` for the periodic gate pulses and
    makes the drive on the second half exactly ``-sqrt(2) f(2t - t_gate)``
    for any input.
    """
    T = p.t_gate
    half = 0.5 * T
    envelope = p.envelope
    phase = np.exp(1j * p.detuning * T)
    root2 = math.sqrt(2.0)

    def shape(t):
        t = np.asarray(t, dtype=float)
        first = t < half
        out = np.empty(t.shape, dtype=complex)
        out[first] = root2 * envelope(2.0 * t[first])
        out[~first] = -root2 * phase * envelope(2.0 * t[~first] - T)
        return out

    family = "echoed_" + p.family if p.family in ("rectangular", "lemniscate") else "custom"
    inner = [0.5 * b for b in p.breakpoints]
    bps = sorted(set(inner + [half] + [half + b for b in inner]))
    return Pulse(
        shape=shape,
        detuning=2.0 * p.detuning,
        t_gate=T,
        family=family,
        params=dict(p.params),
        breakpoints=tuple(bps),
    )


def make_pulse(family: str, t_gate: float = 1.0, eta: float = 0.03, k: int = 1, a=None, A=None) -> Pulse:
    """Build any named family; lemniscate families default to the design point."""
    if family in ("rectangular", "echoed_rectangular"):
        p = make_rectangular(k, t_gate, eta)
    elif family in ("lemniscate", "echoed_lemniscate"):
        if a is None or A is None:
            from .trajectory import lemniscate_design_point

            a0, A0 = lemniscate_design_point()
            a = a0 if a is None else a
            A = A0 if A is None else A
        p = make_lemniscate(a, A, t_gate, eta)
    else:
        raise ValueError(f"cannot build pulse family {family!r} by name")
    return echo_transform(p) if family.startswith("echoed_") else p
