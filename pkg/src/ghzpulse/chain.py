"""Linear-chain stability and COM-mode Lamb-Dicke estimates."""

from __future__ import annotations

import math
from dataclasses import dataclass

CA40_RECOIL = 2 * math.pi * 9390.6  # rad/s, 729 nm


@dataclass(frozen=True)
class ChainParams:
    n: int
    omega_radial: float
    omega_axial: float
    omega_recoil: float = CA40_RECOIL
    species: str = "40Ca+"

    def __post_init__(self):
        for name in ("omega_radial", "omega_axial", "omega_recoil"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")

    @property
    def eta(self) -> float:
        return com_lamb_dicke(self.omega_recoil, self.omega_axial, self.n)

    @property
    def is_linear(self) -> bool:
        return self.omega_axial < max_axial_frequency(self.n, self.omega_radial)


def critical_anisotropy(n: int) -> float:
    """Approximate radial/axial frequency ratio below which the chain buckles (natural log)."""
    if n < 2:
        raise ValueError("critical anisotropy needs n >= 2")
    return 3.0 * n / (4.0 * math.sqrt(math.log(n)))


def max_axial_frequency(n: int, omega_radial: float) -> float:
    return omega_radial / critical_anisotropy(n)


def com_lamb_dicke(omega_recoil: float, omega_axial: float, n: int) -> float:
    if omega_recoil <= 0 or omega_axial <= 0 or n < 1:
        raise ValueError("frequencies and n must be positive")
    return math.sqrt(omega_recoil / (omega_axial * n))


def lamb_dicke_estimate(omega_recoil: float, omega_radial: float, n: int) -> float:
    """COM Lamb-Dicke parameter with the axial frequency at the stability limit."""
    return math.sqrt(3.0 * omega_recoil / (4.0 * omega_radial)) * math.log(n) ** -0.25


def chain_table(n_values, omega_radial: float, omega_recoil: float = CA40_RECOIL) -> list[dict]:
    rows = []
    for n in n_values:
        wz = max_axial_frequency(n, omega_radial)
        rows.append({
            "n": n,
            "a_n": critical_anisotropy(n),
            "omega_z_max": wz,
            "eta": com_lamb_dicke(omega_recoil, wz, n),
        })
    return rows
