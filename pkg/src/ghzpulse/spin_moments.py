"""Exact collective-spin moments in the all-ones product state."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb

MAX_ORDER = 8


def sx_eigenvalues(n: int) -> list[Fraction]:
    """Eigenvalues m = n/2, n/2 - 1, ..., -n/2 of S_x (half-integers for odd n)."""
    return [Fraction(n - 2 * j, 2) for j in range(n + 1)]


def sx_weights(n: int) -> list[Fraction]:
    """Probability C(n, n/2 - m) / 2^n of each S_x eigenvalue, same order as :func:`sx_eigenvalues`."""
    return [Fraction(comb(n, j), 2 ** n) for j in range(n + 1)]


@lru_cache(maxsize=None)
def sx_moment(n: int, p: int) -> Fraction:
    if n < 1:
        raise ValueError("n must be at least 1")
    if not 0 <= p <= MAX_ORDER:
        raise ValueError(f"moment order must be in 0..{MAX_ORDER}")
    return sum((w * m ** p for m, w in zip(sx_eigenvalues(n), sx_weights(n))), Fraction(0))


@dataclass(frozen=True)
class SpinMomentTable:
    n: int
    moments: dict

    @classmethod
    def build(cls, n: int, max_order: int = MAX_ORDER) -> "SpinMomentTable":
        return cls(n=n, moments={p: sx_moment(n, p) for p in range(max_order + 1)})

    def __getitem__(self, p: int) -> Fraction:
        return self.moments[p]

    def as_floats(self) -> dict:
        return {p: float(v) for p, v in self.moments.items()}
