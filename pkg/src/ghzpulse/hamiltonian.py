"""All-order Lamb-Dicke RWA Hamiltonian restricted to one S_x eigenvalue.

Inside the block with ``S_x = m`` the phonon Hamiltonian is

    H_m(t) = eta m (f*(t) A + f(t) A^dagger),   f(t) = Omega(t) exp(-i delta t),

where ``A`` is the nonlinear ladder operator with matrix elements
``<n|A|n+1> = exp(-eta^2/2) L^1_n(eta^2) / sqrt(n+1)``.  The drive enters
as ``f*`` next to ``A`` so that the linearised block reproduces the
displacement ``D(2 alpha m)`` with ``alpha`` from :mod:`ghzpulse.trajectory`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .pulses import Pulse


def laguerre1(n_max: int, x: float) -> np.ndarray:
    """Generalised Laguerre values ``L^1_0(x) .. L^1_{n_max}(x)`` by upward recurrence."""
    out = np.empty(n_max + 1)
    out[0] = 1.0
    if n_max >= 1:
        out[1] = 2.0 - x
    for k in range(1, n_max):
        out[k + 1] = ((2 * k + 2 - x) * out[k] - (k + 1) * out[k - 1]) / (k + 1)
    return out


def ladder_elements(cutoff: int, eta: float) -> np.ndarray:
    """Superdiagonal ``<n|A|n+1>`` for n = 0 .. cutoff-2."""
    n = np.arange(cutoff - 1)
    lag = laguerre1(cutoff - 2, eta ** 2) if cutoff > 1 else np.empty(0)
    return math.exp(-0.5 * eta ** 2) * lag / np.sqrt(n + 1.0)


def ladder_matrix_element(nf: int, eta: float) -> float:
    if nf < 0:
        raise ValueError("Fock index must be non-negative")
    return float(ladder_elements(nf + 2, eta)[nf])


def ladder_commutator(elements: np.ndarray) -> np.ndarray:
    """Diagonal of ``[A, A^dagger]`` for the truncated operator."""
    sq = elements ** 2
    out = np.zeros(len(elements) + 1)
    out[:-1] += sq
    out[1:] -= sq
    return out


def fock_cutoff(max_radius: float, m: float) -> int:
    """Fock dimension holding a coherent state of amplitude ``2 |alpha|_max |m|`` with margin."""
    b = 2.0 * max_radius * abs(m)
    return max(16, int(math.ceil(b * b + 8.0 * b + 16.0)))


@dataclass(frozen=True)
class BlockHamiltonian:
    m: float
    eta: float
    cutoff: int
    pulse: Pulse

    def __post_init__(self):
        if self.cutoff < 8:
            raise ValueError("cutoff must be at least 8")

    @cached_property
    def elements(self) -> np.ndarray:
        return ladder_elements(self.cutoff, self.eta)

    @cached_property
    def commutator(self) -> np.ndarray:
        return ladder_commutator(self.elements)

    def superdiagonal(self, t: float) -> np.ndarray:
        """``<n|H_m(t)|n+1>``; the matrix is Hermitian with zero diagonal."""
        f = complex(self.pulse.drive(np.array([t]))[0])
        return self.eta * self.m * np.conj(f) * self.elements

    def matrix(self, t: float) -> np.ndarray:
        upper = self.superdiagonal(t)
        H = np.zeros((self.cutoff, self.cutoff), dtype=complex)
        idx = np.arange(self.cutoff - 1)
        H[idx, idx + 1] = upper
        H[idx + 1, idx] = np.conj(upper)
        return H

    def norm_bound(self, t: float) -> float:
        return float(2.0 * np.max(np.abs(self.superdiagonal(t)), initial=0.0))


def build_block(m: float, pulse: Pulse, eta: float, cutoff: int) -> BlockHamiltonian:
    return BlockHamiltonian(m=float(m), eta=eta, cutoff=int(cutoff), pulse=pulse)
