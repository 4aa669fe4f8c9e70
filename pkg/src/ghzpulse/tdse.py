"""Block-diagonal TDSE for the all-order Hamiltonian and GHZ fidelity.

The Hamiltonian commutes with S_x, so the initial state |1...1> splits into
S_x eigenstates with binomial amplitudes and each block ``m`` evolves the
phonon vacuum independently.  Each time step applies the fourth-order
(two-point Gauss) Magnus exponent.  Because ``[A, A^dagger]`` is diagonal
the exponent stays tridiagonal, and it is applied with a Chebyshev
expansion.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from math import comb
from pathlib import Path
from typing import Optional

import numba
import numpy as np
from scipy.special import jv

from .hamiltonian import BlockHamiltonian, build_block, fock_cutoff
from .pulses import Pulse
from .trajectory import integrate_trajectory

NORM_TOL = 1e-10
LEAKAGE_TOL = 1e-8
_CHEB_EPS = 1e-17
_SQRT3 = math.sqrt(3.0)


class LeakageError(RuntimeError):
    """Population reached the top of the truncated Fock space."""


class ConvergenceError(RuntimeError):
    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


@numba.njit(cache=True)
def _tridiag_apply(upper, diag, x, out):
    n = x.shape[0]
    for i in range(n):
        acc = diag[i] * x[i]
        if i + 1 < n:
            acc += upper[i] * x[i + 1]
        if i > 0:
            acc += np.conj(upper[i - 1]) * x[i - 1]
        out[i] = acc


@numba.njit(cache=True)
def _propagate(psi, elements, commutator, coef, kappa, radius, cheb, orders, n_top):
    n = psi.shape[0]
    upper = np.empty(n - 1, dtype=np.complex128)
    diag = np.empty(n, dtype=np.float64)
    p0 = np.empty(n, dtype=np.complex128)
    p1 = np.empty(n, dtype=np.complex128)
    p2 = np.empty(n, dtype=np.complex128)
    acc = np.empty(n, dtype=np.complex128)
    leak = 0.0
    for s in range(coef.shape[0]):
        r = radius[s]
        if r > 0.0:
            for i in range(n - 1):
                upper[i] = coef[s] * elements[i] / r
            for i in range(n):
                diag[i] = kappa[s] * commutator[i] / r
            for i in range(n):
                p0[i] = psi[i]
                acc[i] = cheb[s, 0] * psi[i]
            _tridiag_apply(upper, diag, p0, p1)
            for i in range(n):
                acc[i] += cheb[s, 1] * p1[i]
            for k in range(2, orders[s]):
                _tridiag_apply(upper, diag, p1, p2)
                for i in range(n):
                    p2[i] = 2.0 * p2[i] - p0[i]
                    acc[i] += cheb[s, k] * p2[i]
                    p0[i] = p1[i]
                    p1[i] = p2[i]
            for i in range(n):
                psi[i] = acc[i]
        top = 0.0
        for i in range(n - n_top, n):
            top += psi[i].real ** 2 + psi[i].imag ** 2
        if top > leak:
            leak = top
    return leak


@dataclass
class BlockEvolution:
    m: float
    state: np.ndarray
    leakage: float

    @property
    def overlap(self) -> complex:
        return complex(self.state[0])

    @property
    def norm_error(self) -> float:
        return abs(float(np.vdot(self.state, self.state).real) - 1.0)


def _step_edges_ok(pulse: Pulse, time_steps: int) -> None:
    for b in pulse.breakpoints:
        x = b / pulse.t_gate * time_steps
        if abs(x - round(x)) > 1e-9:
            raise ValueError(f"pulse breakpoint t={b} does not fall on a time-step edge")


def evolve_block(block: BlockHamiltonian, time_steps: int, check_leakage: bool = True) -> BlockEvolution:
    """Evolve the phonon vacuum through the whole pulse inside block ``m``."""
    pulse = block.pulse
    _step_edges_ok(pulse, time_steps)
    psi = np.zeros(block.cutoff, dtype=complex)
    psi[0] = 1.0
    n_top = max(1, int(math.ceil(0.05 * block.cutoff)))
    if block.m == 0:
        return BlockEvolution(m=block.m, state=psi, leakage=0.0)

    h = pulse.t_gate / time_steps
    starts = np.arange(time_steps) * h
    f1 = pulse.drive(starts + h * (0.5 - _SQRT3 / 6.0))
    f2 = pulse.drive(starts + h * (0.5 + _SQRT3 / 6.0))
    em = block.eta * block.m
    coef = 0.5 * h * em * np.conj(f1 + f2)
    kappa = -(_SQRT3 / 6.0) * h * h * em * em * np.imag(np.conj(f1) * f2)

    elements = block.elements
    comm = block.commutator
    e_max = float(np.max(np.abs(elements), initial=0.0))
    c_max = float(np.max(np.abs(comm), initial=0.0))
    radius = np.abs(kappa) * c_max + 2.0 * np.abs(coef) * e_max
    radius = np.where(radius > 1e-300, radius * (1.0 + 1e-12), 0.0)

    k_max = int(np.ceil(radius.max())) + 40
    ks = np.arange(k_max)
    bessel = jv(ks[None, :], radius[:, None])
    cheb = (2.0 * (-1j) ** ks)[None, :] * bessel
    cheb[:, 0] = bessel[:, 0]
    significant = np.abs(bessel) > _CHEB_EPS
    orders = np.where(significant.any(axis=1), k_max - np.argmax(significant[:, ::-1], axis=1), 1)
    orders = np.maximum(orders, 2).astype(np.int64)

    leak = _propagate(psi, elements, comm, coef.astype(complex), kappa.astype(float),
                      radius, cheb, orders, n_top)
    if check_leakage and leak > LEAKAGE_TOL:
        raise LeakageError(
            f"block m={block.m}: top-level population {leak:.2e} with cutoff {block.cutoff}"
        )
    return BlockEvolution(m=block.m, state=psi, leakage=float(leak))


def sx_values(n: int) -> np.ndarray:
    return np.array([(n - 2 * j) / 2.0 for j in range(n + 1)])


def binomial_weights(n: int) -> np.ndarray:
    """C(n, n/2 - m) for m in :func:`sx_values` order (unnormalised)."""
    return np.array([float(comb(n, j)) for j in range(n + 1)])


def ghz_fidelity(overlaps, n: int) -> float:
    """Overlap with the ideal GHZ-like state from per-block vacuum amplitudes.

    ``overlaps`` lists ``<0|psi_m>`` for every ``m`` in :func:`sx_values`.
    """
    overlaps = np.asarray(overlaps, dtype=complex)
    if overlaps.shape != (n + 1,):
        raise ValueError(f"need {n + 1} block overlaps, got {overlaps.shape}")
    m = sx_values(n)
    amp = np.sum(np.exp(0.5j * np.pi * m ** 2) * binomial_weights(n) * overlaps) / 2.0 ** n
    return float(abs(amp) ** 2)


def phonon_excitation(overlaps, n: int) -> float:
    """Probability of leaving the phonon vacuum: ``1 - sum_m w_m |<0|psi_m>|^2``."""
    overlaps = np.asarray(overlaps, dtype=complex)
    w = binomial_weights(n) / 2.0 ** n
    return float(1.0 - np.sum(w * np.abs(overlaps) ** 2))


@dataclass
class SimulationConfig:
    n: int
    eta: float
    pulse: Pulse
    cutoff: Optional[int] = None
    time_steps: int = 2048
    rtol: float = 1e-3
    atol: float = 1e-10
    check_convergence: bool = False
    max_refinements: int = 3
    use_symmetry: bool = True

    def __post_init__(self):
        if self.n < 2:
            raise ValueError("need at least two ions")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie in (0, 1)")
        if self.time_steps < 256:
            raise ValueError("time_steps must be at least 256")
        if self.cutoff is not None and self.cutoff < 8:
            raise ValueError("cutoff must be at least 8")


@dataclass
class SimulationResult:
    n: int
    fidelity: float
    infidelity: float
    phonon_prob: float
    m_values: list
    overlaps: list
    diagnostics: dict = field(default_factory=dict)
    states: Optional[list] = field(default=None, repr=False)

    def to_record(self, config: Optional[SimulationConfig] = None) -> dict:
        rec = {}
        if config is not None:
            rec["config"] = {
                "n": config.n,
                "eta": config.eta,
                "pulse": {"family": config.pulse.family, "t_gate": config.pulse.t_gate,
                          "detuning": config.pulse.detuning, **{k: float(v) for k, v in config.pulse.params.items()}},
                "cutoff": config.cutoff,
                "time_steps": config.time_steps,
            }
        rec.update({
            "fidelity": self.fidelity,
            "infidelity": self.infidelity,
            "phonon_prob": self.phonon_prob,
            "overlaps": [{"m": m, "re": z.real, "im": z.imag} for m, z in zip(self.m_values, self.overlaps)],
            "diagnostics": self.diagnostics,
        })
        return rec

    def to_json(self, path, config: Optional[SimulationConfig] = None) -> Path:
        path = Path(path)
        path.write_text(json.dumps(self.to_record(config), indent=2, sort_keys=True))
        return path


def _run_blocks(config: SimulationConfig, time_steps: int, cutoff_scale: float, keep_states=False) -> SimulationResult:
    n = config.n
    m_all = sx_values(n)
    rmax = integrate_trajectory(config.pulse, config.eta).max_radius
    cache = {}
    cutoffs = {}
    for m in m_all:
        key = abs(m) if config.use_symmetry else m
        if key in cache:
            continue
        base = config.cutoff if config.cutoff is not None else fock_cutoff(rmax, m)
        cutoff = max(8, int(math.ceil(base * cutoff_scale)))
        cutoffs[float(key)] = cutoff
        block = build_block(key, config.pulse, config.eta, cutoff)
        cache[key] = evolve_block(block, time_steps)
    evolutions = [cache[abs(m) if config.use_symmetry else m] for m in m_all]
    overlaps = [ev.overlap for ev in evolutions]
    fid = ghz_fidelity(overlaps, n)
    diag = {
        "time_steps": time_steps,
        "cutoffs": {str(k): v for k, v in sorted(cutoffs.items())},
        "max_leakage": max(ev.leakage for ev in cache.values()),
        "max_norm_error": max(ev.norm_error for ev in cache.values()),
    }
    return SimulationResult(
        n=n,
        fidelity=fid,
        infidelity=1.0 - fid,
        phonon_prob=phonon_excitation(overlaps, n),
        m_values=[float(m) for m in m_all],
        overlaps=overlaps,
        diagnostics=diag,
        states=[ev.state for ev in evolutions] if keep_states else None,
    )


def simulate(config: SimulationConfig, keep_states: bool = False) -> SimulationResult:
    """Fidelity of the GHZ preparation for ``config``.

    With ``check_convergence`` the run is repeated with doubled time steps and
    doubled cutoff; whichever control moves the infidelity by more than
    ``atol + rtol * infidelity`` is doubled until both agree or the
    refinement budget runs out.
    """
    steps, scale = config.time_steps, 1.0
    result = _run_blocks(config, steps, scale, keep_states)
    if not config.check_convergence:
        return result
    for _ in range(config.max_refinements + 1):
        tol = config.atol + config.rtol * abs(result.infidelity)
        d_steps = abs(_run_blocks(config, 2 * steps, scale).infidelity - result.infidelity)
        d_cut = abs(_run_blocks(config, steps, 2 * scale).infidelity - result.infidelity)
        result.diagnostics.update(step_delta=d_steps, cutoff_delta=d_cut)
        if d_steps <= tol and d_cut <= tol:
            result.diagnostics["converged"] = True
            return result
        if d_steps > tol:
            steps *= 2
        if d_cut > tol:
            scale *= 2
        result = _run_blocks(config, steps, scale, keep_states)
    result.diagnostics["converged"] = False
    raise ConvergenceError(
        f"no convergence after {config.max_refinements} refinements "
        f"(step delta {d_steps:.3e}, cutoff delta {d_cut:.3e})",
        result,
    )
