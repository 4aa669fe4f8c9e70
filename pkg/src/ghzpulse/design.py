"""Amplitude and figure-eight parameter scans around the analytic design values.

Scan points are described by picklable :class:`PulseSpec` values so they can
be farmed out to a process pool; results are always gathered in grid order.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .perturbative import predict
from .pulses import make_pulse
from .tdse import SimulationConfig, simulate
from .trajectory import integrate_trajectory, lemniscate_design_point, magnus_coefficients

RECT_FAMILIES = ("rectangular", "echoed_rectangular")
LEMNISCATE_FAMILIES = ("lemniscate", "echoed_lemniscate")

DEFAULT_AMPLITUDE_GRID = np.linspace(-0.01, 0.02, 61)
DEFAULT_DA_GRID = np.linspace(-0.01, 0.01, 41)
DEFAULT_DA_REL_GRID = np.linspace(0.0, 0.02, 41)

WORKERS_ENV = "GHZPULSE_WORKERS"


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


@dataclass(frozen=True)
class PulseSpec:
    """Everything needed to rebuild a pulse inside a worker process.

    For rectangular families ``shift`` is the relative amplitude change
    ``dOmega/Omega``; for lemniscate families ``shift`` is ``dA/A0`` and
    ``da`` is the shape offset from the design value.
    """

    family: str
    eta: float
    k: int = 1
    shift: float = 0.0
    da: float = 0.0
    t_gate: float = 1.0

    @property
    def label(self) -> str:
        if self.family in RECT_FAMILIES:
            return f"{self.family}_k{self.k}"
        return self.family

    def build(self):
        if self.family in RECT_FAMILIES:
            return make_pulse(self.family, self.t_gate, self.eta, k=self.k).scaled(1.0 + self.shift)
        a0, A0 = lemniscate_design_point()
        return make_pulse(self.family, self.t_gate, self.eta, a=a0 + self.da, A=A0 * (1.0 + self.shift))

    def default_steps(self) -> int:
        circles = self.k * (2 if self.family.startswith("echoed_") else 1)
        return 1024 * max(1, math.ceil(circles / 4))


@dataclass(frozen=True)
class Evaluation:
    spec: PulseSpec
    infidelity: float
    phonon_prob: float
    error: str = ""


def evaluate(spec: PulseSpec, n: int, time_steps: Optional[int] = None) -> Evaluation:
    """One TDSE run; failures are captured instead of raised."""
    try:
        cfg = SimulationConfig(n=n, eta=spec.eta, pulse=spec.build(),
                               time_steps=time_steps or spec.default_steps())
        res = simulate(cfg)
        return Evaluation(spec, res.infidelity, res.phonon_prob)
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return Evaluation(spec, math.nan, math.nan, f"{type(exc).__name__}: {exc}")


def _evaluate_star(args):
    return evaluate(*args)


def evaluate_many(specs: Sequence[PulseSpec], n: int, workers: Optional[int] = None,
                  time_steps: Optional[int] = None) -> list[Evaluation]:
    workers = workers or default_workers()
    jobs = [(s, n, time_steps) for s in specs]
    if workers <= 1 or len(jobs) <= 1:
        return [_evaluate_star(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_evaluate_star, jobs))


class _Objective:
    """Memoised scalar objective that records every evaluation."""

    def __init__(self, n: int, time_steps: Optional[int] = None):
        self.n = n
        self.time_steps = time_steps
        self.log: dict[PulseSpec, Evaluation] = {}

    def __call__(self, spec: PulseSpec) -> float:
        if spec not in self.log:
            self.log[spec] = evaluate(spec, self.n, self.time_steps)
        value = self.log[spec].infidelity
        return value if math.isfinite(value) else 1.0


def _golden(fun, x0: float, step: float, xtol: float):
    """Brent/golden minimisation started from a bracket around ``x0``."""
    res = minimize_scalar(fun, bracket=(x0 - step, x0), options={"xtol": xtol})
    return float(res.x), float(res.fun)


@dataclass
class ScanResult:
    axes: dict
    infidelity: np.ndarray
    phonon_prob: np.ndarray
    optimum: dict
    errors: list = field(default_factory=list)
    analytic: Optional[dict] = None
    valley: Optional[list] = None
    n_evaluations: int = 0


def _rect_prediction(n: int, eta: float, k: int, family: str) -> dict:
    p = make_pulse(family, 1.0, eta, k=k)
    c = magnus_coefficients(integrate_trajectory(p, eta))
    pred = predict(n, c.theta4, c.g, eta)
    return {"delta_omega_rel": pred.delta_omega_rel, "infidelity": pred.infidelity,
            "phonon_prob": pred.phonon_prob, "theta4": c.theta4, "abs_g": abs(c.g)}


def optimize_amplitude(n: int, eta: float, k: int = 1, family: str = "rectangular",
                       start: Optional[float] = None, xtol: float = 1e-4,
                       time_steps: Optional[int] = None):
    """Refined amplitude optimum, starting from the perturbative prediction."""
    if family not in RECT_FAMILIES:
        raise ValueError(f"amplitude optimisation needs a rectangular family, got {family!r}")
    if start is None:
        start = _rect_prediction(n, eta, k, family)["delta_omega_rel"]
    obj = _Objective(n, time_steps)
    spec = PulseSpec(family, eta, k=k)
    x, _ = _golden(lambda s: obj(replace(spec, shift=s)), start, max(abs(start), eta ** 2) * 0.2, xtol)
    best = obj.log[replace(spec, shift=x)]
    return x, best, len(obj.log)


def amplitude_scan(n: int, eta: float, k: int = 1, family: str = "rectangular",
                   grid=None, workers: Optional[int] = None, refine: bool = True,
                   time_steps: Optional[int] = None) -> ScanResult:
    """Infidelity versus relative amplitude change, with the analytic optimum."""
    if family not in RECT_FAMILIES:
        raise ValueError(f"amplitude scans need a rectangular family, got {family!r}")
    grid = np.asarray(DEFAULT_AMPLITUDE_GRID if grid is None else grid, dtype=float)
    if grid.size == 0:
        raise ValueError("empty amplitude grid")
    spec = PulseSpec(family, eta, k=k)
    evals = evaluate_many([replace(spec, shift=float(x)) for x in grid], n, workers, time_steps)
    inf = np.array([e.infidelity for e in evals])
    ph = np.array([e.phonon_prob for e in evals])
    errors = [(float(x), e.error) for x, e in zip(grid, evals) if e.error]
    n_eval = len(evals)
    i_best = int(np.nanargmin(inf))
    optimum = {"delta_omega_rel": float(grid[i_best]), "infidelity": float(inf[i_best]),
               "phonon_prob": float(ph[i_best])}
    if refine:
        step = float(grid[1] - grid[0]) if grid.size > 1 else eta ** 2
        obj = _Objective(n, time_steps)
        x, val = _golden(lambda s: obj(replace(spec, shift=s)), float(grid[i_best]), step, 1e-5)
        n_eval += len(obj.log)
        if val <= optimum["infidelity"]:
            ev = obj.log[replace(spec, shift=x)]
            optimum = {"delta_omega_rel": x, "infidelity": ev.infidelity, "phonon_prob": ev.phonon_prob}
    return ScanResult(
        axes={"delta_omega_rel": grid}, infidelity=inf, phonon_prob=ph, optimum=optimum,
        errors=errors, analytic=_rect_prediction(n, eta, k, family), n_evaluations=n_eval,
    )


def optimize_lemniscate(n: int, eta: float, family: str = "echoed_lemniscate",
                        start: tuple[float, float] = (0.0, 0.0), da_step: Optional[float] = None,
                        time_steps: Optional[int] = None, xtol: float = 1e-3):
    """Nested search: the inner loop follows the valley in dA/A0, the outer one moves along it in da."""
    if family not in LEMNISCATE_FAMILIES:
        raise ValueError(f"not a lemniscate family: {family!r}")
    obj = _Objective(n, time_steps)
    spec = PulseSpec(family, eta)
    scale = (eta / 0.03) ** 2
    valley = {}

    def along_valley(da: float) -> float:
        guess = valley[min(valley, key=lambda d: abs(d - da))][0] if valley else start[1]
        x, val = _golden(lambda s: obj(replace(spec, da=da, shift=s)), guess, 0.003 * scale, xtol)
        valley[da] = (x, val)
        return val

    da_opt, _ = _golden(along_valley, start[0], da_step or 0.004 * scale, xtol)
    if da_opt not in valley:
        along_valley(da_opt)
    shift = valley[da_opt][0]
    best = obj.log[replace(spec, da=da_opt, shift=shift)]
    path = sorted((d, s, v) for d, (s, v) in valley.items())
    return (da_opt, shift), best, path, len(obj.log)


def lemniscate_scan_2d(n: int, eta: float, da_grid=None, dA_rel_grid=None,
                       family: str = "echoed_lemniscate", workers: Optional[int] = None,
                       refine: bool = True, time_steps: Optional[int] = None) -> ScanResult:
    """Infidelity surface over (da, dA/A0), its valley and the refined optimum."""
    da_grid = np.asarray(DEFAULT_DA_GRID if da_grid is None else da_grid, dtype=float)
    dA_grid = np.asarray(DEFAULT_DA_REL_GRID if dA_rel_grid is None else dA_rel_grid, dtype=float)
    if da_grid.size == 0 or dA_grid.size == 0:
        raise ValueError("empty scan grid")
    a0, _ = lemniscate_design_point()
    if np.any(a0 + da_grid <= 0.5):
        raise ValueError("scan leaves the figure-eight regime (a <= 1/2)")
    base = PulseSpec(family, eta)
    specs = [replace(base, da=float(d), shift=float(s)) for d in da_grid for s in dA_grid]
    evals = evaluate_many(specs, n, workers, time_steps)
    inf = np.array([e.infidelity for e in evals]).reshape(da_grid.size, dA_grid.size)
    ph = np.array([e.phonon_prob for e in evals]).reshape(da_grid.size, dA_grid.size)
    errors = [(e.spec.da, e.spec.shift, e.error) for e in evals if e.error]
    valley = [(float(d), float(dA_grid[int(np.nanargmin(row))]), float(np.nanmin(row)))
              for d, row in zip(da_grid, inf)]
    i, j = np.unravel_index(int(np.nanargmin(inf)), inf.shape)
    optimum = {"da": float(da_grid[i]), "dA_rel": float(dA_grid[j]),
               "infidelity": float(inf[i, j]), "phonon_prob": float(ph[i, j])}
    n_eval = len(evals)
    if refine:
        step = float(da_grid[1] - da_grid[0]) if da_grid.size > 1 else None
        (da, s), best, path, count = optimize_lemniscate(
            n, eta, family, start=(optimum["da"], optimum["dA_rel"]), da_step=step,
            time_steps=time_steps)
        n_eval += count
        if best.infidelity <= optimum["infidelity"]:
            optimum = {"da": da, "dA_rel": s, "infidelity": best.infidelity,
                       "phonon_prob": best.phonon_prob}
        valley = valley + [(d, sh, v) for d, sh, v in path]
    return ScanResult(
        axes={"da": da_grid, "dA_rel": dA_grid}, infidelity=inf, phonon_prob=ph,
        optimum=optimum, errors=errors, valley=valley, n_evaluations=n_eval,
    )


def _family_specs(families) -> list[tuple[str, int]]:
    out = []
    for fam in families:
        if isinstance(fam, str):
            out.append((fam, 1))
        else:
            out.append((fam[0], int(fam[1])))
    return out


def optimized_point(n: int, eta: float, family: str, k: int = 1,
                    time_steps: Optional[int] = None) -> dict:
    """Re-optimise the free pulse parameters of one family at (n, eta)."""
    try:
        if family in RECT_FAMILIES:
            x, best, count = optimize_amplitude(n, eta, k, family, time_steps=time_steps)
            params = {"delta_omega_rel": x}
        else:
            (da, s), best, _, count = optimize_lemniscate(n, eta, family, time_steps=time_steps)
            params = {"da": da, "dA_rel": s}
        return {"infidelity": best.infidelity, "phonon_prob": best.phonon_prob,
                "params": params, "evaluations": count, "error": best.error}
    except (ArithmeticError, RuntimeError, ValueError) as exc:
        return {"infidelity": math.nan, "phonon_prob": math.nan, "params": {},
                "evaluations": 0, "error": f"{type(exc).__name__}: {exc}"}


def _optimized_star(args):
    return optimized_point(*args)


def _sweep(points, workers):
    workers = workers or default_workers()
    if workers <= 1:
        return [_optimized_star(p) for p in points]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_optimized_star, points))


def loglog_slope(x, y) -> float:
    x, y = np.asarray(x, float), np.asarray(y, float)
    ok = np.isfinite(y) & (y > 0)
    return float(np.polyfit(np.log(x[ok]), np.log(y[ok]), 1)[0])


def eta_sweep(n: int, etas, families, workers: Optional[int] = None,
              time_steps: Optional[int] = None) -> dict:
    """Optimised infidelity and phonon probability versus eta for each family."""
    fams = _family_specs(families)
    points = [(n, float(eta), fam, k, time_steps) for fam, k in fams for eta in etas]
    results = _sweep(points, workers)
    rows, slopes = [], {}
    for (n_, eta, fam, k, _), r in zip(points, results):
        label = PulseSpec(fam, eta, k=k).label
        rows.append({"family": label, "eta": eta, "infidelity": r["infidelity"],
                     "phonon_prob": r["phonon_prob"], "error": r["error"]})
    for fam, k in fams:
        label = PulseSpec(fam, 0.03, k=k).label
        sel = [row for row in rows if row["family"] == label]
        slopes[label] = loglog_slope([r["eta"] for r in sel], [r["infidelity"] for r in sel])
    return {"rows": rows, "slopes": slopes}


def n_sweep(eta: float, n_values, families, workers: Optional[int] = None,
            time_steps: Optional[int] = None) -> dict:
    """Optimised infidelity versus ion number for each family."""
    fams = _family_specs(families)
    points = [(int(n), eta, fam, k, time_steps) for fam, k in fams for n in n_values]
    results = _sweep(points, workers)
    rows = []
    for (n, _, fam, k, _), r in zip(points, results):
        rows.append({"family": PulseSpec(fam, eta, k=k).label, "n": n,
                     "infidelity": r["infidelity"], "error": r["error"]})
    return {"rows": rows}
