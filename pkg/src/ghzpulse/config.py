"""Experiment configuration documents (JSON) for the command-line runner."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from .pulses import Pulse, make_pulse
from .trajectory import lemniscate_design_point


class ConfigError(ValueError):
    pass


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


FamilyName = Literal["rectangular", "echoed_rectangular", "lemniscate", "echoed_lemniscate"]


class PulseSection(_Strict):
    family: FamilyName = "rectangular"
    k: int = Field(1, ge=1)
    t_gate: float = Field(1.0, gt=0)
    amplitude_shift: float = 0.0
    a: Optional[float] = None
    A: Optional[float] = Field(None, gt=0)
    da: float = 0.0
    dA_rel: float = 0.0

    def build(self, eta: float) -> Pulse:
        if self.family in ("rectangular", "echoed_rectangular"):
            return make_pulse(self.family, self.t_gate, eta, k=self.k).scaled(1.0 + self.amplitude_shift)
        a0, A0 = lemniscate_design_point()
        a = (self.a if self.a is not None else a0) + self.da
        A = (self.A if self.A is not None else A0) * (1.0 + self.dA_rel)
        return make_pulse(self.family, self.t_gate, eta, a=a, A=A)


class PhysicsSection(_Strict):
    n: int = Field(20, ge=2)
    eta: float = Field(0.03, gt=0, lt=1)


class SolverSection(_Strict):
    cutoff: Union[Literal["auto"], int] = "auto"
    time_steps: int = Field(1024, ge=256)
    rtol: float = Field(1e-3, gt=0)
    atol: float = Field(1e-10, gt=0)
    check_convergence: bool = True
    max_refinements: int = Field(3, ge=0)

    @field_validator("cutoff")
    @classmethod
    def _cutoff_min(cls, v):
        if isinstance(v, int) and v < 8:
            raise ValueError("cutoff must be at least 8")
        return v


class Grid(_Strict):
    start: float
    stop: float
    num: int = Field(ge=1)

    def values(self) -> np.ndarray:
        return np.linspace(self.start, self.stop, self.num)


class FamilyChoice(_Strict):
    family: FamilyName
    k: int = Field(1, ge=1)

    def as_tuple(self):
        return (self.family, self.k)


class Fig2Scan(_Strict):
    n_values: list[int] = [4, 8, 12, 16, 20]
    eta: float = Field(0.03, gt=0, lt=1)
    k: int = Field(1, ge=1)
    family: Literal["rectangular", "echoed_rectangular"] = "rectangular"
    grid: Grid = Grid(start=-0.01, stop=0.02, num=61)
    refine: bool = True


class Fig3Scan(_Strict):
    n: int = Field(20, ge=2)
    eta: float = Field(0.03, gt=0, lt=1)
    da: Grid = Grid(start=-0.01, stop=0.01, num=41)
    dA_rel: Grid = Grid(start=0.0, stop=0.02, num=41)
    family: Literal["lemniscate", "echoed_lemniscate"] = "echoed_lemniscate"
    refine: bool = True


_DEFAULT_FAMILIES = [
    FamilyChoice(family="rectangular", k=1),
    FamilyChoice(family="rectangular", k=8),
    FamilyChoice(family="echoed_rectangular", k=1),
    FamilyChoice(family="echoed_rectangular", k=8),
    FamilyChoice(family="echoed_lemniscate"),
]


class Fig4Scan(_Strict):
    n: int = Field(20, ge=2)
    etas: list[float] = [0.02, 0.025, 0.03, 0.04, 0.05]
    families: list[FamilyChoice] = _DEFAULT_FAMILIES


class Fig5Scan(_Strict):
    eta: float = Field(0.03, gt=0, lt=1)
    n_values: list[int] = [4, 8, 12, 16, 20]
    families: list[FamilyChoice] = _DEFAULT_FAMILIES + [FamilyChoice(family="lemniscate")]


class ScanSection(_Strict):
    fig2: Optional[Fig2Scan] = None
    fig3: Optional[Fig3Scan] = None
    fig4: Optional[Fig4Scan] = None
    fig5: Optional[Fig5Scan] = None


class OutputSection(_Strict):
    directory: str = "results"
    formats: list[Literal["csv", "json"]] = ["csv", "json"]


class ExperimentConfig(_Strict):
    pulse: PulseSection = PulseSection()
    physics: PhysicsSection = PhysicsSection()
    solver: SolverSection = SolverSection()
    scan: ScanSection = ScanSection()
    output: OutputSection = OutputSection()


def _describe(err: ValidationError) -> str:
    parts = []
    for e in err.errors():
        loc = ".".join(str(x) for x in e["loc"])
        parts.append(f"{loc}: {e['msg']}")
    return "; ".join(parts)


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(_describe(err)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as err:
        raise ConfigError(f"{path}: invalid JSON ({err})") from None
    if not isinstance(data, dict):
        raise ConfigError("config root must be an object")
    return parse_config(data)
