"""Experiment configuration (JSON) with validation.

``ExperimentConfig.model_json_schema()`` is the documented schema; ``lowmach
schema`` prints it.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..comp_euler import CompSolverConfig
from ..eos import EosModel
from ..fields import SubBox, TorusGrid


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class EosSpec(_Model):
    a: float = Field(1.0, gt=0)
    gamma: float = Field(2.0, gt=1)
    rho_bar: float = Field(1.0, gt=0)

    def build(self) -> EosModel:
        return EosModel(self.a, self.gamma, self.rho_bar)


class GridSpec(_Model):
    cells: list[int]
    lengths: Optional[list[float]] = None

    def build(self) -> TorusGrid:
        return TorusGrid(tuple(self.cells), tuple(self.lengths) if self.lengths else None)


class VelocitySpec(_Model):
    """Named solenoidal velocity field (defined through a streamfunction in 2D)."""

    kind: Literal["zero", "taylor-green", "vortex-pair", "gaussian-vortex",
                  "band-limited-random"] = "taylor-green"
    amplitude: float = 1.0
    mode: int = Field(1, ge=1, description="taylor-green wavenumber in box units")
    width: float = Field(0.25, gt=0, description="vortex core width")
    separation: float = Field(0.5, gt=0, description="vortex-pair centre distance")
    kmax: int = Field(4, ge=1, description="band limit (integer wavenumber) for random fields")
    seed: int = 0


class GaussianSpec(_Model):
    amplitude: float = 0.0
    width: float = Field(0.25, gt=0)
    center: Optional[list[float]] = None


class BoxSpec(_Model):
    lower: list[float]
    upper: list[float]

    def build(self) -> SubBox:
        return SubBox(tuple(self.lower), tuple(self.upper))


class SolverSpec(_Model):
    cfl: float = Field(0.45, gt=0, lt=1)
    integrator: Literal["forward-euler", "ssp-rk2"] = "ssp-rk2"
    reconstruction: Literal["none", "minmod", "vanleer", "linear"] = "vanleer"
    rho_floor: float = Field(1e-8, gt=0)

    def build(self, eos: EosModel, eps: float, viscosity: float = 0.0) -> CompSolverConfig:
        return CompSolverConfig(eos=eos, eps=eps, cfl=self.cfl, integrator=self.integrator,
                                viscosity=viscosity, rho_floor=self.rho_floor,
                                reconstruction=self.reconstruction)


class ProfileSpec(_Model):
    """Smooth periodic 1D/2D state: rho = rho_bar (1 + A prod cos), u_1 = B prod sin."""

    rho_amplitude: float = 0.2
    u_amplitude: float = 0.2


class ExperimentConfig(_Model):
    eos: EosSpec = EosSpec()
    grid: GridSpec
    eps: list[float] = Field(default_factory=lambda: [0.2, 0.1, 0.05])
    T: float = Field(0.5, gt=0)
    n_outputs: int = Field(10, ge=1)
    data: Literal["well-prepared", "ill-prepared"] = "well-prepared"
    v0: VelocitySpec = VelocitySpec()
    s0: GaussianSpec = GaussianSpec()
    phi0: GaussianSpec = GaussianSpec()
    subset: Optional[BoxSpec] = None
    deltas: list[float] = Field(default_factory=lambda: [1e-2, 5e-3, 2.5e-3, 1.25e-3])
    solver: SolverSpec = SolverSpec()
    profile: ProfileSpec = ProfileSpec()
    # ill-prepared sweeps
    delta_time_fraction: float = Field(0.2, gt=0, lt=1)
    contrast_grid: Optional[GridSpec] = None
    # acoustic-decay
    sample_times: Optional[list[float]] = None
    n_samples: int = Field(16, ge=2)
    sample_window: list[float] = Field(default_factory=lambda: [0.15, 0.95],
                                       description="sample range as fractions of the wrap-free time")
    # residual refinement study
    refinements: int = Field(2, ge=2)
    t_cut_fraction: float = Field(0.8, gt=0, le=1)
    report_wall_time: bool = Field(False, description="wall time breaks byte-identical reports")
    thresholds: dict[str, float] = Field(default_factory=dict)
    out: Optional[str] = None

    @field_validator("eps")
    @classmethod
    def _eps_decreasing(cls, v):
        if not v or any(not (0 < e <= 1) for e in v):
            raise ValueError("eps values must lie in (0, 1]")
        if any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("eps values must be strictly decreasing")
        return v

    @field_validator("deltas")
    @classmethod
    def _deltas_decreasing(cls, v):
        if any(d <= 0 for d in v) or any(b >= a for a, b in zip(v, v[1:])):
            raise ValueError("deltas must be positive and strictly decreasing")
        return v

    @model_validator(mode="after")
    def _subset_dim(self):
        if self.subset is not None and len(self.subset.lower) != len(self.grid.cells):
            raise ValueError("subset dimension does not match the grid")
        return self

    def threshold(self, name: str, default: float) -> float:
        return float(self.thresholds.get(name, default))

    def output_times(self) -> list[float]:
        return [self.T * (i + 1) / self.n_outputs for i in range(self.n_outputs)]

    def subset_box(self) -> SubBox | None:
        return self.subset.build() if self.subset is not None else None

    def echo(self) -> dict:
        return self.model_dump(mode="json")


def load_config(path) -> ExperimentConfig:
    text = Path(path).read_text()
    return ExperimentConfig.model_validate(json.loads(text))


def config_schema() -> dict:
    return ExperimentConfig.model_json_schema()
