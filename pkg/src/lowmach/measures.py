"""Finite-ensemble Young measures over the phase space (rho, m) and their diagnostics.

An :class:`EmpiricalMeasure` is a weighted family of member states on a shared
grid; at each cell it is the atomic measure sum_k w_k delta_{(rho_k, m_k)}.
Concentration defects of such measures vanish identically and are recorded as
zeros.
"""
from __future__ import annotations

import csv
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, NamedTuple, Sequence

import numpy as np

from . import comp_euler
from .eos import CutoffChi, DomainError, EosModel, rel_potential
from .fields import ConservedState, SubBox, TorusGrid, lp_norm


class MeasureError(ValueError):
    pass


@dataclass
class EmpiricalMeasure:
    members: list[ConservedState]
    weights: np.ndarray | None = None

    def __post_init__(self):
        if not self.members:
            raise MeasureError("an empirical measure needs at least one member")
        k = len(self.members)
        w = np.full(k, 1.0 / k) if self.weights is None else np.asarray(self.weights, float)
        if w.shape != (k,) or np.any(w < 0):
            raise MeasureError("weights must be K non-negative numbers")
        if abs(w.sum() - 1.0) > 1e-14:
            raise MeasureError(f"weights must sum to 1, got {w.sum()!r}")
        self.weights = w
        first = self.members[0]
        for m in self.members[1:]:
            if m.grid != first.grid or m.time != first.time or m.eps != first.eps:
                raise MeasureError("members must share grid, time and eps")

    @classmethod
    def dirac(cls, state: ConservedState) -> "EmpiricalMeasure":
        return cls([state])

    @property
    def grid(self) -> TorusGrid:
        return self.members[0].grid

    @property
    def eps(self) -> float:
        return self.members[0].eps

    @property
    def time(self) -> float:
        return self.members[0].time

    def __len__(self):
        return len(self.members)


def expect(measure: EmpiricalMeasure, g: Callable) -> np.ndarray:
    """Cellwise <Y; g> = sum_k w_k g(rho_k, m_k)."""
    acc = None
    for idx, (w, m) in enumerate(zip(measure.weights, measure.members)):
        val = np.asarray(g(m.rho, m.mom), dtype=float)
        if not np.all(np.isfinite(val)):
            bad = np.argwhere(~np.isfinite(val))[0]
            raise MeasureError(f"g is not finite on member {idx} at index {tuple(int(i) for i in bad)}")
        acc = w * val if acc is None else acc + w * val
    return acc


def variance(measure: EmpiricalMeasure, g: Callable) -> np.ndarray:
    mean = expect(measure, g)
    return expect(measure, lambda r, m: (np.asarray(g(r, m)) - mean) ** 2)


class RelEnergyParts(NamedTuple):
    kinetic: float
    potential: float
    ess: float
    res: float

    @property
    def total(self) -> float:
        return self.kinetic + self.potential


def relative_energy_parts(measure: EmpiricalMeasure, r, U, eos: EosModel,
                          subset: SubBox | None = None, chi: CutoffChi | None = None) -> RelEnergyParts:
    """Split of int <Y; rho |m/rho - U|^2 / 2 + H(rho|r)/eps^2> into kinetic and potential
    parts, and of the potential part into essential/residual parts by chi(rho)."""
    grid = measure.grid
    r = np.broadcast_to(np.asarray(r, dtype=float), grid.shape)
    U = np.broadcast_to(np.asarray(U, dtype=float), (grid.dim,) + grid.shape)
    if np.any(r <= 0):
        raise DomainError("reference density r must be > 0 everywhere")
    chi = chi or CutoffChi(eos.rho_bar)
    eps2 = measure.eps ** 2
    mask = subset.mask(grid) if subset is not None else np.ones(grid.shape, bool)
    vol = grid.cell_volume
    kin = pot = ess = 0.0
    for w, m in zip(measure.weights, measure.members):
        du = m.mom / m.rho - U
        k = 0.5 * m.rho * np.sum(du ** 2, axis=0)
        h = rel_potential(eos, m.rho, r) / eps2
        e = chi(m.rho) * h
        kin += w * float(np.sum(k[mask]))
        pot += w * float(np.sum(h[mask]))
        ess += w * float(np.sum(e[mask]))
    kin, pot, ess = vol * kin, vol * pot, vol * ess
    return RelEnergyParts(kin, pot, ess, pot - ess)


def relative_energy(measure: EmpiricalMeasure, r, U, eos: EosModel,
                    subset: SubBox | None = None) -> float:
    return relative_energy_parts(measure, r, U, eos, subset).total


def ensemble_energy(measure: EmpiricalMeasure, eos: EosModel) -> float:
    """Weighted member energies relative to (rho_bar, 0)."""
    return float(sum(w * comp_euler.total_energy(m, eos)
                     for w, m in zip(measure.weights, measure.members)))


def dissipation_defect(energy_0: float, energy_tau: float) -> float:
    return max(energy_0 - energy_tau, 0.0)


class JensenResult(NamedTuple):
    lhs: np.ndarray
    rhs: np.ndarray
    max_violation: float
    holds: bool


def jensen_check(measure: EmpiricalMeasure, F: Callable, q: float, tol: float = 1e-12) -> JensenResult:
    """Cellwise <Y;|F|>^q <= <Y;|F|^q>; violation measured relative to the right side."""
    if q < 1:
        raise DomainError("Jensen exponent q must be >= 1")

    def absF(r, m):
        v = np.asarray(F(r, m), dtype=float)
        return np.abs(v) if v.shape == r.shape else np.sqrt(np.sum(v ** 2, axis=0))

    lhs = expect(measure, absF) ** q
    rhs = expect(measure, lambda r, m: absF(r, m) ** q)
    viol = np.max((lhs - rhs) / np.maximum(np.abs(rhs), np.finfo(float).tiny))
    viol = max(float(viol), 0.0)
    return JensenResult(lhs, rhs, viol, viol <= tol)


@dataclass
class MomentReport:
    """Norms controlled by the uniform energy bounds."""

    fluct_ess_l2: float          # || <Y; [(rho - rho_bar)/eps]_ess> ||_2
    density_res_lgamma: float    # || eps^(-2/gamma) <Y; [rho]_res> ||_gamma
    mom_ess_l2: float            # || <Y; [m]_ess> ||_2
    mom_res_lq: float            # || <Y; [m]_res> ||_{2 gamma/(gamma+1)}
    fluct_l1: float              # int <Y; |(rho - rho_bar)/eps|>

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def moment_bounds(measure: EmpiricalMeasure, chi: CutoffChi, eos: EosModel,
                  subset: SubBox | None = None) -> MomentReport:
    g, eps, rb = eos.gamma, measure.eps, eos.rho_bar
    grid = measure.grid
    fl_ess = expect(measure, lambda r, m: chi(r) * (r - rb) / eps)
    rho_res = expect(measure, lambda r, m: (1.0 - chi(r)) * r)
    m_ess = expect(measure, lambda r, m: chi(r) * m)
    m_res = expect(measure, lambda r, m: (1.0 - chi(r)) * m)
    fl_abs = expect(measure, lambda r, m: np.abs(r - rb) / eps)
    return MomentReport(
        fluct_ess_l2=lp_norm(grid, fl_ess, 2, subset),
        density_res_lgamma=lp_norm(grid, eps ** (-2.0 / g) * rho_res, g, subset),
        mom_ess_l2=lp_norm(grid, m_ess, 2, subset),
        mom_res_lq=lp_norm(grid, m_res, 2 * g / (g + 1), subset),
        fluct_l1=lp_norm(grid, fl_abs, 1, subset),
    )


@dataclass
class DefectLedger:
    """Dissipation defects per output time; concentration defects are structurally zero."""

    times: list[float]
    deltas: list[float]
    member_defects: np.ndarray      # (K, n_times)
    ensemble_defect: np.ndarray     # (n_times,)
    mu_c: np.ndarray = None
    mu_m: np.ndarray = None

    def __post_init__(self):
        n = len(self.times)
        if self.mu_c is None:
            self.mu_c = np.zeros(n)
        if self.mu_m is None:
            self.mu_m = np.zeros(n)

    def to_dict(self) -> dict:
        return {
            "time": [float(t) for t in self.times],
            "deltas": [float(d) for d in self.deltas],
            "dissipation_defect": [float(x) for x in self.ensemble_defect],
            "member_dissipation_defect": {repr(float(d)): [float(x) for x in row]
                                          for d, row in zip(self.deltas, self.member_defects)},
            "concentration_defect_continuity": [float(x) for x in self.mu_c],
            "concentration_defect_momentum": [float(x) for x in self.mu_m],
            "concentration_defects_note": "zero by construction for finite ensembles",
        }

    def write_json(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))
        return path

    def write_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "dissipation_defect"]
                       + [f"D_delta_{d!r}" for d in self.deltas] + ["mu_C", "mu_M"])
            for i, t in enumerate(self.times):
                w.writerow([repr(float(t)), repr(float(self.ensemble_defect[i]))]
                           + [repr(float(x)) for x in self.member_defects[:, i]]
                           + [repr(float(self.mu_c[i])), repr(float(self.mu_m[i]))])
        return path


@dataclass
class EnsembleResult:
    times: list[float]
    measures: list[EmpiricalMeasure]
    ledger: DefectLedger
    trajectories: list = field(default_factory=list)


def _run_member(args):
    init, T, config, output_times = args
    return comp_euler.run(init, T, config, output_times)


def vanishing_viscosity_ensemble(init: ConservedState, deltas: Sequence[float], T: float,
                                 config: comp_euler.CompSolverConfig, output_times=None,
                                 weights=None, workers: int = 1) -> EnsembleResult:
    """One viscous run per delta; equal-weight ensembles at the shared output times."""
    deltas = [float(d) for d in deltas]
    if not deltas or any(d <= 0 for d in deltas):
        raise DomainError("deltas must be positive")
    if any(b >= a for a, b in zip(deltas, deltas[1:])):
        raise DomainError("deltas must be strictly decreasing")
    if output_times is None:
        output_times = [T]
    jobs = [(init, T, replace(config, viscosity=d), output_times) for d in deltas]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            trajs = list(ex.map(_run_member, jobs))
    else:
        trajs = [_run_member(j) for j in jobs]
    times = trajs[0].times
    measures = [EmpiricalMeasure([tr.states[i] for tr in trajs], weights) for i in range(len(times))]
    eos = config.eos
    member_E = np.array([[comp_euler.total_energy(s, eos) for s in tr.states] for tr in trajs])
    member_D = np.maximum(member_E[:, :1] - member_E, 0.0)
    ens_E = np.array([ensemble_energy(m, eos) for m in measures])
    ens_D = np.maximum(ens_E[0] - ens_E, 0.0)
    ledger = DefectLedger(list(times), deltas, member_D, ens_D)
    return EnsembleResult(list(times), measures, ledger, trajs)
