"""Mach-number sweeps comparing compressible runs against the incompressible limit."""
from __future__ import annotations

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .. import comp_euler, incomp_euler
from ..acoustics import WindowError, step_exact, wrap_free_time
from ..fields import helmholtz_project
from ..measures import EmpiricalMeasure, dissipation_defect, relative_energy_parts
from .config import ExperimentConfig
from .initdata import illprepared_init, velocity_field, wellprepared_init

log = logging.getLogger(__name__)


@dataclass
class SweepRow:
    eps: float
    sup_rel_energy: float = float("nan")
    kinetic_part: float = float("nan")
    potential_part: float = float("nan")
    ess_part: float = float("nan")
    res_part: float = float("nan")
    defect_D: float = float("nan")
    wall_time_s: float = float("nan")
    steps: int = 0
    sup_time: float = float("nan")
    initial_energy: float = float("nan")
    # ill-prepared only: relative energy against the acoustically corrected fields
    corrected_sup_rel_energy: Optional[float] = None
    corrected_kinetic_part: Optional[float] = None
    corrected_potential_part: Optional[float] = None
    error: Optional[str] = None


@dataclass
class SweepReport:
    kind: str
    rows: list[SweepRow] = field(default_factory=list)
    slope: float = float("nan")
    corrected_slope: Optional[float] = None
    config: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) if getattr(r, name) is not None else np.nan
                         for r in self.rows], dtype=float)


def fit_slope(eps, values) -> float:
    eps, values = np.asarray(eps, float), np.asarray(values, float)
    ok = np.isfinite(values) & (values > 0)
    if ok.sum() < 2:
        return float("nan")
    return float(np.polyfit(np.log(eps[ok]), np.log(values[ok]), 1)[0])


def _incompressible_reference(cfg: ExperimentConfig, v0: np.ndarray, times: list[float]):
    grid = cfg.grid.build()
    omega = incomp_euler.vorticity(grid, v0)
    omega = omega - omega.mean()
    states = incomp_euler.run(incomp_euler.IncompressibleState(grid, omega), cfg.T, times)
    return [s.velocity for s in states]


def _wp_member(args) -> SweepRow:
    cfg, eps, v_ref = args
    eos = cfg.eos.build()
    grid = cfg.grid.build()
    row = SweepRow(eps=eps)
    t0 = time.perf_counter()
    try:
        init = wellprepared_init(grid, eos, cfg.v0, eps)
        traj = comp_euler.run(init, cfg.T, cfg.solver.build(eos, eps), cfg.output_times())
    except Exception as err:  # recorded per eps; the sweep goes on
        row.error = f"{type(err).__name__}: {err}"
        row.wall_time_s = time.perf_counter() - t0
        log.warning("eps=%g failed: %s", eps, row.error)
        return row
    parts = [relative_energy_parts(EmpiricalMeasure.dirac(s), eos.rho_bar, v, eos)
             for s, v in zip(traj.states, v_ref)]
    i = int(np.argmax([p.total for p in parts]))
    E = [comp_euler.total_energy(s, eos) for s in traj.states]
    row.sup_rel_energy = parts[i].total
    row.kinetic_part, row.potential_part = parts[i].kinetic, parts[i].potential
    row.ess_part, row.res_part = parts[i].ess, parts[i].res
    row.sup_time = traj.times[i]
    row.defect_D = max(dissipation_defect(E[0], e) for e in E)
    row.initial_energy = E[0]
    row.steps = traj.steps
    row.wall_time_s = time.perf_counter() - t0
    return row


def _map(fn, jobs, workers: int):
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(fn, jobs))
    return [fn(j) for j in jobs]


def mach_sweep_wellprepared(cfg: ExperimentConfig, workers: int = 1) -> SweepReport:
    """Relative energy of each compressible run against (rho_bar, v(t)), sup over output times."""
    grid = cfg.grid.build()
    if grid.dim != 2:
        raise ValueError("the well-prepared sweep needs a 2D grid")
    times = cfg.output_times()
    v_ref = _incompressible_reference(cfg, velocity_field(grid, cfg.v0), times)
    rows = _map(_wp_member, [(cfg, e, v_ref) for e in cfg.eps], workers)
    rows.sort(key=lambda r: -r.eps)
    rep = SweepReport("well-prepared", rows, config=cfg.echo())
    rep.slope = fit_slope(rep.column("eps"), rep.column("sup_rel_energy"))
    return rep


def _ill_member(args) -> SweepRow:
    cfg, eps, v_ref, enforce_window = args
    eos = cfg.eos.build()
    grid = cfg.grid.build()
    B = cfg.subset_box()
    row = SweepRow(eps=eps)
    t0 = time.perf_counter()
    times = cfg.output_times()
    t_lo = cfg.delta_time_fraction * cfg.T
    try:
        if enforce_window:
            t_max = wrap_free_time(grid, B, eps, eos.c2_bar)
            if cfg.T >= t_max:
                raise WindowError(t_max)
        init, ac0 = illprepared_init(grid, eos, cfg.v0, cfg.s0, cfg.phi0, eps)
        traj = comp_euler.run(init, cfg.T, cfg.solver.build(eos, eps), times)
    except Exception as err:
        row.error = f"{type(err).__name__}: {err}"
        row.wall_time_s = time.perf_counter() - t0
        log.warning("eps=%g failed: %s", eps, row.error)
        return row
    plain, corrected = [], []
    for s, v, t in zip(traj.states, v_ref, traj.times):
        if not t > t_lo:
            continue
        ac = step_exact(ac0, t)
        Y = EmpiricalMeasure.dirac(s)
        plain.append((t, relative_energy_parts(Y, eos.rho_bar, v, eos, B)))
        corrected.append(relative_energy_parts(Y, eos.rho_bar + eps * ac.s, v + ac.grad_phi, eos, B))
    i = int(np.argmax([p.total for _, p in plain]))
    t_sup, p = plain[i]
    row.sup_rel_energy, row.kinetic_part, row.potential_part = p.total, p.kinetic, p.potential
    row.ess_part, row.res_part, row.sup_time = p.ess, p.res, t_sup
    j = int(np.argmax([c.total for c in corrected]))
    c = corrected[j]
    row.corrected_sup_rel_energy = c.total
    row.corrected_kinetic_part, row.corrected_potential_part = c.kinetic, c.potential
    E = [comp_euler.total_energy(s, eos) for s in traj.states]
    row.defect_D = max(dissipation_defect(E[0], e) for e in E)
    row.initial_energy = E[0]
    row.steps = traj.steps
    row.wall_time_s = time.perf_counter() - t0
    return row


def mach_sweep_illprepared(cfg: ExperimentConfig, workers: int = 1,
                           enforce_window: bool = True) -> SweepReport:
    """Plain and acoustically corrected relative energies on the subset B over (delta_time, T].

    The incompressible reference starts from the Helmholtz projection of
    v0 + grad Phi0. ``enforce_window=False`` is for the small-torus contrast run,
    where acoustic waves wrap around by design.
    """
    grid = cfg.grid.build()
    if grid.dim != 2:
        raise ValueError("the ill-prepared sweep needs a 2D grid")
    if cfg.subset is None:
        raise ValueError("the ill-prepared sweep needs a compact subset B")
    from .initdata import acoustic_potential_gradient

    u0 = velocity_field(grid, cfg.v0) + acoustic_potential_gradient(grid, cfg.phi0)
    v0 = helmholtz_project(grid, u0)
    v_ref = _incompressible_reference(cfg, v0, cfg.output_times())
    rows = _map(_ill_member, [(cfg, e, v_ref, enforce_window) for e in cfg.eps], workers)
    rows.sort(key=lambda r: -r.eps)
    rep = SweepReport("ill-prepared", rows, config=cfg.echo())
    rep.slope = fit_slope(rep.column("eps"), rep.column("sup_rel_energy"))
    rep.corrected_slope = fit_slope(rep.column("eps"), rep.column("corrected_sup_rel_energy"))
    return rep


def contrast_config(cfg: ExperimentConfig) -> ExperimentConfig:
    """Same data and subset on the small periodic torus given by ``contrast_grid``."""
    if cfg.contrast_grid is None:
        raise ValueError("no contrast_grid configured")
    return cfg.model_copy(update={"grid": cfg.contrast_grid})


def row_dict(row: SweepRow, wall_time: bool) -> dict:
    d = asdict(row)
    if not wall_time:
        d.pop("wall_time_s")
    return d
