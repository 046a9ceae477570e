"""Experiment drivers behind the CLI subcommands.

Each driver returns ``(result, checks)`` where ``checks`` maps a threshold name
to a boolean; the CLI exits with 1 when any check is False.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import comp_euler
from ..acoustics import AcousticState, decay_experiment, wrap_free_time
from ..eos import CutoffChi
from ..fields import SubBox, TorusGrid, spectral_grad
from ..measures import EnsembleResult, moment_bounds, vanishing_viscosity_ensemble, variance
from .config import ExperimentConfig
from .initdata import gaussian_field, smooth_profile_init
from .report import emit_report
from .sweeps import SweepReport, contrast_config, mach_sweep_illprepared, mach_sweep_wellprepared


def strictly_decreasing(values) -> bool:
    v = np.asarray(values, float)
    return bool(np.all(np.isfinite(v)) and np.all(np.diff(v) < 0))


# well-prepared sweep

def check_wellprepared(rep: SweepReport, cfg: ExperimentConfig) -> dict[str, bool]:
    pot = rep.column("potential_part")
    e0 = rep.column("initial_energy")
    bound = cfg.threshold("potential_bound", float(np.nanmax(e0)) if e0.size else np.inf)
    return {
        "no_solver_failures": all(r.error is None for r in rep.rows),
        "sup_rel_energy_strictly_decreasing": strictly_decreasing(rep.column("sup_rel_energy")),
        "potential_part_bounded": bool(np.all(np.isfinite(pot)) and np.all(pot <= bound)),
    }


def sweep_wp(cfg: ExperimentConfig, out: Path | None, workers: int = 1):
    rep = mach_sweep_wellprepared(cfg, workers)
    if out is not None:
        emit_report(rep, out, stem="sweep_wp", wall_time=cfg.report_wall_time)
    return rep, check_wellprepared(rep, cfg)


# ill-prepared sweep

def check_illprepared(large: SweepReport, torus: SweepReport | None, cfg: ExperimentConfig) -> dict[str, bool]:
    checks = {
        "no_solver_failures": all(r.error is None for r in large.rows),
        "plain_on_B_decreasing_large_box": strictly_decreasing(large.column("sup_rel_energy")),
        "corrected_decreasing_large_box": strictly_decreasing(large.column("corrected_sup_rel_energy")),
    }
    if torus is not None:
        plain = torus.column("sup_rel_energy")
        floor = cfg.threshold("torus_floor_fraction", 0.5) * plain[0]
        checks["plain_on_B_above_floor_small_torus"] = bool(np.all(np.isfinite(plain))
                                                            and np.all(plain >= floor))
    return checks


def sweep_ill(cfg: ExperimentConfig, out: Path | None, workers: int = 1):
    large = mach_sweep_illprepared(cfg, workers, enforce_window=True)
    torus = None
    if cfg.contrast_grid is not None:
        torus = mach_sweep_illprepared(contrast_config(cfg), workers, enforce_window=False)
    if out is not None:
        emit_report(large, out, stem="sweep_ill_large_box", wall_time=cfg.report_wall_time)
        if torus is not None:
            emit_report(torus, out, stem="sweep_ill_small_torus", wall_time=cfg.report_wall_time)
    return (large, torus), check_illprepared(large, torus, cfg)


# acoustic decay

def decay_inputs(cfg: ExperimentConfig) -> tuple[AcousticState, SubBox, np.ndarray]:
    eos = cfg.eos.build()
    grid = cfg.grid.build()
    eps = cfg.eps[0]
    s0 = gaussian_field(grid, cfg.s0)
    gphi = spectral_grad(grid, gaussian_field(grid, cfg.phi0))
    init = AcousticState.from_eos(grid, s0, gphi, eps, eos)
    B = cfg.subset_box()
    if B is None:
        h = min(grid.lengths) / (2 * (1 + np.sqrt(grid.dim)))
        B = SubBox.centered(grid.dim, h)
    if cfg.sample_times is not None:
        times = np.asarray(cfg.sample_times, float)
    else:
        t_max = wrap_free_time(grid, B, eps, eos.c2_bar)
        lo, hi = cfg.sample_window
        times = np.geomspace(lo * t_max, hi * t_max, cfg.n_samples)
    return init, B, times


def acoustic_decay(cfg: ExperimentConfig, out: Path | None):
    init, B, times = decay_inputs(cfg)
    res = decay_experiment(init, B, times)
    predicted = -(init.grid.dim - 1)
    tol = cfg.threshold("slope_tolerance", 0.25 if init.grid.dim == 2 else 0.1)
    if out is not None:
        res.write_csv(Path(out) / "acoustic_decay.csv")
        res.write_svg(Path(out) / "acoustic_decay.svg")
    return res, {"slope_within_tolerance": abs(res.slope - predicted) <= tol}


# energy audit

@dataclass
class EnergyAudit:
    trajectory: comp_euler.Trajectory
    max_rel_increase: float
    mass_drift: float


def energy_audit(cfg: ExperimentConfig) -> EnergyAudit:
    eos = cfg.eos.build()
    grid = cfg.grid.build()
    eps = cfg.eps[0]
    init = smooth_profile_init(grid, eos, cfg.profile, eps)
    traj = comp_euler.run(init, cfg.T, cfg.solver.build(eos, eps), cfg.output_times(), keep_steps=True)
    E = traj.energies()
    rel_inc = float(np.max((E[1:] - E[:-1]) / E[:-1])) if E.size > 1 else 0.0
    m0 = np.sum(init.rho) * grid.cell_volume
    drift = max(abs(np.sum(s.rho) * grid.cell_volume - m0) for s in traj.states) / m0
    return EnergyAudit(traj, rel_inc, float(drift))


def energy_check(cfg: ExperimentConfig, out: Path | None):
    audit = energy_audit(cfg)
    if out is not None:
        audit.trajectory.write_energy_csv(Path(out) / "energy_log.csv")
    return audit, {
        "energy_nonincreasing": audit.max_rel_increase <= cfg.threshold("energy_slack", 1e-6),
        "mass_conserved": audit.mass_drift <= cfg.threshold("mass_tolerance", 1e-12),
    }


# weak-form residual refinement

@dataclass
class ResidualStudy:
    cells: list[int]
    continuity: list[float]
    momentum: list[float]

    def orders(self, which: str) -> list[float]:
        r = np.asarray(getattr(self, which))
        return [float(np.log2(a / b)) for a, b in zip(r[:-1], r[1:])]


def residual_study(cfg: ExperimentConfig) -> ResidualStudy:
    eos = cfg.eos.build()
    eps = cfg.eps[0]
    base = cfg.grid.build()
    cells, cont, mom = [], [], []
    for level in range(cfg.refinements):
        grid = TorusGrid(tuple(n * 2 ** level for n in base.cells), base.lengths)
        init = smooth_profile_init(grid, eos, cfg.profile, eps)
        traj = comp_euler.run(init, cfg.T, cfg.solver.build(eos, eps), [cfg.T], keep_steps=True)
        t_cut = cfg.t_cut_fraction * cfg.T
        tf_s = comp_euler.cosine_test_function(grid, t_cut)
        tf_v = comp_euler.cosine_test_function(grid, t_cut, vector=True)
        cells.append(grid.cells[0])
        cont.append(comp_euler.weak_residual(traj, tf_s, "continuity", eos))
        mom.append(comp_euler.weak_residual(traj, tf_v, "momentum", eos))
    return ResidualStudy(cells, cont, mom)


def residual(cfg: ExperimentConfig, out: Path | None):
    study = residual_study(cfg)
    min_order = cfg.threshold("min_order", 0.8)
    if out is not None:
        path = Path(out) / "residual.csv"
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["cells", "continuity_residual", "momentum_residual"])
            for row in zip(study.cells, study.continuity, study.momentum):
                w.writerow([row[0], repr(row[1]), repr(row[2])])
    return study, {
        "continuity_order": min(study.orders("continuity")) >= min_order,
        "momentum_order": min(study.orders("momentum")) >= min_order,
    }


# vanishing-viscosity ensembles

def pairwise_variances(result: EnsembleResult, index: int = -1) -> list[float]:
    """Integrated rho-variance of each consecutive-delta pair ensemble at one output time."""
    from ..measures import EmpiricalMeasure

    members = result.measures[index].members
    vol = members[0].grid.cell_volume
    out = []
    for a, b in zip(members[:-1], members[1:]):
        Y = EmpiricalMeasure([a, b])
        out.append(float(vol * np.sum(variance(Y, lambda r, m: r))))
    return out


def ensemble(cfg: ExperimentConfig, out: Path | None, workers: int = 1):
    eos = cfg.eos.build()
    grid = cfg.grid.build()
    eps = cfg.eps[0]
    init = smooth_profile_init(grid, eos, cfg.profile, eps)
    res = vanishing_viscosity_ensemble(init, cfg.deltas, cfg.T, cfg.solver.build(eos, eps),
                                       cfg.output_times(), workers=workers)
    D = res.ledger.member_defects
    pv = pairwise_variances(res)
    checks = {
        "defects_nonnegative": bool(np.all(D >= 0) and np.all(res.ledger.ensemble_defect >= 0)),
        "defects_nondecreasing": bool(np.all(np.diff(D, axis=1) >= 0)),
        "variance_decreasing_with_delta": strictly_decreasing(pv),
    }
    if out is not None:
        out = Path(out)
        res.ledger.write_json(out / "defect_ledger.json")
        res.ledger.write_csv(out / "defect_ledger.csv")
        chi = CutoffChi(eos.rho_bar)
        moments = {"time": res.times,
                   "moments": [moment_bounds(m, chi, eos).to_dict() for m in res.measures],
                   "pairwise_rho_variance": pv}
        (out / "moments.json").write_text(json.dumps(moments, indent=2, sort_keys=True))
    return res, checks
