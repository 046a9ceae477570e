"""Explicit finite-volume solver for the Mach-rescaled barotropic Euler system

    d_t rho + div m = 0,
    d_t m + div(m (x) m / rho) + grad p(rho) / eps^2 = delta (Lap u + grad div u),

on a periodic grid, with Rusanov (local Lax-Friedrichs) interface fluxes.
The viscous right-hand side is off unless ``CompSolverConfig.viscosity > 0``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .eos import DomainError, EosModel, pressure, rel_potential, sound_speed
from .fields import ConservedState, TorusGrid, fd_grad_div, fd_laplacian

INTEGRATORS = ("forward-euler", "ssp-rk2")
RECONSTRUCTIONS = ("none", "minmod", "vanleer", "linear")


class PositivityError(RuntimeError):
    """Density fell below the configured floor; carries where and when."""

    def __init__(self, time: float, cell: tuple[int, ...], value: float):
        self.time = time
        self.cell = cell
        self.value = value
        super().__init__(f"density {value:.3e} below floor at t={time:.6g}, cell {cell}")


@dataclass
class CompSolverConfig:
    eos: EosModel
    eps: float
    cfl: float = 0.45
    integrator: str = "ssp-rk2"
    viscosity: float = 0.0
    rho_floor: float = 1e-8
    # piecewise-linear interface states; "none" is the first-order scheme
    reconstruction: str = "none"

    def __post_init__(self):
        if not 0 < self.cfl < 1:
            raise DomainError(f"cfl must lie in (0, 1), got {self.cfl}")
        if self.integrator not in INTEGRATORS:
            raise DomainError(f"integrator must be one of {INTEGRATORS}")
        if self.reconstruction not in RECONSTRUCTIONS:
            raise DomainError(f"reconstruction must be one of {RECONSTRUCTIONS}")
        if self.viscosity < 0:
            raise DomainError("viscosity must be >= 0")
        if not self.rho_floor > 0:
            raise DomainError("rho_floor must be > 0")
        if not self.eps > 0:
            raise DomainError("eps must be > 0")


def physical_flux(U: np.ndarray, eos: EosModel, eps: float | None, axis: int) -> np.ndarray:
    """Flux of the stacked state ``U = (rho, m_1, .., m_d)`` through faces normal to ``axis``.

    ``eps=None`` gives the unscaled system.
    """
    rho, m = U[0], U[1:]
    un = m[axis] / rho
    p = pressure(eos, rho)
    if eps is not None:
        p = p / eps ** 2
    F = np.empty_like(U)
    F[0] = m[axis]
    for j in range(m.shape[0]):
        F[1 + j] = m[j] * un
    F[1 + axis] += p
    return F


def wave_speed(U: np.ndarray, eos: EosModel, eps: float | None) -> np.ndarray:
    """|u| + sqrt(p'(rho))/eps, cellwise."""
    rho, m = U[0], U[1:]
    speed = np.sqrt(np.sum(m ** 2, axis=0)) / rho
    c = sound_speed(eos, rho)
    if eps is not None:
        c = c / eps
    return speed + c


def rusanov_flux(left: np.ndarray, right: np.ndarray, eps: float | None, eos: EosModel,
                 axis: int = 0) -> np.ndarray:
    """Local Lax-Friedrichs flux between stacked states ``left`` and ``right``."""
    if np.any(left[0] <= 0) or np.any(right[0] <= 0):
        raise PositivityError(float("nan"), (), float(min(np.min(left[0]), np.min(right[0]))))
    lam = np.maximum(wave_speed(left, eos, eps), wave_speed(right, eos, eps))
    fl = physical_flux(left, eos, eps, axis)
    fr = physical_flux(right, eos, eps, axis)
    return 0.5 * (fl + fr) - 0.5 * lam * (right - left)


def _limited_slope(dm, dp, kind):
    if kind == "linear":
        return 0.5 * (dm + dp)
    if kind == "minmod":
        return np.where(dm * dp > 0, np.sign(dm) * np.minimum(np.abs(dm), np.abs(dp)), 0.0)
    if kind == "vanleer":
        prod = dm * dp
        denom = np.where(dm + dp == 0, 1.0, dm + dp)
        return np.where(prod > 0, 2.0 * prod / denom, 0.0)
    raise DomainError(kind)


def interface_states(U: np.ndarray, axis: int, reconstruction: str):
    """Left/right states at the face between cell i and i+1 along ``axis``."""
    ax = axis + 1
    if reconstruction == "none":
        return U, np.roll(U, -1, ax)
    dm = U - np.roll(U, 1, ax)
    dp = np.roll(U, -1, ax) - U
    s = 0.5 * _limited_slope(dm, dp, reconstruction)
    return U + s, np.roll(U - s, -1, ax)


def rhs(U: np.ndarray, grid: TorusGrid, config: CompSolverConfig) -> np.ndarray:
    """Semi-discrete time derivative of the stacked cell averages."""
    out = np.zeros_like(U)
    for axis, h in enumerate(grid.dx):
        UL, UR = interface_states(U, axis, config.reconstruction)
        F = rusanov_flux(UL, UR, config.eps, config.eos, axis)
        out -= (F - np.roll(F, 1, axis + 1)) / h
    if config.viscosity > 0:
        u = U[1:] / U[0]
        out[1:] += config.viscosity * (fd_laplacian(grid, u) + fd_grad_div(grid, u))
    return out


def max_stable_dt(state: ConservedState, config: CompSolverConfig) -> float:
    lam = wave_speed(state.stacked(), config.eos, config.eps)
    lam_max = float(np.max(lam))
    dt = min(config.cfl * h / lam_max for h in state.grid.dx)
    if config.viscosity > 0:
        dt = min(dt, min(config.cfl * h * h / (4.0 * config.viscosity) for h in state.grid.dx))
    return dt


def _check_floor(U, t, floor):
    rmin = np.min(U[0])
    if not rmin >= floor:
        cell = tuple(int(i) for i in np.unravel_index(np.argmin(U[0]), U[0].shape))
        raise PositivityError(t, cell, float(rmin))


def step(state: ConservedState, dt: float, config: CompSolverConfig) -> ConservedState:
    grid = state.grid
    U = state.stacked()
    t_new = state.time + dt
    try:
        if config.integrator == "forward-euler":
            U_new = U + dt * rhs(U, grid, config)
        else:
            U1 = U + dt * rhs(U, grid, config)
            _check_floor(U1, t_new, config.rho_floor)
            U_new = 0.5 * U + 0.5 * (U1 + dt * rhs(U1, grid, config))
    except PositivityError as err:
        if np.isnan(err.time):
            raise PositivityError(t_new, err.cell, err.value) from None
        raise
    _check_floor(U_new, t_new, config.rho_floor)
    return ConservedState(grid, U_new[0], U_new[1:], state.eps, t_new)


def energy_parts(state: ConservedState, eos: EosModel) -> tuple[float, float]:
    """(kinetic, potential/eps^2) integrals of the relative energy to (rho_bar, 0)."""
    vol = state.grid.cell_volume
    kin = 0.5 * np.sum(state.mom ** 2, axis=0) / state.rho
    pot = rel_potential(eos, state.rho, eos.rho_bar) / state.eps ** 2
    return float(vol * np.sum(kin)), float(vol * np.sum(pot))


def total_energy(state: ConservedState, eos: EosModel) -> float:
    k, p = energy_parts(state, eos)
    return k + p


ENERGY_COLUMNS = ("step", "time", "dt", "total_energy", "kinetic", "potential_over_eps2")


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list[ConservedState] = field(default_factory=list)
    energy_log: list[tuple] = field(default_factory=list)
    steps: int = 0

    def append(self, state: ConservedState):
        if self.times and not state.time > self.times[-1]:
            raise ValueError("trajectory times must be strictly increasing")
        self.times.append(state.time)
        self.states.append(state)

    def energies(self) -> np.ndarray:
        return np.array([row[3] for row in self.energy_log])

    def write_energy_csv(self, path) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(ENERGY_COLUMNS)
            for row in self.energy_log:
                w.writerow([row[0]] + [repr(float(x)) for x in row[1:]])
        return path


def run(init: ConservedState, T: float, config: CompSolverConfig,
        output_times=None, keep_steps: bool = False) -> Trajectory:
    """Integrate from ``init`` to ``T``; the initial state is always the first snapshot.

    With ``keep_steps`` every intermediate step is kept as well (for space-time
    quadrature).
    """
    if T < 0:
        raise DomainError("final time must be >= 0")
    if output_times is None:
        output_times = [T]
    targets = sorted(float(t) for t in output_times if 0 < t <= T)
    traj = Trajectory()
    state = init
    traj.append(state)
    kin, pot = energy_parts(state, config.eos)
    traj.energy_log.append((0, state.time, 0.0, kin + pot, kin, pot))
    if T == 0 or not targets:
        return traj
    n = 0
    for target in targets:
        while state.time < target:
            dt = max_stable_dt(state, config)
            remaining = target - state.time
            if dt >= remaining or remaining - dt < 1e-12 * max(target, 1.0):
                dt = remaining
                state = step(state, dt, config)
                state.time = target
            else:
                state = step(state, dt, config)
            n += 1
            kin, pot = energy_parts(state, config.eos)
            traj.energy_log.append((n, state.time, dt, kin + pot, kin, pot))
            if keep_steps and state.time < target:
                traj.append(state)
        traj.append(state)
    traj.steps = n
    return traj


@dataclass
class TestFunction:
    """Smooth space-time test function given with its derivatives.

    ``value(t, X)`` returns a scalar field (continuity) or a ``(d, ...)`` vector
    field (momentum); ``grad`` returns ``(..., d)``-stacked spatial derivatives
    with the derivative index first: ``grad[j]`` is d/dx_j of ``value``.
    """

    value: Callable
    dt: Callable
    grad: Callable

    __test__ = False


def cosine_test_function(grid: TorusGrid, t_cut: float, vector: bool = False,
                         phase: float = 0.3) -> TestFunction:
    """eta(t) prod_i cos(2 pi x_i / L_i + phase), with eta = cos^2(pi t / 2 t_cut) on [0, t_cut)."""
    L = grid.lengths
    d = grid.dim

    def eta(t):
        return np.cos(0.5 * np.pi * t / t_cut) ** 2 if t < t_cut else 0.0

    def deta(t):
        return -0.5 * np.pi / t_cut * np.sin(np.pi * t / t_cut) if t < t_cut else 0.0

    def spatial(X):
        return np.prod([np.cos(2 * np.pi * X[i] / L[i] + phase) for i in range(d)], axis=0)

    def spatial_grad(X):
        out = []
        for j in range(d):
            terms = [(-2 * np.pi / L[i] * np.sin(2 * np.pi * X[i] / L[i] + phase)) if i == j
                     else np.cos(2 * np.pi * X[i] / L[i] + phase) for i in range(d)]
            out.append(np.prod(terms, axis=0))
        return np.stack(out)

    if not vector:
        return TestFunction(lambda t, X: eta(t) * spatial(X),
                            lambda t, X: deta(t) * spatial(X),
                            lambda t, X: eta(t) * spatial_grad(X))
    # phi_i = eta g for every component i; grad[j, i] = eta d_j g
    return TestFunction(lambda t, X: eta(t) * np.stack([spatial(X)] * d),
                        lambda t, X: deta(t) * np.stack([spatial(X)] * d),
                        lambda t, X: eta(t) * np.stack([np.stack([gj] * d) for gj in spatial_grad(X)]))


def weak_residual(traj: Trajectory, testfn: TestFunction, which: str, eos: EosModel) -> float:
    """|weak-form defect| of the computed solution (Dirac measure, no concentration defect).

    Time integral by the trapezoid rule over the stored snapshots, space
    integral by the midpoint rule.
    """
    if which not in ("continuity", "momentum"):
        raise DomainError("which must be 'continuity' or 'momentum'")
    if len(traj.states) < 2:
        raise DomainError("weak residual needs at least two snapshots")
    grid = traj.states[0].grid
    X = grid.mesh()
    vol = grid.cell_volume
    t_end = traj.times[-1]
    end_val = np.max(np.abs(testfn.value(t_end, X)))
    scale = max(np.max(np.abs(testfn.value(0.0, X))), 1.0)
    if end_val > 1e-12 * scale:
        raise DomainError("test function must vanish at the final trajectory time")

    def integrand(s: ConservedState):
        t = s.time
        if which == "continuity":
            g = testfn.grad(t, X)
            return np.sum(s.rho * testfn.dt(t, X) + np.sum(s.mom * g, axis=0))
        phi_t = testfn.dt(t, X)
        g = testfn.grad(t, X)  # g[j, i] = d_j phi_i
        div_phi = sum(g[i, i] for i in range(grid.dim))
        p = pressure(eos, s.rho) / s.eps ** 2
        conv = sum(s.mom[i] * s.mom[j] / s.rho * g[j, i]
                   for i in range(grid.dim) for j in range(grid.dim))
        return np.sum(np.sum(s.mom * phi_t, axis=0) + conv + p * div_phi)

    vals = np.array([integrand(s) for s in traj.states]) * vol
    times = np.array(traj.times)
    total = float(np.sum(0.5 * (vals[1:] + vals[:-1]) * np.diff(times)))
    s0 = traj.states[0]
    if which == "continuity":
        total += vol * float(np.sum(s0.rho * testfn.value(0.0, X)))
    else:
        total += vol * float(np.sum(s0.mom * testfn.value(0.0, X)))
    return abs(total)
