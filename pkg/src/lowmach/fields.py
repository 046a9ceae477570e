"""Periodic grids, cell fields, spectral/finite-difference operators and snapshots.

Scalar fields have the grid shape ``(n0, ..., n_{d-1})``; vector fields carry a
leading component axis, ``(d, n0, ...)``. Axis ``i`` of a scalar field is the
``i``-th coordinate direction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .eos import DomainError


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class TorusGrid:
    """Uniform cell-centred grid on the box ``prod [-L_i/2, L_i/2]`` with periodic wrap."""

    cells: tuple[int, ...]
    lengths: tuple[float, ...] | None = None

    def __post_init__(self):
        cells = tuple(int(n) for n in self.cells)
        if len(cells) not in (1, 2):
            raise ShapeError(f"only 1D and 2D grids are supported, got dim={len(cells)}")
        for n in cells:
            if n < 8 or n % 2:
                raise ShapeError(f"cells per dimension must be even and >= 8, got {n}")
        lengths = self.lengths if self.lengths is not None else (2.0,) * len(cells)
        lengths = tuple(float(x) for x in lengths)
        if len(lengths) != len(cells) or any(x <= 0 for x in lengths):
            raise ShapeError("lengths must be positive, one per dimension")
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "lengths", lengths)

    @classmethod
    def uniform(cls, dim: int, n: int, length: float = 2.0) -> "TorusGrid":
        return cls((n,) * dim, (length,) * dim)

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def dx(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.dx))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    def axes(self) -> list[np.ndarray]:
        """Cell-centre coordinates along each axis."""
        return [-L / 2 + (np.arange(n) + 0.5) * (L / n) for L, n in zip(self.lengths, self.cells)]

    def mesh(self) -> tuple[np.ndarray, ...]:
        return tuple(np.meshgrid(*self.axes(), indexing="ij"))

    def wavenumbers(self) -> list[np.ndarray]:
        """Angular wavenumbers for the real-to-complex layout (last axis halved),
        broadcastable against the spectrum shape."""
        ks = []
        for i, (L, n) in enumerate(zip(self.lengths, self.cells)):
            if i == self.dim - 1:
                k = 2 * np.pi * np.fft.rfftfreq(n, d=L / n)
            else:
                k = 2 * np.pi * np.fft.fftfreq(n, d=L / n)
            shape = [1] * self.dim
            shape[i] = k.size
            ks.append(k.reshape(shape))
        return ks

    def derivative_wavenumbers(self) -> list[np.ndarray]:
        """Wavenumbers with the Nyquist entry zeroed, for odd derivatives."""
        ks = []
        for i, (k, n) in enumerate(zip(self.wavenumbers(), self.cells)):
            k = k.copy()
            idx = [0] * self.dim
            idx[i] = n // 2
            k[tuple(idx)] = 0.0
            ks.append(k)
        return ks

    def k2(self) -> np.ndarray:
        return sum(k ** 2 for k in self.wavenumbers())

    def spectrum_shape(self) -> tuple[int, ...]:
        return self.cells[:-1] + (self.cells[-1] // 2 + 1,)

    def to_dict(self) -> dict:
        return {"cells": list(self.cells), "lengths": list(self.lengths)}

    @classmethod
    def from_dict(cls, d: dict) -> "TorusGrid":
        return cls(tuple(d["cells"]), tuple(d["lengths"]) if d.get("lengths") else None)


@dataclass
class ConservedState:
    """Cell averages of density and momentum with the Mach number attached."""

    grid: TorusGrid
    rho: np.ndarray
    mom: np.ndarray
    eps: float
    time: float = 0.0

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=float)
        self.mom = np.asarray(self.mom, dtype=float)
        if self.rho.shape != self.grid.shape:
            raise ShapeError(f"rho shape {self.rho.shape} != grid {self.grid.shape}")
        if self.mom.shape != (self.grid.dim,) + self.grid.shape:
            raise ShapeError(f"mom shape {self.mom.shape} != {(self.grid.dim,) + self.grid.shape}")
        if not self.eps > 0:
            raise DomainError("Mach number eps must be > 0")
        if not np.all(self.rho > 0):
            raise DomainError("density must be strictly positive in every cell")

    @property
    def velocity(self) -> np.ndarray:
        return self.mom / self.rho

    def copy(self) -> "ConservedState":
        return ConservedState(self.grid, self.rho.copy(), self.mom.copy(), self.eps, self.time)

    def stacked(self) -> np.ndarray:
        return np.concatenate([self.rho[None], self.mom], axis=0)

    @classmethod
    def from_stacked(cls, grid, U, eps, time=0.0) -> "ConservedState":
        return cls(grid, U[0], U[1:], eps, time)


def _check_scalar(grid: TorusGrid, f):
    if np.shape(f) != grid.shape:
        raise ShapeError(f"field shape {np.shape(f)} != grid {grid.shape}")


def _check_vector(grid: TorusGrid, u):
    if np.shape(u) != (grid.dim,) + grid.shape:
        raise ShapeError(f"vector field shape {np.shape(u)} != {(grid.dim,) + grid.shape}")


def dft_forward(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    """Real-to-complex transform; vector fields are transformed componentwise."""
    f = np.asarray(f, dtype=float)
    if f.shape == grid.shape:
        return np.fft.rfftn(f)
    _check_vector(grid, f)
    axes = tuple(range(1, grid.dim + 1))
    return np.fft.rfftn(f, axes=axes)


def dft_inverse(grid: TorusGrid, fh: np.ndarray) -> np.ndarray:
    """Complex-to-real transform; conjugate symmetry is imposed by the c2r layout."""
    spec = grid.spectrum_shape()
    if fh.shape == spec:
        return np.fft.irfftn(fh, s=grid.shape, axes=tuple(range(grid.dim)))
    if fh.shape != (grid.dim,) + spec:
        raise ShapeError(f"spectrum shape {fh.shape} does not match grid")
    return np.fft.irfftn(fh, s=grid.shape, axes=tuple(range(1, grid.dim + 1)))


# spectral operators

def spectral_grad(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    _check_scalar(grid, f)
    fh = dft_forward(grid, f)
    return np.stack([dft_inverse(grid, 1j * k * fh) for k in grid.derivative_wavenumbers()])


def spectral_div(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    _check_vector(grid, u)
    uh = dft_forward(grid, u)
    ks = grid.derivative_wavenumbers()
    return dft_inverse(grid, sum(1j * ks[i] * uh[i] for i in range(grid.dim)))


def spectral_laplacian(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    _check_scalar(grid, f)
    return dft_inverse(grid, -grid.k2() * dft_forward(grid, f))


def divergence_norm(grid: TorusGrid, u: np.ndarray) -> float:
    """Relative spectral divergence ``||div u|| / || |k| u_hat ||`` (0 for solenoidal u)."""
    _check_vector(grid, u)
    uh = dft_forward(grid, u)
    ks = grid.derivative_wavenumbers()
    div = sum(1j * ks[i] * uh[i] for i in range(grid.dim))
    k2 = sum(k ** 2 for k in ks)
    num = np.sum(np.abs(div) ** 2)
    den = np.sum(k2 * np.sum(np.abs(uh) ** 2, axis=0))
    return float(np.sqrt(num / den)) if den > 0 else 0.0


def helmholtz_project(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """L2-orthogonal projection onto solenoidal fields (mean kept).

    In 1D the solenoidal fields are the constants, so only the mean survives.
    """
    _check_vector(grid, u)
    uh = dft_forward(grid, u)
    # Nyquist-zeroed wavenumbers keep the projector consistent with spectral_div
    ks = grid.derivative_wavenumbers()
    k2 = sum(k ** 2 for k in ks)
    k2_safe = np.where(k2 == 0, 1.0, k2)
    kdotu = sum(ks[i] * uh[i] for i in range(grid.dim))
    ph = np.stack([uh[i] - ks[i] * kdotu / k2_safe for i in range(grid.dim)])
    return dft_inverse(grid, ph)


def gradient_part(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    return u - helmholtz_project(grid, u)


def curl_of_streamfunction(grid: TorusGrid, psi: np.ndarray) -> np.ndarray:
    """2D velocity ``(d_y psi, -d_x psi)``, spectrally divergence free."""
    if grid.dim != 2:
        raise ShapeError("streamfunction velocity requires a 2D grid")
    g = spectral_grad(grid, psi)
    return np.stack([g[1], -g[0]])


# second-order centred finite differences

def fd_grad(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    _check_scalar(grid, f)
    return np.stack([(np.roll(f, -1, i) - np.roll(f, 1, i)) / (2 * h)
                     for i, h in enumerate(grid.dx)])


def fd_div(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    _check_vector(grid, u)
    return sum((np.roll(u[i], -1, i) - np.roll(u[i], 1, i)) / (2 * h)
               for i, h in enumerate(grid.dx))


def fd_laplacian(grid: TorusGrid, f: np.ndarray) -> np.ndarray:
    """Compact 3-point Laplacian per axis; applies componentwise to vector fields."""
    lead = np.ndim(f) - grid.dim
    return sum((np.roll(f, -1, lead + i) - 2 * f + np.roll(f, 1, lead + i)) / h ** 2
               for i, h in enumerate(grid.dx))


def fd_grad_div(grid: TorusGrid, u: np.ndarray) -> np.ndarray:
    """grad(div u): compact second differences on the diagonal, centred mixed terms."""
    _check_vector(grid, u)
    out = np.zeros_like(u)
    dx = grid.dx
    for i in range(grid.dim):
        for j in range(grid.dim):
            if i == j:
                out[i] += (np.roll(u[i], -1, i) - 2 * u[i] + np.roll(u[i], 1, i)) / dx[i] ** 2
            else:
                uj = u[j]
                d = (np.roll(np.roll(uj, -1, i), -1, j) - np.roll(np.roll(uj, -1, i), 1, j)
                     - np.roll(np.roll(uj, 1, i), -1, j) + np.roll(np.roll(uj, 1, i), 1, j))
                out[i] += d / (4 * dx[i] * dx[j])
    return out


# norms

@dataclass(frozen=True)
class SubBox:
    """Axis-aligned box ``prod [lower_i, upper_i]`` selecting the cells whose centres lie inside."""

    lower: tuple[float, ...]
    upper: tuple[float, ...]

    @classmethod
    def centered(cls, dim: int, half_width: float) -> "SubBox":
        return cls((-half_width,) * dim, (half_width,) * dim)

    def mask(self, grid: TorusGrid) -> np.ndarray:
        m = np.ones(grid.shape, dtype=bool)
        for i, x in enumerate(grid.mesh()):
            m &= (x >= self.lower[i]) & (x <= self.upper[i])
        return m

    @property
    def diameter(self) -> float:
        return float(np.sqrt(sum((u - l) ** 2 for l, u in zip(self.lower, self.upper))))

    def to_dict(self) -> dict:
        return {"lower": list(self.lower), "upper": list(self.upper)}


def lp_norm(grid: TorusGrid, f: np.ndarray, p: float, subset: SubBox | None = None) -> float:
    """Cell-volume weighted discrete L^p norm; vector fields use the pointwise Euclidean norm."""
    if p < 1:
        raise DomainError(f"L^p norm needs p >= 1, got {p}")
    f = np.asarray(f, dtype=float)
    a = np.abs(f) if f.shape == grid.shape else np.sqrt(np.sum(f ** 2, axis=0))
    if subset is not None:
        a = a[subset.mask(grid)]
    if a.size == 0:
        return 0.0
    if np.isinf(p):
        return float(np.max(a))
    return float((grid.cell_volume * np.sum(a ** p)) ** (1.0 / p))


def spectral_l2_norm(grid: TorusGrid, f: np.ndarray) -> float:
    """L2 norm via Parseval on the real-to-complex spectrum."""
    fh = dft_forward(grid, f)
    n_last = grid.cells[-1]
    w = np.full(fh.shape[-1], 2.0)
    w[0] = 1.0
    if n_last % 2 == 0:
        w[-1] = 1.0
    total = np.sum(w * np.abs(fh) ** 2)
    return float(np.sqrt(grid.cell_volume * total / np.prod(grid.cells)))


# snapshots

def save_snapshot(path, grid: TorusGrid, fields: dict[str, np.ndarray], time: float = 0.0,
                  eps: float | None = None, extra: dict | None = None) -> Path:
    """Write ``<path>.bin`` (float64, row-major, fields in sidecar order) and ``<path>.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names, shapes = [], []
    with open(path.with_suffix(".bin"), "wb") as fh:
        for name, arr in fields.items():
            arr = np.ascontiguousarray(arr, dtype="<f8")
            fh.write(arr.tobytes(order="C"))
            names.append(name)
            shapes.append(list(arr.shape))
    meta = {"grid": grid.to_dict(), "time": time, "eps": eps,
            "fields": [{"name": n, "shape": s} for n, s in zip(names, shapes)],
            "dtype": "float64", "order": "C"}
    if extra:
        meta.update(extra)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True))
    return path


def load_snapshot(path) -> tuple[TorusGrid, dict[str, np.ndarray], dict]:
    path = Path(path)
    meta = json.loads(path.with_suffix(".json").read_text())
    raw = np.fromfile(path.with_suffix(".bin"), dtype="<f8")
    grid = TorusGrid.from_dict(meta["grid"])
    out, offset = {}, 0
    for entry in meta["fields"]:
        n = int(np.prod(entry["shape"]))
        out[entry["name"]] = raw[offset:offset + n].reshape(entry["shape"])
        offset += n
    if offset != raw.size:
        raise ShapeError(f"snapshot {path} has {raw.size} values, sidecar describes {offset}")
    return grid, out, meta


def save_state(path, state: ConservedState) -> Path:
    return save_snapshot(path, state.grid, {"rho": state.rho, "mom": state.mom},
                         time=state.time, eps=state.eps)


def load_state(path) -> ConservedState:
    grid, f, meta = load_snapshot(path)
    return ConservedState(grid, f["rho"], f["mom"], meta["eps"], meta["time"])
