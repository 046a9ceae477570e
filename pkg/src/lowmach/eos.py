"""Barotropic equation of state p = a rho^gamma and the convex potentials built on it.

Everything here is a pure function of its inputs and accepts scalars or numpy
arrays.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


@dataclass(frozen=True)
class EosModel:
    """Isentropic pressure law ``p = a * rho**gamma`` with far-field density ``rho_bar``."""

    a: float = 1.0
    gamma: float = 2.0
    rho_bar: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise DomainError(f"pressure coefficient a must be > 0, got {self.a}")
        if not self.gamma > 1:
            raise DomainError(f"adiabatic exponent gamma must be > 1, got {self.gamma}")
        if not self.rho_bar > 0:
            raise DomainError(f"reference density rho_bar must be > 0, got {self.rho_bar}")

    def to_dict(self) -> dict:
        return {"a": self.a, "gamma": self.gamma, "rho_bar": self.rho_bar}

    @classmethod
    def from_dict(cls, d: dict) -> "EosModel":
        return cls(a=float(d["a"]), gamma=float(d["gamma"]), rho_bar=float(d["rho_bar"]))

    @property
    def c2_bar(self) -> float:
        """Squared sound speed p'(rho_bar) at the reference density."""
        return float(dpressure(self, self.rho_bar))


def _check_nonneg(rho, name="rho"):
    if np.any(np.asarray(rho) < 0):
        raise DomainError(f"{name} must be >= 0")


def pressure(eos: EosModel, rho):
    _check_nonneg(rho)
    return eos.a * np.power(rho, eos.gamma)


def dpressure(eos: EosModel, rho):
    """p'(rho) = a gamma rho^(gamma-1)."""
    _check_nonneg(rho)
    return eos.a * eos.gamma * np.power(rho, eos.gamma - 1.0)


def sound_speed(eos: EosModel, rho):
    return np.sqrt(dpressure(eos, rho))


def pressure_potential(eos: EosModel, rho):
    """P(rho) = rho * int_1^rho p(z)/z^2 dz, in closed form a (rho^gamma - rho)/(gamma - 1).

    P(0) = 0 by continuous extension.
    """
    _check_nonneg(rho)
    return eos.a * (np.power(rho, eos.gamma) - rho) / (eos.gamma - 1.0)


def dpressure_potential(eos: EosModel, rho):
    """P'(rho) = a (gamma rho^(gamma-1) - 1)/(gamma - 1)."""
    _check_nonneg(rho)
    return eos.a * (eos.gamma * np.power(rho, eos.gamma - 1.0) - 1.0) / (eos.gamma - 1.0)


def d2pressure_potential(eos: EosModel, rho):
    """P''(rho) = p'(rho)/rho."""
    return eos.a * eos.gamma * np.power(rho, eos.gamma - 2.0)


def rel_potential(eos: EosModel, rho, r):
    """Bregman divergence H(rho|r) = P(rho) - P'(r)(rho - r) - P(r) >= 0.

    The linear part of P cancels, so the closed form only involves rho^gamma.
    """
    _check_nonneg(rho)
    if np.any(np.asarray(r) <= 0):
        raise DomainError("reference density r must be > 0")
    g = eos.gamma
    rg = np.power(r, g)
    return eos.a / (g - 1.0) * ((np.power(rho, g) - rg) - g * np.power(r, g - 1.0) * (rho - r))


class GrowthConstants(NamedTuple):
    P_inf: float
    p_inf: float


def growth_constants(eos: EosModel, rho_max: float, n: int = 2001) -> GrowthConstants:
    """Sampled tail estimates of ``limsup p/P`` and ``liminf p/rho^gamma``.

    Samples a logarithmic grid on ``[2 rho_bar, rho_max]`` and reports the
    extremes over its last decade, where the ratios have settled.
    """
    lo = 2.0 * eos.rho_bar
    if not rho_max > lo:
        raise DomainError("rho_max must exceed 2*rho_bar")
    rho = np.geomspace(lo, rho_max, n)
    tail = rho[rho >= max(rho_max / 10.0, lo)]
    P = pressure_potential(eos, tail)
    p = pressure(eos, tail)
    ok = P > 0
    P_inf = float(np.max(p[ok] / P[ok])) if np.any(ok) else float("inf")
    p_inf = float(np.min(p / np.power(tail, eos.gamma)))
    return GrowthConstants(P_inf, p_inf)


@dataclass(frozen=True)
class CutoffChi:
    """Smooth cutoff equal to one on [rho_bar/2, 2 rho_bar], zero outside [rho_bar/4, 4 rho_bar].

    Each transition is a quintic smoothstep, hence C^2.
    """

    rho_bar: float = 1.0

    @property
    def inner(self) -> tuple[float, float]:
        return (0.5 * self.rho_bar, 2.0 * self.rho_bar)

    @property
    def support(self) -> tuple[float, float]:
        return (0.25 * self.rho_bar, 4.0 * self.rho_bar)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        s_lo, s_hi = self.support
        i_lo, i_hi = self.inner
        left = _smoothstep((rho - s_lo) / (i_lo - s_lo))
        right = _smoothstep((s_hi - rho) / (s_hi - i_hi))
        return np.minimum(left, right)


def _smoothstep(t):
    t = np.clip(t, 0.0, 1.0)
    return t * t * t * (t * (6.0 * t - 15.0) + 10.0)


def ess_res_split(chi: CutoffChi, rho, value):
    """Split ``value`` into (chi(rho) value, (1 - chi(rho)) value).

    The residual part is formed by subtraction so the parts add back to
    ``value`` up to a single rounding.
    """
    _check_nonneg(rho)
    ess = chi(rho) * value
    return ess, value - ess


class ConvexityConstants(NamedTuple):
    c_ess: float
    c_res: float


def convexity_samples(eos: EosModel, delta: float, cap_factor: float = 1e6, n: int = 20001):
    """Density samples used by :func:`convexity_constants`: (essential grid, residual grid)."""
    rb = eos.rho_bar
    if not (0 < 2 * delta < rb < 1.0 / (2 * delta)):
        raise DomainError(f"need 0 < 2 delta < rho_bar < 1/(2 delta), got delta={delta}, rho_bar={rb}")
    ess = np.linspace(delta, 1.0 / delta, n)
    ess = ess[np.abs(ess - rb) > 1e-9 * rb]
    low = np.linspace(0.0, delta, n, endpoint=False)
    high = np.geomspace(1.0 / delta, max(cap_factor * rb, 2.0 / delta), n)
    return ess, np.concatenate([low, high])


def convexity_constants(eos: EosModel, delta: float, cap_factor: float = 1e6,
                        n: int = 20001) -> ConvexityConstants:
    """Smallest sampled constants with

    ``|rho - rho_bar|^2 <= c_ess H(rho|rho_bar)`` on ``[delta, 1/delta]`` and
    ``1 + |rho - rho_bar| + P(rho) <= c_res H(rho|rho_bar)`` off it.
    """
    rb = eos.rho_bar
    ess, res = convexity_samples(eos, delta, cap_factor, n)
    c_ess = np.max((ess - rb) ** 2 / rel_potential(eos, ess, rb))
    lhs = 1.0 + np.abs(res - rb) + pressure_potential(eos, res)
    c_res = np.max(lhs / rel_potential(eos, res, rb))
    return ConvexityConstants(float(c_ess), float(c_res))
