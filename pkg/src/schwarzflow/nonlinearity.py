"""Nondecreasing constitutive nonlinearities with primitives, pseudo-inverses,
and slope-bounded regularizations.

A nonlinearity is a continuous nondecreasing map phi on [0, inf) with
phi(0) = 0 and phi not identically 0.  When phi has flat stretches the two
pseudo-inverses (minimal and maximal preimage) differ; solvers always go
through the minimal one.  ``regularize(k)`` produces a strictly increasing
surrogate whose slope lies in [1/(k+1), k+1] exactly: the exact secant
slopes on a dense canonical mesh are clipped to that band and re-integrated,
so the surrogate is piecewise linear, monotone, and converges to the
original locally uniformly as k grows (up to the fixed mesh resolution).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import exprparse

_TABLE_POINTS = 16385


class _PL:
    """Monotone piecewise-linear table on [0, x_max], linearly extended above."""

    def __init__(self, x: np.ndarray, y: np.ndarray):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        self._slope_end = (self.y[-1] - self.y[-2]) / (self.x[-1] - self.x[-2])

    def __call__(self, v):
        v = np.asarray(v, dtype=float)
        base = np.interp(v, self.x, self.y)
        ext = self.y[-1] + self._slope_end * (v - self.x[-1])
        out = np.where(v > self.x[-1], ext, base)
        return out if out.ndim else float(out)


class _PLPrimitive:
    """Exact integral of a _PL from 0 (piecewise quadratic)."""

    def __init__(self, pl: _PL):
        self.pl = pl
        dx = np.diff(pl.x)
        self.cum = np.concatenate([[0.0], np.cumsum(0.5 * (pl.y[:-1] + pl.y[1:]) * dx)])

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        x, y = self.pl.x, self.pl.y
        idx = np.clip(np.searchsorted(x, u, side="right") - 1, 0, len(x) - 2)
        t = u - x[idx]
        s = (y[idx + 1] - y[idx]) / (x[idx + 1] - x[idx])
        out = self.cum[idx] + y[idx] * t + 0.5 * s * t * t
        # beyond the table: extend with the end slope
        over = u > x[-1]
        if np.any(over):
            t2 = u - x[-1]
            out = np.where(over,
                           self.cum[-1] + y[-1] * t2 + 0.5 * self.pl._slope_end * t2 * t2,
                           out)
        return out if out.ndim else float(out)


def _monotone_inverse_left(x, y, rho):
    """Minimal preimage under the nondecreasing PL table (x, y)."""
    rho = np.asarray(rho, dtype=float)
    j = np.searchsorted(y, rho, side="left")
    j = np.clip(j, 0, len(y) - 1)
    exact = y[j] == rho
    jm = np.clip(j - 1, 0, len(y) - 1)
    dy = y[j] - y[jm]
    frac = np.where(dy > 0, (rho - y[jm]) / np.where(dy > 0, dy, 1.0), 1.0)
    interp = x[jm] + frac * (x[j] - x[jm])
    out = np.where(exact, x[j], interp)
    out = np.where(rho <= y[0], x[0], out)
    return out if out.ndim else float(out)


def _monotone_inverse_right(x, y, rho):
    """Maximal preimage under the nondecreasing PL table (x, y)."""
    rho = np.asarray(rho, dtype=float)
    j = np.searchsorted(y, rho, side="right") - 1
    j = np.clip(j, 0, len(y) - 1)
    exact = y[j] == rho
    jp = np.clip(j + 1, 0, len(y) - 1)
    dy = y[jp] - y[j]
    frac = np.where(dy > 0, (rho - y[j]) / np.where(dy > 0, dy, 1.0), 0.0)
    interp = x[j] + frac * (x[jp] - x[j])
    out = np.where(exact, x[j], interp)
    return out if out.ndim else float(out)


@dataclass
class Nonlinearity:
    """Continuous nondecreasing phi with primitive and pseudo-inverses.

    Attributes
    ----------
    phi, Phi : vectorized map and its primitive from 0.
    ell : limit of phi at infinity (may be inf).
    phi_inv_left, phi_inv_right : minimal / maximal preimage maps on [0, ell).
    bijective : True when phi is strictly increasing (solvers may use it
        directly; otherwise regularize first).
    inverse_kernel : fast-path descriptor for solvers, one of
        ("identity",), ("power", p), ("table", v_knots, u_knots), or None.
    """

    name: str
    phi: Callable
    Phi: Callable
    ell: float
    phi_inv_left: Callable
    phi_inv_right: Callable
    bijective: bool
    u_scale: float = 8.0
    inverse_kernel: tuple | None = None
    _reg_cache: dict = field(default_factory=dict, repr=False)

    def regularize(self, k: int) -> "Nonlinearity":
        """Strictly increasing surrogate with slope in [1/(k+1), k+1]."""
        if k < 1:
            raise ValueError("k must be >= 1")
        if k in self._reg_cache:
            return self._reg_cache[k]
        u_hi = 4.0 * self.u_scale
        x = np.linspace(0.0, u_hi, _TABLE_POINTS)
        y = np.asarray(self.phi(x), dtype=float)
        slopes = np.clip(np.diff(y) / np.diff(x), 1.0 / (k + 1), float(k + 1))
        yk = np.concatenate([[0.0], np.cumsum(slopes * np.diff(x))])
        fwd = _PL(x, yk)
        inv = _PL(yk, x)
        reg = Nonlinearity(
            name=f"{self.name}_reg{k}",
            phi=fwd,
            Phi=_PLPrimitive(fwd),
            ell=np.inf,
            phi_inv_left=inv,
            phi_inv_right=inv,
            bijective=True,
            u_scale=self.u_scale,
            inverse_kernel=("table", yk, x),
        )
        self._reg_cache[k] = reg
        return reg


def heat_nonlinearity() -> Nonlinearity:
    """phi(u) = u."""
    ident = lambda u: np.asarray(u, dtype=float)
    return Nonlinearity("heat", ident, lambda u: 0.5 * np.asarray(u, float) ** 2,
                        np.inf, ident, ident, True, inverse_kernel=("identity",))


def power_nonlinearity(exponent: float) -> Nonlinearity:
    """phi(u) = u^exponent (exponent >= 1 is the slow-diffusion range)."""
    if exponent <= 0:
        raise ValueError("exponent must be positive")
    mexp = float(exponent)
    phi = lambda u: np.asarray(u, dtype=float) ** mexp
    Phi = lambda u: np.asarray(u, dtype=float) ** (mexp + 1.0) / (mexp + 1.0)
    inv = lambda v: np.asarray(v, dtype=float) ** (1.0 / mexp)
    return Nonlinearity(f"power{mexp:g}", phi, Phi, np.inf, inv, inv, True,
                        inverse_kernel=("power", 1.0 / mexp))


def stefan_nonlinearity(threshold: float = 1.0) -> Nonlinearity:
    """phi(u) = (u - threshold)^+, flat on [0, threshold]."""
    c = float(threshold)
    phi = lambda u: np.maximum(np.asarray(u, dtype=float) - c, 0.0)
    Phi = lambda u: 0.5 * np.maximum(np.asarray(u, dtype=float) - c, 0.0) ** 2
    inv_l = lambda v: np.where(np.asarray(v, float) > 0.0, c + np.asarray(v, float), 0.0)
    inv_r = lambda v: c + np.maximum(np.asarray(v, float), 0.0)
    return Nonlinearity(f"stefan{c:g}", phi, Phi, np.inf, inv_l, inv_r,
                        bijective=False, inverse_kernel=None)


def expression_nonlinearity(src: str, u_scale: float = 8.0) -> Nonlinearity:
    """phi given as an expression in the variable u.

    Validated on a dense mesh of [0, 4*u_scale]: phi(0) = 0, nondecreasing,
    nonconstant.  The primitive and pseudo-inverses are table-based.
    """
    ast = exprparse.parse_expression(src)
    raw = lambda u: np.asarray(exprparse.evaluate(ast, u=np.asarray(u, float)), float)
    x = np.linspace(0.0, 4.0 * u_scale, _TABLE_POINTS)
    y = raw(x)
    if abs(float(y[0])) > 1e-12:
        raise ValueError("phi(0) must be 0")
    if np.any(np.diff(y) < -1e-12 * max(1.0, float(np.max(np.abs(y))))):
        raise ValueError("phi must be nondecreasing")
    if float(y[-1]) <= 0.0:
        raise ValueError("phi must be nonconstant")
    y = np.maximum.accumulate(np.maximum(y, 0.0))
    fwd = _PL(x, y)
    strictly = bool(np.all(np.diff(y) > 0.0))
    tail = float(raw(1e9))
    ell = np.inf if tail > 1e8 else max(tail, float(y[-1]))
    return Nonlinearity(
        f"expr:{src}", fwd, _PLPrimitive(fwd), ell,
        lambda rho: _monotone_inverse_left(x, y, rho),
        lambda rho: _monotone_inverse_right(x, y, rho),
        bijective=strictly,
        u_scale=u_scale,
        inverse_kernel=("table", y, x) if strictly else None,
    )


def nonlinearity_from_spec(spec: dict) -> Nonlinearity:
    """Build from a scenario fragment: {"kind": "heat"|"power"|"stefan"|"expr", ...}."""
    kind = spec.get("kind")
    if kind == "heat":
        return heat_nonlinearity()
    if kind == "power":
        return power_nonlinearity(float(spec.get("exponent", 2.0)))
    if kind == "stefan":
        return stefan_nonlinearity(float(spec.get("threshold", 1.0)))
    if kind == "expr":
        return expression_nonlinearity(spec["expr"], float(spec.get("u_scale", 8.0)))
    raise ValueError(f"unknown nonlinearity kind {kind!r}")
