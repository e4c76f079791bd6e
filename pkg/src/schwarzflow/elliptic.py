"""Radial semilinear Dirichlet solves -Delta v + beta(v) = f on a centered
ball, by shooting on the pole value, plus the implicit diffusion step and
its concentration diagnostics.

The two-point problem is integrated as the first-order system in
(v, w = psi^(n-1) v'), which is regular at the pole; the pole cell uses the
quadratic series start v = alpha + (beta(alpha) - f(0)) r^2/(2n) in exact
per-cell volume form.  The boundary value v(R) is monotone in alpha = v(0)
because beta is nondecreasing, so a doubling bracket plus bisection finds
the Dirichlet solution; degenerate nonlinearities whose trajectories plunge
once the profile touches zero are handled by saturating runaway
trajectories (the terminal sign survives) and zeroing the dead tail of the
converged profile.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _odecore
from .errors import (NonConvergence, PreconditionOrderFails,
                     ShootingBracketFailed)
from .manifold import ModelManifold
from .nonlinearity import (Nonlinearity, _PL, _PLPrimitive, heat_nonlinearity,
                           power_nonlinearity, stefan_nonlinearity)
from .radial import (ConcentrationReport, RadialFunction, concentration_compare,
                     is_nonincreasing)

_GLX, _GLW = np.polynomial.legendre.leggauss(12)
_GLX = 0.5 * (_GLX + 1.0)
_GLW = 0.5 * _GLW

_EMPTY = np.zeros(0)


# ---------------------------------------------------------------------------
# absorption terms
# ---------------------------------------------------------------------------

@dataclass
class Beta:
    """Nondecreasing absorption term with primitive.

    kernel is the solver descriptor: ("zero",), ("linear", c),
    ("power", c, p) for c*v^p, or ("table", v_knots, values).
    """

    beta: callable
    B: callable
    lipschitz_bound: float | None = None
    inf_derivative: float | None = None
    kernel: tuple | None = None


def zero_beta() -> Beta:
    z = lambda v: np.zeros_like(np.asarray(v, dtype=float))
    return Beta(z, z, 0.0, 0.0, ("zero",))


def beta_from_phi(phi: Nonlinearity, h: float) -> Beta:
    """beta = (minimal inverse of phi) / h, the implicit-step absorption."""
    if not phi.bijective:
        raise ValueError("phi has flat stretches; regularize before stepping")
    if h <= 0:
        raise ValueError("h must be positive")
    ker = phi.inverse_kernel
    if ker is None:
        raise ValueError("phi lacks an inverse kernel")
    if ker[0] == "identity":
        c = 1.0 / h
        return Beta(lambda v: np.asarray(v, float) / h,
                    lambda v: 0.5 * np.asarray(v, float) ** 2 / h,
                    c, c, ("linear", c))
    if ker[0] == "power":
        p = ker[1]
        c = 1.0 / h
        beta = lambda v: np.sign(v) * np.abs(np.asarray(v, float)) ** p / h
        B = lambda v: np.abs(np.asarray(v, float)) ** (p + 1.0) / ((p + 1.0) * h)
        return Beta(beta, B, None, None, ("power", c, p))
    vk, uk = ker[1], ker[2]
    pl = _PL(vk, uk / h)
    slopes = np.diff(uk) / np.maximum(np.diff(vk), 1e-300) / h
    return Beta(pl, _PLPrimitive(pl), float(np.max(slopes)),
                float(np.min(slopes)), ("table", vk, uk / h))


def beta_from_callable(fn, v_cap: float, points: int = 4097) -> Beta:
    """Tabulate an arbitrary nondecreasing beta on [0, v_cap] (quadratic knots)."""
    x = v_cap * (np.arange(points) / (points - 1)) ** 2
    y = np.asarray(fn(x), dtype=float)
    if np.any(np.diff(y) < -1e-12 * (1.0 + float(np.max(np.abs(y))))):
        raise ValueError("beta must be nondecreasing")
    y = np.maximum.accumulate(y)
    pl = _PL(x, y)
    return Beta(pl, _PLPrimitive(pl), None, None, ("table", x, y))


def _kernel_parts(kernel: tuple):
    mode_map = {"zero": _odecore.BETA_ZERO, "linear": _odecore.BETA_LINEAR,
                "power": _odecore.BETA_POWER, "table": _odecore.BETA_TABLE}
    mode = mode_map[kernel[0]]
    if kernel[0] == "zero":
        return mode, 0.0, 0.0, _EMPTY, _EMPTY
    if kernel[0] == "linear":
        return mode, float(kernel[1]), 1.0, _EMPTY, _EMPTY
    if kernel[0] == "power":
        return mode, float(kernel[1]), float(kernel[2]), _EMPTY, _EMPTY
    return mode, 0.0, 0.0, np.ascontiguousarray(kernel[1], dtype=float), \
        np.ascontiguousarray(kernel[2], dtype=float)


def _kernel_apply(kernel: tuple, v: np.ndarray) -> np.ndarray:
    """Vectorized mirror of the compiled beta evaluation (odd extension)."""
    v = np.asarray(v, dtype=float)
    sign = np.sign(v)
    a = np.abs(v)
    if kernel[0] == "zero":
        return np.zeros_like(a)
    if kernel[0] == "linear":
        return kernel[1] * v
    if kernel[0] == "power":
        return sign * kernel[1] * a ** kernel[2]
    tx, ty = kernel[1], kernel[2]
    base = np.interp(a, tx, ty)
    slope = (ty[-1] - ty[-2]) / (tx[-1] - tx[-2])
    out = np.where(a > tx[-1], ty[-1] + slope * (a - tx[-1]), base)
    return sign * out


# ---------------------------------------------------------------------------
# the shooting solve
# ---------------------------------------------------------------------------

@dataclass
class EllipticSolution:
    """Solved radial profile with shooting metadata.

    residual is the worst defect of the flux identity
    psi^(n-1) v'(r) = int_0^r (beta(v) - f) psi^(n-1), measured by an
    independent Simpson cumulative; residual_scale is the natural size of
    the two sides.
    """

    v: RadialFunction
    alpha: float
    residual: float
    iterations: int
    vprime: np.ndarray
    w: np.ndarray
    residual_profile: np.ndarray
    residual_scale: float


def _first_cell_moment(m: ModelManifold, r1: float) -> float:
    """int_0^{r1} G(s)/psi^(n-1)(s) ds with G the cumulative weight."""
    s = r1 * _GLX
    inner_pts = s[:, None] * _GLX[None, :]
    G_s = s * (m.psi_pow(inner_pts) @ _GLW)
    vals = G_s / m.psi_pow(s)
    return float(r1 * np.dot(vals, _GLW))


def solve_semilinear(m: ModelManifold, R: float, beta: Beta,
                     f: RadialFunction, *, refine: int = 5,
                     max_doublings: int = 60,
                     max_iterations: int = 400) -> EllipticSolution:
    """Dirichlet solve of -Delta v + beta(v) = f on the centered R-ball.

    f must be nonnegative and live on a grid reaching exactly R.  The
    integrator subdivides every grid cell ``refine`` times (f is linear per
    cell, so the refinement loses nothing of the datum).  Raises
    ShootingBracketFailed when no pole value yields a sign change of v(R),
    NonConvergence when the bisection budget is exhausted or the converged
    profile keeps a significant negative part.
    """
    grid = f.grid
    if abs(grid.R - R) > 1e-12 * max(1.0, R):
        raise ValueError("grid outer radius must equal R")
    fmax = float(np.max(np.abs(f.values)))
    if float(np.min(f.values)) < -1e-9 * (1.0 + fmax):
        raise ValueError("f must be nonnegative")
    refine = max(1, int(refine))
    coarse = grid.nodes
    if refine == 1:
        nodes = coarse
    else:
        sub = np.linspace(0.0, 1.0, refine + 1)[:-1]
        nodes = np.concatenate([
            (coarse[:-1, None] + np.diff(coarse)[:, None] * sub[None, :]).ravel(),
            [coarse[-1]]])
    f_n = np.interp(nodes, coarse, np.maximum(f.values, 0.0))
    f_m = 0.5 * (f_n[:-1] + f_n[1:])

    pwn = np.asarray(m.psi_pow(nodes), dtype=float)
    pwm = np.asarray(m.psi_pow(0.5 * (nodes[:-1] + nodes[1:])), dtype=float)
    J0_fine, _ = m.cell_volume_integrals(nodes[:2])
    g1 = float(J0_fine[0])
    i1 = _first_cell_moment(m, nodes[1])

    kernel = beta.kernel
    if kernel is None:
        kernel = beta_from_callable(beta.beta, 8.0 * (1.0 + fmax * R * R)).kernel
    mode, c0, p0, tx, ty = _kernel_parts(kernel)

    scale0 = 1.0 + fmax * R * R
    cap = max(1e14, 1e8 * scale0)

    def terminal(a: float) -> float:
        v, _ = _odecore.shoot(nodes, pwn, pwm, f_n, f_m, g1, i1,
                              mode, c0, p0, tx, ty, a, cap)
        return float(v[-1])

    iters = 1
    ztol = 1e-13 * scale0
    m0 = terminal(0.0)
    if m0 >= -ztol:
        alpha = 0.0
    else:
        lo = 0.0
        a = max(1e-6, fmax * R * R / (2.0 * m.n))
        hi = None
        for _ in range(max_doublings):
            fa = terminal(a)
            iters += 1
            if fa > 0.0:
                hi = a
                break
            lo = a
            a *= 2.0
        if hi is None:
            raise ShootingBracketFailed(
                f"v(R) stayed negative up to alpha = {a:.3g}")
        while hi - lo > 1e-15 * max(1.0, hi):
            if iters >= max_iterations:
                raise NonConvergence("bisection budget exhausted")
            mid = 0.5 * (lo + hi)
            if terminal(mid) > 0.0:
                hi = mid
            else:
                lo = mid
            iters += 1
        alpha = lo

    v, w = (np.asarray(x) for x in _odecore.shoot(
        nodes, pwn, pwm, f_n, f_m, g1, i1, mode, c0, p0, tx, ty, alpha, cap))

    # dead-tail clamp: once the profile crosses zero strictly inside the
    # domain and never meaningfully recovers, the exact continuation is
    # identically zero; the crossing node keeps its (small) flux so the
    # residual stays honest
    neg = v < 0.0
    if np.any(neg):
        first = int(np.argmax(neg))
        if first < len(v) - 1 and float(np.max(v[first:])) <= 1e-9 * (1.0 + alpha):
            v[first:] = 0.0
            w[first + 1:] = 0.0
    if float(np.min(v)) < -1e-8 * (1.0 + alpha):
        raise NonConvergence("profile keeps a significant negative part")
    v = np.maximum(v, 0.0)

    vp_fine = np.zeros_like(v)
    vp_fine[1:] = w[1:] / pwn[1:]
    dr = np.diff(nodes)
    v_mid = 0.5 * (v[:-1] + v[1:]) + 0.125 * dr * (vp_fine[:-1] - vp_fine[1:])
    q_n = (_kernel_apply(kernel, v) - f_n) * pwn
    q_m = (_kernel_apply(kernel, v_mid) - f_m) * pwm
    seg = dr / 6.0 * (q_n[:-1] + 4.0 * q_m + q_n[1:])
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    resid_fine = np.abs(w - cum)
    resid_scale = 1.0 + float(np.max(np.abs(w))) + float(np.max(np.abs(cum)))

    sl = slice(None, None, refine)
    return EllipticSolution(RadialFunction(grid, v[sl], nonneg=True), alpha,
                            float(np.max(resid_fine)), iters, vp_fine[sl],
                            w[sl], resid_fine[sl], resid_scale)


# ---------------------------------------------------------------------------
# implicit diffusion step
# ---------------------------------------------------------------------------

def _prepare_phi(phi: Nonlinearity, k_reg: int | None) -> Nonlinearity:
    if k_reg is not None:
        return phi.regularize(k_reg)
    if phi.bijective:
        return phi
    raise ValueError("phi has flat stretches; supply k_reg")


def discrete_step(m: ModelManifold, R: float, phi: Nonlinearity, h: float,
                  w_prev: RadialFunction,
                  k_reg: int | None = None) -> RadialFunction:
    """One implicit step of dt u = Delta phi(u): solve
    -Delta v + phi_inv(v)/h = w_prev/h and return phi_inv(v)."""
    w_next, _ = discrete_step_full(m, R, phi, h, w_prev, k_reg)
    return w_next


def discrete_step_full(m: ModelManifold, R: float, phi: Nonlinearity, h: float,
                       w_prev: RadialFunction, k_reg: int | None = None
                       ) -> tuple[RadialFunction, EllipticSolution]:
    phi = _prepare_phi(phi, k_reg)
    beta = beta_from_phi(phi, h)
    f = RadialFunction(w_prev.grid, w_prev.values / h)
    sol = solve_semilinear(m, R, beta, f)
    # w_next = phi_inv(v) = h * beta(v), via the same kernel the solver used
    w_vals = h * _kernel_apply(beta.kernel, sol.v.values)
    w_vals = np.maximum(w_vals, 0.0)
    return RadialFunction(w_prev.grid, w_vals, nonneg=True), sol


# ---------------------------------------------------------------------------
# concentration step (discrete comparison of a solve against the solve
# with rearranged-dominating data)
# ---------------------------------------------------------------------------

@dataclass
class EllipticConcentration:
    report: ConcentrationReport
    A_max: float
    A: np.ndarray
    w_next: RadialFunction
    w_bar_next: RadialFunction


def elliptic_concentration_check(m: ModelManifold, R: float, phi: Nonlinearity,
                                 h: float, f: RadialFunction,
                                 f_bar: RadialFunction,
                                 k_reg: int | None = None) -> EllipticConcentration:
    """Step f and f_bar through the implicit solve and compare concentrations.

    Requires f_bar radially nonincreasing and dominating the rearrangement
    of f in the concentration order (raises PreconditionOrderFails
    otherwise).  A(r) is the cumulative gap of the absorption terms
    beta(v_star) - beta(v_bar); since beta is increasing, its rearrangement
    commutes with the cell quantile, so A is the (sign-flipped, 1/h-scaled)
    margin curve of the step outputs.
    """
    if not is_nonincreasing(f_bar, tol=1e-12 * (1.0 + float(np.max(np.abs(f_bar.values))))):
        raise PreconditionOrderFails("f_bar is not radially nonincreasing")
    pre = concentration_compare(f, f_bar)
    if pre.verdict == "fails":
        raise PreconditionOrderFails(
            f"rearrangement of f is not dominated by f_bar (margin {pre.min_margin:.3g})")

    w_next, _ = discrete_step_full(m, R, phi, h, f, k_reg)
    w_bar_next, _ = discrete_step_full(m, R, phi, h, f_bar, k_reg)
    report = concentration_compare(w_next, w_bar_next)
    A = -report.margins / h
    return EllipticConcentration(report, float(-report.min_margin / h), A,
                                 w_next, w_bar_next)


# ---------------------------------------------------------------------------
# qualitative checks
# ---------------------------------------------------------------------------

def hopf_strict_decrease_check(sol: EllipticSolution, f: RadialFunction,
                               eps_cells: int = 2) -> float | None:
    """min of -v' on [eps, R] for nonincreasing nontrivial f; None when f = 0."""
    if float(np.max(np.abs(f.values))) == 0.0:
        return None
    if not is_nonincreasing(f, tol=1e-12 * (1.0 + float(np.max(np.abs(f.values))))):
        raise ValueError("f must be radially nonincreasing")
    grid = sol.v.grid
    eps = eps_cells * grid.max_spacing
    mask = grid.nodes >= eps - 1e-15
    return float(np.min(-sol.vprime[mask]))


def radial_monotonicity_constant(m: ModelManifold, R: float,
                                 samples: int = 1024) -> float:
    """c_R = (n-1) sup (psi'' psi - psi'^2)^+ / psi^2 + 1 on (0, R)."""
    r = np.linspace(R / samples, R * (1.0 - 1e-12), samples)
    p0, p1, p2 = m.psi(r)
    expr = (p2 * p0 - p1 * p1) / (p0 * p0)
    return float((m.n - 1) * np.max(np.maximum(expr, 0.0)) + 1.0)
