"""Pure numpy/scipy kernel backend.

Functionally identical to the compiled core in ``_core.pyx``; every public
name here has a compiled twin with the same signature and semantics.  All
reductions accumulate in extended precision (``np.longdouble``) so that
round-off floors match the compiled kernels, which use ``long double``
accumulators.

Conventions shared by both backends:

* 1D fields are contiguous float64 arrays of interior values, boundary
  values are structurally zero; 2D fields are C-contiguous (nx, ny) arrays.
* ``solve_helmholtz_1d`` and ``cg_helmholtz_2d`` solve (a*I - b*Lap) x = rhs
  with a >= 0, b > 0.
* nonlinearity kind codes: 0 = power (par=[p]), 1 = power plus linear
  (par=[p, a]), 2 = exp(u)-1 (par=[]), 3 = polynomial (par=[c1..cd]).
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import solveh_banded

name = "pure"

KIND_POWER = 0
KIND_POWER_LINEAR = 1
KIND_EXPM1 = 2
KIND_POLY = 3

_LD = np.longdouble


# ----------------------------------------------------------------------
# reductions


def ksum(w: np.ndarray) -> float:
    """Sum of all entries, extended-precision accumulation."""
    return float(np.sum(w, dtype=_LD))


def dot(u: np.ndarray, v: np.ndarray) -> float:
    return float(np.sum(u.astype(_LD) * v.astype(_LD)))


def sum_sq(u: np.ndarray) -> float:
    x = u.astype(_LD)
    return float(np.sum(x * x))


def sup_norm(u: np.ndarray) -> float:
    return float(np.max(np.abs(u))) if u.size else 0.0


def min_value(u: np.ndarray) -> float:
    return float(np.min(u)) if u.size else 0.0


# ----------------------------------------------------------------------
# Laplacian stencils (homogeneous Dirichlet boundary)


def laplacian_1d(u: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(u)
    inv_h2 = 1.0 / (h * h)
    out[:] = -2.0 * u
    out[:-1] += u[1:]
    out[1:] += u[:-1]
    out *= inv_h2
    return out


def laplacian_2d(u: np.ndarray, hx: float, hy: float) -> np.ndarray:
    p = np.pad(u, 1)
    return (p[:-2, 1:-1] - 2.0 * u + p[2:, 1:-1]) / (hx * hx) + (
        p[1:-1, :-2] - 2.0 * u + p[1:-1, 2:]
    ) / (hy * hy)


def dirichlet_energy_1d(u: np.ndarray, h: float) -> float:
    """Sum over all n+1 edges of (difference/h)^2 * h, zero boundary included."""
    d = np.diff(u.astype(_LD), prepend=_LD(0), append=_LD(0))
    return float(np.sum(d * d) / _LD(h))


def dirichlet_energy_2d(u: np.ndarray, hx: float, hy: float) -> float:
    p = np.pad(u.astype(_LD), 1)
    dx = np.diff(p[:, 1:-1], axis=0)
    dy = np.diff(p[1:-1, :], axis=1)
    ex = np.sum(dx * dx) * (_LD(hy) / _LD(hx))
    ey = np.sum(dy * dy) * (_LD(hx) / _LD(hy))
    return float(ex + ey)


# ----------------------------------------------------------------------
# linear solves


def _banded(a: float, b: float, h: float, n: int) -> np.ndarray:
    """Upper band storage of the SPD matrix a*I - b*Lap for solveh_banded."""
    inv_h2 = 1.0 / (h * h)
    ab = np.zeros((2, n))
    ab[0, 1:] = -b * inv_h2
    ab[1, :] = a + 2.0 * b * inv_h2
    return ab


def solve_helmholtz_1d(
    rhs: np.ndarray, a: float, b: float, h: float, refine: bool = False
) -> np.ndarray:
    """Direct tridiagonal solve of (a*I - b*Lap) x = rhs.

    With ``refine`` one step of mixed-precision iterative refinement is
    applied (residual in long double), pushing the achievable backward error
    well below the double-precision floor eps/h^2.  The eigensolver needs
    this at fine resolutions.
    """
    n = rhs.shape[0]
    ab = _banded(a, b, h, n)
    x = solveh_banded(ab, rhs)
    if refine:
        xl = x.astype(_LD)
        inv_h2 = _LD(1.0) / (_LD(h) * _LD(h))
        lap = np.zeros_like(xl)
        lap[:] = -2.0 * xl
        lap[:-1] += xl[1:]
        lap[1:] += xl[:-1]
        lap *= inv_h2
        r = rhs.astype(_LD) - (_LD(a) * xl - _LD(b) * lap)
        x = x + solveh_banded(ab, r.astype(np.float64))
    return x


def cg_helmholtz_2d(
    rhs: np.ndarray,
    a: float,
    b: float,
    hx: float,
    hy: float,
    tol: float,
    max_iter: int,
    x0: np.ndarray | None = None,
) -> tuple[np.ndarray, int, bool]:
    """Diagonally preconditioned CG for (a*I - b*Lap) x = rhs on a 2D grid.

    Returns (x, iterations, converged); convergence means the residual
    2-norm dropped below tol * ||rhs||_2.
    """
    diag = a + 2.0 * b / (hx * hx) + 2.0 * b / (hy * hy)
    bnorm = np.sqrt(sum_sq(rhs))
    if bnorm == 0.0:
        return np.zeros_like(rhs), 0, True
    x = np.zeros_like(rhs) if x0 is None else x0.copy()
    r = rhs - (a * x - b * laplacian_2d(x, hx, hy))
    z = r / diag
    p = z.copy()
    rz = dot(r, z)
    it = 0
    while it < max_iter:
        if np.sqrt(sum_sq(r)) <= tol * bnorm:
            return x, it, True
        q = a * p - b * laplacian_2d(p, hx, hy)
        alpha = rz / dot(p, q)
        x += alpha * p
        r -= alpha * q
        z = r / diag
        rz_new = dot(r, z)
        p = z + (rz_new / rz) * p
        rz = rz_new
        it += 1
    return x, it, bool(np.sqrt(sum_sq(r)) <= tol * bnorm)


# ----------------------------------------------------------------------
# eigen residuals (long-double stencil: the double-precision floor of
# eps/h^2 would otherwise dominate the residual at n ~ 2000)


def eigen_residual_1d(phi: np.ndarray, lam: float, h: float) -> float:
    """max |Lap(phi) + lam * phi| evaluated in extended precision."""
    x = phi.astype(_LD)
    s = np.zeros_like(x)
    s[:] = -2.0 * x
    s[:-1] += x[1:]
    s[1:] += x[:-1]
    s /= _LD(h) * _LD(h)
    s += _LD(lam) * x
    return float(np.max(np.abs(s))) if s.size else 0.0


def eigen_residual_2d(phi: np.ndarray, lam: float, hx: float, hy: float) -> float:
    x = phi.astype(_LD)
    p = np.pad(x, 1)
    s = (p[:-2, 1:-1] - 2.0 * x + p[2:, 1:-1]) / (_LD(hx) * _LD(hx))
    s += (p[1:-1, :-2] - 2.0 * x + p[1:-1, 2:]) / (_LD(hy) * _LD(hy))
    s += _LD(lam) * x
    return float(np.max(np.abs(s))) if s.size else 0.0


# ----------------------------------------------------------------------
# nonlinearity evaluation


def _pow_signed(u: np.ndarray, p: float) -> np.ndarray:
    """u**p, extended to negative u.

    For integral p this is the plain formula; otherwise the odd extension
    -|u|**p keeps the evaluation finite when a solver iterate dips a few
    ulp below zero.
    """
    if float(p).is_integer():
        return u**p
    ap = np.abs(u) ** p
    return np.where(u >= 0.0, ap, -ap)


def eval_f_arr(kind: int, par: np.ndarray, u: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == KIND_POWER:
            return _pow_signed(u, par[0])
        if kind == KIND_POWER_LINEAR:
            return _pow_signed(u, par[0]) + par[1] * u
        if kind == KIND_EXPM1:
            return np.expm1(u)
        if kind == KIND_POLY:
            out = np.zeros_like(u)
            for c in par[::-1]:
                out = u * (c + out)
            return out
    raise ValueError(f"unknown nonlinearity kind {kind}")


def eval_F_arr(kind: int, par: np.ndarray, u: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        if kind == KIND_POWER:
            q = par[0] + 1.0
            if float(par[0]).is_integer():
                return u**q / q
            return np.abs(u) ** q / q
        if kind == KIND_POWER_LINEAR:
            q = par[0] + 1.0
            if float(par[0]).is_integer():
                base = u**q / q
            else:
                base = np.abs(u) ** q / q
            return base + 0.5 * par[1] * u * u
        if kind == KIND_EXPM1:
            return np.expm1(u) - u
        if kind == KIND_POLY:
            out = np.zeros_like(u)
            for k in range(len(par) - 1, -1, -1):
                out = u * (par[k] / (k + 2.0) + out)
            return u * out
    raise ValueError(f"unknown nonlinearity kind {kind}")


# ----------------------------------------------------------------------
# IMEX stepping: (I - dt*Lap) u_new = u + dt * f(u)


def imex_step_1d(
    u: np.ndarray, dt: float, h: float, kind: int, par: np.ndarray
) -> tuple[np.ndarray, bool]:
    fu = eval_f_arr(kind, par, u)
    rhs = u + dt * fu
    if not np.isfinite(rhs).all():
        return u, False
    out = solve_helmholtz_1d(rhs, 1.0, dt, h)
    return out, bool(np.isfinite(out).all())


def imex_advance_1d(
    u: np.ndarray, dt: float, h: float, kind: int, par: np.ndarray
) -> tuple[np.ndarray, float, bool]:
    """One adaptive step: full step vs two half steps.

    Returns (u_new, rel_err, ok) where u_new is the two-half-step result and
    rel_err = ||full - halves||_inf / max(1, ||halves||_inf).
    """
    full, ok = imex_step_1d(u, dt, h, kind, par)
    if not ok:
        return u, np.inf, False
    mid, ok = imex_step_1d(u, 0.5 * dt, h, kind, par)
    if not ok:
        return u, np.inf, False
    out, ok = imex_step_1d(mid, 0.5 * dt, h, kind, par)
    if not ok:
        return u, np.inf, False
    err = sup_norm(full - out) / max(1.0, sup_norm(out))
    return out, err, True


def imex_step_2d(
    u: np.ndarray,
    dt: float,
    hx: float,
    hy: float,
    kind: int,
    par: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, bool, int]:
    fu = eval_f_arr(kind, par, u.reshape(-1)).reshape(u.shape)
    rhs = u + dt * fu
    if not np.isfinite(rhs).all():
        return u, False, 0
    out, iters, conv = cg_helmholtz_2d(rhs, 1.0, dt, hx, hy, tol, max_iter, x0=u)
    ok = conv and bool(np.isfinite(out).all())
    return out, ok, iters


def imex_advance_2d(
    u: np.ndarray,
    dt: float,
    hx: float,
    hy: float,
    kind: int,
    par: np.ndarray,
    tol: float,
    max_iter: int,
) -> tuple[np.ndarray, float, bool, int]:
    full, ok, it1 = imex_step_2d(u, dt, hx, hy, kind, par, tol, max_iter)
    if not ok:
        return u, np.inf, False, it1
    mid, ok, it2 = imex_step_2d(u, 0.5 * dt, hx, hy, kind, par, tol, max_iter)
    if not ok:
        return u, np.inf, False, it1 + it2
    out, ok, it3 = imex_step_2d(mid, 0.5 * dt, hx, hy, kind, par, tol, max_iter)
    iters = it1 + it2 + it3
    if not ok:
        return u, np.inf, False, iters
    err = sup_norm(full - out) / max(1.0, sup_norm(out))
    return out, err, True, iters
