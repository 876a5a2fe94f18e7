"""Compiled kernel core (Cython twin of ``pure.py``).

Same public names, signatures, and semantics as the pure backend; see the
module docstring there for the shared conventions.  Reductions accumulate in
``long double`` so both backends sit on the same round-off floor.
"""

import numpy as np

from libc.math cimport expm1, fabs, floor, isfinite, pow, sqrt

name = "compiled"

cdef enum:
    C_POWER = 0
    C_POWER_LINEAR = 1
    C_EXPM1 = 2
    C_POLY = 3

KIND_POWER = C_POWER
KIND_POWER_LINEAR = C_POWER_LINEAR
KIND_EXPM1 = C_EXPM1
KIND_POLY = C_POLY


# ----------------------------------------------------------------------
# reductions


def ksum(const double[::1] w):
    cdef long double acc = 0.0
    cdef Py_ssize_t i
    for i in range(w.shape[0]):
        acc += w[i]
    return float(<double> acc)


def dot(const double[::1] u, const double[::1] v):
    cdef long double acc = 0.0
    cdef Py_ssize_t i
    for i in range(u.shape[0]):
        acc += <long double> u[i] * <long double> v[i]
    return float(<double> acc)


def sum_sq(const double[::1] u):
    cdef long double acc = 0.0
    cdef Py_ssize_t i
    for i in range(u.shape[0]):
        acc += <long double> u[i] * <long double> u[i]
    return float(<double> acc)


cdef double _sup(const double[::1] u) noexcept nogil:
    cdef double m = 0.0
    cdef Py_ssize_t i
    for i in range(u.shape[0]):
        if fabs(u[i]) > m:
            m = fabs(u[i])
    return m


def sup_norm(u):
    cdef const double[::1] v = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    return float(_sup(v))


def min_value(u):
    cdef const double[::1] v = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    if v.shape[0] == 0:
        return 0.0
    cdef double m = v[0]
    cdef Py_ssize_t i
    for i in range(1, v.shape[0]):
        if v[i] < m:
            m = v[i]
    return float(m)


# ----------------------------------------------------------------------
# Laplacian stencils


cdef void _lap_1d(const double[::1] u, double inv_h2, double[::1] out) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    if n == 1:
        out[0] = -2.0 * u[0] * inv_h2
        return
    out[0] = (u[1] - 2.0 * u[0]) * inv_h2
    for i in range(1, n - 1):
        out[i] = (u[i - 1] - 2.0 * u[i] + u[i + 1]) * inv_h2
    out[n - 1] = (u[n - 2] - 2.0 * u[n - 1]) * inv_h2


def laplacian_1d(const double[::1] u, double h):
    out = np.empty(u.shape[0], dtype=np.float64)
    cdef double[::1] ov = out
    _lap_1d(u, 1.0 / (h * h), ov)
    return out


cdef void _lap_2d(const double[:, ::1] u, double inv_hx2, double inv_hy2,
                  double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    cdef double c
    for i in range(nx):
        for j in range(ny):
            c = -2.0 * u[i, j] * (inv_hx2 + inv_hy2)
            if i > 0:
                c += u[i - 1, j] * inv_hx2
            if i < nx - 1:
                c += u[i + 1, j] * inv_hx2
            if j > 0:
                c += u[i, j - 1] * inv_hy2
            if j < ny - 1:
                c += u[i, j + 1] * inv_hy2
            out[i, j] = c


def laplacian_2d(const double[:, ::1] u, double hx, double hy):
    out = np.empty((u.shape[0], u.shape[1]), dtype=np.float64)
    cdef double[:, ::1] ov = out
    _lap_2d(u, 1.0 / (hx * hx), 1.0 / (hy * hy), ov)
    return out


def dirichlet_energy_1d(const double[::1] u, double h):
    cdef long double acc = 0.0, d
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    d = u[0]
    acc += d * d
    for i in range(n - 1):
        d = <long double> u[i + 1] - <long double> u[i]
        acc += d * d
    d = u[n - 1]
    acc += d * d
    return float(<double> (acc / <long double> h))


def dirichlet_energy_2d(const double[:, ::1] u, double hx, double hy):
    cdef long double ex = 0.0, ey = 0.0, d
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    cdef Py_ssize_t i, j
    for j in range(ny):
        d = u[0, j]
        ex += d * d
        for i in range(nx - 1):
            d = <long double> u[i + 1, j] - <long double> u[i, j]
            ex += d * d
        d = u[nx - 1, j]
        ex += d * d
    for i in range(nx):
        d = u[i, 0]
        ey += d * d
        for j in range(ny - 1):
            d = <long double> u[i, j + 1] - <long double> u[i, j]
            ey += d * d
        d = u[i, ny - 1]
        ey += d * d
    return float(<double> (ex * (<long double> hy / <long double> hx)
                           + ey * (<long double> hx / <long double> hy)))


# ----------------------------------------------------------------------
# linear solves


cdef void _thomas(double diag, double off, const double[::1] rhs, double[::1] x,
                  double[::1] w) noexcept nogil:
    # Constant-coefficient tridiagonal solve; stable without pivoting
    # because the matrix is a symmetric M-matrix.
    cdef Py_ssize_t n = rhs.shape[0]
    cdef Py_ssize_t i
    cdef double denom = diag
    x[0] = rhs[0] / denom
    w[0] = off / denom
    for i in range(1, n):
        denom = diag - off * w[i - 1]
        x[i] = (rhs[i] - off * x[i - 1]) / denom
        w[i] = off / denom
    for i in range(n - 2, -1, -1):
        x[i] -= w[i] * x[i + 1]


def solve_helmholtz_1d(const double[::1] rhs, double a, double b, double h,
                       bint refine=False):
    cdef Py_ssize_t n = rhs.shape[0]
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double diag = a + 2.0 * b * inv_h2
    cdef double off = -b * inv_h2
    x_arr = np.empty(n, dtype=np.float64)
    w_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] x = x_arr
    cdef double[::1] w = w_arr
    _thomas(diag, off, rhs, x, w)
    if not refine:
        return x_arr
    # one step of mixed-precision iterative refinement
    r_arr = np.empty(n, dtype=np.float64)
    d_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] r = r_arr
    cdef double[::1] d = d_arr
    cdef long double lap, ax
    cdef long double la = a, lb = b, lih2 = <long double> 1.0 / (<long double> h * <long double> h)
    cdef Py_ssize_t i
    for i in range(n):
        lap = -2.0 * <long double> x[i]
        if i > 0:
            lap += x[i - 1]
        if i < n - 1:
            lap += x[i + 1]
        ax = la * <long double> x[i] - lb * lap * lih2
        r[i] = <double> (<long double> rhs[i] - ax)
    _thomas(diag, off, r, d, w)
    for i in range(n):
        x[i] += d[i]
    return x_arr


cdef void _apply_helmholtz_2d(const double[:, ::1] x, double a, double b,
                              double inv_hx2, double inv_hy2,
                              double[:, ::1] out) noexcept nogil:
    cdef Py_ssize_t nx = x.shape[0], ny = x.shape[1]
    cdef Py_ssize_t i, j
    cdef double lap
    for i in range(nx):
        for j in range(ny):
            lap = -2.0 * x[i, j] * (inv_hx2 + inv_hy2)
            if i > 0:
                lap += x[i - 1, j] * inv_hx2
            if i < nx - 1:
                lap += x[i + 1, j] * inv_hx2
            if j > 0:
                lap += x[i, j - 1] * inv_hy2
            if j < ny - 1:
                lap += x[i, j + 1] * inv_hy2
            out[i, j] = a * x[i, j] - b * lap


cdef long double _dot2(const double[:, ::1] u, const double[:, ::1] v) noexcept nogil:
    cdef long double acc = 0.0
    cdef Py_ssize_t i, j
    for i in range(u.shape[0]):
        for j in range(u.shape[1]):
            acc += <long double> u[i, j] * <long double> v[i, j]
    return acc


def cg_helmholtz_2d(const double[:, ::1] rhs, double a, double b, double hx,
                    double hy, double tol, int max_iter, x0=None):
    cdef Py_ssize_t nx = rhs.shape[0], ny = rhs.shape[1]
    cdef double inv_hx2 = 1.0 / (hx * hx)
    cdef double inv_hy2 = 1.0 / (hy * hy)
    cdef double diag = a + 2.0 * b * inv_hx2 + 2.0 * b * inv_hy2

    cdef long double bnorm2 = _dot2(rhs, rhs)
    x_arr = np.zeros((nx, ny), dtype=np.float64)
    if bnorm2 == 0.0:
        return x_arr, 0, True
    if x0 is not None:
        x_arr[...] = x0

    r_arr = np.empty((nx, ny), dtype=np.float64)
    z_arr = np.empty((nx, ny), dtype=np.float64)
    p_arr = np.empty((nx, ny), dtype=np.float64)
    q_arr = np.empty((nx, ny), dtype=np.float64)
    cdef double[:, ::1] x = x_arr, r = r_arr, z = z_arr, p = p_arr, q = q_arr

    cdef Py_ssize_t i, j
    cdef int it = 0
    cdef long double rz, rz_new, rr, alpha, beta
    cdef double thresh2
    thresh2 = tol * tol * <double> bnorm2

    with nogil:
        _apply_helmholtz_2d(x, a, b, inv_hx2, inv_hy2, q)
        rz = 0.0
        for i in range(nx):
            for j in range(ny):
                r[i, j] = rhs[i, j] - q[i, j]
                z[i, j] = r[i, j] / diag
                p[i, j] = z[i, j]
                rz += <long double> r[i, j] * <long double> z[i, j]
        while it < max_iter:
            rr = _dot2(r, r)
            if <double> rr <= thresh2:
                break
            _apply_helmholtz_2d(p, a, b, inv_hx2, inv_hy2, q)
            alpha = rz / _dot2(p, q)
            rz_new = 0.0
            for i in range(nx):
                for j in range(ny):
                    x[i, j] += <double> alpha * p[i, j]
                    r[i, j] -= <double> alpha * q[i, j]
                    z[i, j] = r[i, j] / diag
                    rz_new += <long double> r[i, j] * <long double> z[i, j]
            beta = rz_new / rz
            rz = rz_new
            for i in range(nx):
                for j in range(ny):
                    p[i, j] = z[i, j] + <double> beta * p[i, j]
            it += 1
        rr = _dot2(r, r)
    return x_arr, it, bool(<double> rr <= thresh2)


# ----------------------------------------------------------------------
# eigen residuals


def eigen_residual_1d(const double[::1] phi, double lam, double h):
    cdef long double lih2 = <long double> 1.0 / (<long double> h * <long double> h)
    cdef long double llam = lam
    cdef long double s, m = 0.0
    cdef Py_ssize_t n = phi.shape[0]
    cdef Py_ssize_t i
    for i in range(n):
        s = -2.0 * <long double> phi[i]
        if i > 0:
            s += phi[i - 1]
        if i < n - 1:
            s += phi[i + 1]
        s = s * lih2 + llam * <long double> phi[i]
        if s < 0:
            s = -s
        if s > m:
            m = s
    return float(<double> m)


def eigen_residual_2d(const double[:, ::1] phi, double lam, double hx, double hy):
    cdef long double lihx2 = <long double> 1.0 / (<long double> hx * <long double> hx)
    cdef long double lihy2 = <long double> 1.0 / (<long double> hy * <long double> hy)
    cdef long double llam = lam
    cdef long double s, m = 0.0
    cdef Py_ssize_t nx = phi.shape[0], ny = phi.shape[1]
    cdef Py_ssize_t i, j
    for i in range(nx):
        for j in range(ny):
            s = -2.0 * <long double> phi[i, j] * (lihx2 + lihy2)
            if i > 0:
                s += <long double> phi[i - 1, j] * lihx2
            if i < nx - 1:
                s += <long double> phi[i + 1, j] * lihx2
            if j > 0:
                s += <long double> phi[i, j - 1] * lihy2
            if j < ny - 1:
                s += <long double> phi[i, j + 1] * lihy2
            s += llam * <long double> phi[i, j]
            if s < 0:
                s = -s
            if s > m:
                m = s
    return float(<double> m)


# ----------------------------------------------------------------------
# nonlinearity evaluation


cdef inline double _powsgn(double u, double p, bint p_int) noexcept nogil:
    if u >= 0.0 or p_int:
        return pow(u, p)
    return -pow(-u, p)


cdef int _f_into(int kind, const double[::1] par, const double[::1] u,
                 double[::1] out) noexcept nogil:
    # returns 0 when every output value is finite
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, k
    cdef int bad = 0
    cdef double p, acc
    cdef bint p_int
    if kind == C_POWER or kind == C_POWER_LINEAR:
        p = par[0]
        p_int = (p == floor(p))
        for i in range(n):
            acc = _powsgn(u[i], p, p_int)
            if kind == C_POWER_LINEAR:
                acc += par[1] * u[i]
            out[i] = acc
            if not isfinite(acc):
                bad = 1
    elif kind == C_EXPM1:
        for i in range(n):
            out[i] = expm1(u[i])
            if not isfinite(out[i]):
                bad = 1
    else:
        for i in range(n):
            acc = 0.0
            for k in range(par.shape[0] - 1, -1, -1):
                acc = u[i] * (par[k] + acc)
            out[i] = acc
            if not isfinite(acc):
                bad = 1
    return bad


def eval_f_arr(int kind, const double[::1] par, u):
    u_flat = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    out = np.empty_like(u_flat)
    cdef const double[::1] uv = u_flat
    cdef double[::1] ov = out
    _f_into(kind, par, uv, ov)
    return out.reshape(np.shape(u))


def eval_F_arr(int kind, const double[::1] par, u):
    u_flat = np.ascontiguousarray(u, dtype=np.float64).reshape(-1)
    out = np.empty_like(u_flat)
    cdef const double[::1] uv = u_flat
    cdef double[::1] ov = out
    cdef Py_ssize_t n = uv.shape[0]
    cdef Py_ssize_t i, k
    cdef double p, q, acc, x
    cdef bint p_int
    if kind == C_POWER or kind == C_POWER_LINEAR:
        p = par[0]
        q = p + 1.0
        p_int = (p == floor(p))
        for i in range(n):
            x = uv[i]
            if p_int:
                acc = pow(x, q) / q
            else:
                acc = pow(fabs(x), q) / q
            if kind == C_POWER_LINEAR:
                acc += 0.5 * par[1] * x * x
            ov[i] = acc
    elif kind == C_EXPM1:
        for i in range(n):
            ov[i] = expm1(uv[i]) - uv[i]
    else:
        for i in range(n):
            x = uv[i]
            acc = 0.0
            for k in range(par.shape[0] - 1, -1, -1):
                acc = x * (par[k] / (k + 2.0) + acc)
            ov[i] = x * acc
    return out.reshape(np.shape(u))


# ----------------------------------------------------------------------
# IMEX stepping


cdef int _imex_step_1d(const double[::1] u, double dt, double diag, double off,
                       int kind, const double[::1] par, double[::1] out,
                       double[::1] rhs, double[::1] w) noexcept nogil:
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i
    if _f_into(kind, par, u, rhs):
        return 1
    for i in range(n):
        rhs[i] = u[i] + dt * rhs[i]
        if not isfinite(rhs[i]):
            return 1
    _thomas(diag, off, rhs, out, w)
    for i in range(n):
        if not isfinite(out[i]):
            return 1
    return 0


def imex_step_1d(const double[::1] u, double dt, double h, int kind, const double[::1] par):
    cdef Py_ssize_t n = u.shape[0]
    cdef double inv_h2 = 1.0 / (h * h)
    out = np.empty(n, dtype=np.float64)
    rhs = np.empty(n, dtype=np.float64)
    w = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out, rv = rhs, wv = w
    cdef int bad
    with nogil:
        bad = _imex_step_1d(u, dt, 1.0 + 2.0 * dt * inv_h2, -dt * inv_h2,
                            kind, par, ov, rv, wv)
    if bad:
        return np.asarray(u).copy(), False
    return out, True


def imex_advance_1d(const double[::1] u, double dt, double h, int kind,
                    const double[::1] par):
    cdef Py_ssize_t n = u.shape[0]
    cdef double inv_h2 = 1.0 / (h * h)
    cdef double hdt = 0.5 * dt
    out = np.empty(n, dtype=np.float64)
    full = np.empty(n, dtype=np.float64)
    mid = np.empty(n, dtype=np.float64)
    rhs = np.empty(n, dtype=np.float64)
    w = np.empty(n, dtype=np.float64)
    cdef double[::1] ov = out, fv = full, mv = mid, rv = rhs, wv = w
    cdef int bad
    cdef double err = 0.0, d, m = 0.0
    cdef Py_ssize_t i
    with nogil:
        bad = _imex_step_1d(u, dt, 1.0 + 2.0 * dt * inv_h2, -dt * inv_h2,
                            kind, par, fv, rv, wv)
        if not bad:
            bad = _imex_step_1d(u, hdt, 1.0 + 2.0 * hdt * inv_h2,
                                -hdt * inv_h2, kind, par, mv, rv, wv)
        if not bad:
            bad = _imex_step_1d(mv, hdt, 1.0 + 2.0 * hdt * inv_h2,
                                -hdt * inv_h2, kind, par, ov, rv, wv)
        if not bad:
            for i in range(n):
                d = fabs(fv[i] - ov[i])
                if d > err:
                    err = d
                if fabs(ov[i]) > m:
                    m = fabs(ov[i])
            if m < 1.0:
                m = 1.0
            err = err / m
    if bad:
        return np.asarray(u).copy(), float("inf"), False
    return out, float(err), True


def imex_step_2d(const double[:, ::1] u, double dt, double hx, double hy, int kind,
                 const double[::1] par, double tol, int max_iter):
    cdef Py_ssize_t nx = u.shape[0], ny = u.shape[1]
    u_flat = np.ascontiguousarray(u).reshape(-1)
    fu = eval_f_arr(kind, par, u_flat)
    rhs = (u_flat + dt * fu).reshape(nx, ny)
    if not np.isfinite(rhs).all():
        return np.asarray(u).copy(), False, 0
    out, iters, conv = cg_helmholtz_2d(rhs, 1.0, dt, hx, hy, tol, max_iter,
                                       x0=np.asarray(u))
    ok = conv and bool(np.isfinite(out).all())
    return out, ok, iters


def imex_advance_2d(const double[:, ::1] u, double dt, double hx, double hy,
                    int kind, const double[::1] par, double tol, int max_iter):
    full, ok, it1 = imex_step_2d(u, dt, hx, hy, kind, par, tol, max_iter)
    if not ok:
        return np.asarray(u).copy(), float("inf"), False, it1
    mid, ok, it2 = imex_step_2d(u, 0.5 * dt, hx, hy, kind, par, tol, max_iter)
    if not ok:
        return np.asarray(u).copy(), float("inf"), False, it1 + it2
    cdef const double[:, ::1] mv = mid
    out, ok, it3 = imex_step_2d(mv, 0.5 * dt, hx, hy, kind, par, tol, max_iter)
    iters = it1 + it2 + it3
    if not ok:
        return np.asarray(u).copy(), float("inf"), False, iters
    err = sup_norm(np.asarray(full) - out) / max(1.0, sup_norm(out))
    return out, err, True, iters
