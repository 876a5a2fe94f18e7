"""Time integration of u_t = Lap(u) + f(u) to numerical blow-up, with
monitors for every functional in the energy argument.

Scheme: first-order IMEX, diffusion implicit (unconditionally stable
linear part), source explicit.  The step size follows the local Lipschitz
scale of f, dt = safety * dt0 / (1 + f'(sup|u|)), and a step-doubling
error estimate halves dt whenever the relative local error exceeds 1e-4.
Overflow in f is a blow-up signal, never an exception escaping the run:
the driver halves dt and, once dt underflows, reports the run as
blow-up-suspected.

Monitored series, recorded every ``record_every`` accepted steps and at
termination:

* l2_mass(t) = integrate(u^2), which is I'(t);
* J(t) by direct evaluation and as J(0) + int_0^t integrate(u_t^2) ds,
  with u_t the per-step difference quotient (left-endpoint in time);
* I(t) = int_0^t integrate(u^2) ds + M, accumulated by the trapezoid rule
  in time so its centered difference matches l2_mass to second order;
* the concavity defect I''(t) I(t) - (1 + xi) I'(t)^2, the quantity whose
  positivity forces finite-time escape.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import backends
from .errors import (
    InsufficientRecords,
    NegativeInitialData,
    NonFiniteState,
    ValidationError,
)
from .grid import Field, Grid, dirichlet_energy, integrate, quadrature_measure
from .nonlinearity import Nonlinearity

REL_ERR_TOL = 1e-4
_CG_TOL = 1e-12
_CG_MAX_ITER = 100_000


@dataclass(frozen=True)
class SolverConfig:
    dt0: float
    t_max: float
    blowup_threshold: float = 1e8
    dt_min: float = 1e-14
    safety: float = 0.5
    record_every: int = 50
    diffusion: bool = True  # False switches off coupling: the per-node ODE test hook

    def __post_init__(self) -> None:
        if not (self.dt0 > 0 and math.isfinite(self.dt0)):
            raise ValidationError(f"dt0 must be positive, got {self.dt0}")
        if not (0 < self.dt_min < self.dt0):
            raise ValidationError("need 0 < dt_min < dt0")
        if not (self.t_max > 0):
            raise ValidationError(f"t_max must be positive, got {self.t_max}")
        if not (self.blowup_threshold > 0):
            raise ValidationError("blow-up threshold must be positive")
        if not (0 < self.safety <= 1):
            raise ValidationError(f"safety must lie in (0, 1], got {self.safety}")
        if self.record_every < 1:
            raise ValidationError("record_every must be at least 1")


@dataclass(frozen=True)
class BlewUp:
    t_obs: float


@dataclass(frozen=True)
class Survived:
    t_end: float


@dataclass(frozen=True)
class StepUnderflow:
    """dt sank below dt_min; reported as blow-up-suspected."""

    t: float


Outcome = Union[BlewUp, Survived, StepUnderflow]


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    sup_norm: np.ndarray
    l2_mass: np.ndarray
    J_series: np.ndarray
    Jtt_series: np.ndarray
    I_series: np.ndarray
    outcome: Outcome
    M: float
    n_steps: int
    worst_dip: float  # most negative nodal value seen, relative to sup|u|

    def __post_init__(self) -> None:
        for name in ("times", "sup_norm", "l2_mass", "J_series", "Jtt_series", "I_series"):
            arr = np.asarray(getattr(self, name), dtype=np.float64)
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    @property
    def blew_up(self) -> bool:
        return isinstance(self.outcome, BlewUp)


def monitor_J(grid: Grid, u: Field, nl: Nonlinearity, gamma: float) -> float:
    """J(u) = -1/2 * dirichlet_energy(u) + integrate(F(u) - gamma)."""
    bulk = integrate(grid, Field(grid, nl.F(u.values)))
    return -0.5 * dirichlet_energy(grid, u) + bulk - gamma * quadrature_measure(grid)


def step_imex(grid: Grid, u: Field, nl: Nonlinearity, dt: float, diffusion: bool = True) -> Field:
    """One IMEX step: solve (I - dt*Lap) u_new = u + dt f(u)."""
    if not (dt > 0 and math.isfinite(dt)):
        raise ValidationError(f"dt must be positive, got {dt}")
    kern = backends.active()
    kind, par = nl.kernel_code()
    if not diffusion:
        out, ok = _euler_step(kern, kind, par, u.values, dt)
    elif grid.ndim == 1:
        out, ok = kern.imex_step_1d(u.values, dt, grid.spacing[0], kind, par)
    else:
        out, ok, _ = kern.imex_step_2d(
            u.values, dt, grid.spacing[0], grid.spacing[1], kind, par, _CG_TOL, _CG_MAX_ITER
        )
    if not ok:
        raise NonFiniteState("source term overflowed during the step")
    return Field(grid, out)


def _euler_step(kern, kind, par, u: np.ndarray, dt: float):
    fu = kern.eval_f_arr(kind, par, np.ravel(u)).reshape(u.shape)
    out = u + dt * fu
    return out, bool(np.isfinite(out).all())


def _euler_advance(kern, kind, par, u: np.ndarray, dt: float):
    full, ok = _euler_step(kern, kind, par, u, dt)
    if ok:
        mid, ok = _euler_step(kern, kind, par, u, 0.5 * dt)
    if ok:
        out, ok = _euler_step(kern, kind, par, mid, 0.5 * dt)
    if not ok:
        return u, np.inf, False
    err = kern.sup_norm(full - out) / max(1.0, kern.sup_norm(out))
    return out, err, True


def run_until_blowup(
    grid: Grid,
    u0: Field,
    nl: Nonlinearity,
    config: SolverConfig,
    M: float,
    gamma: float = 0.0,
) -> Trajectory:
    """Integrate until blow-up, t_max, or step underflow.

    ``gamma`` feeds the J monitors (it shifts J by a constant), ``M`` the
    I monitor.  All terminal states are values, never exceptions.
    """
    if float(u0.values.min()) < 0:
        raise NegativeInitialData("initial data must be nonnegative at every node")
    kern = backends.active()
    kind, par = nl.kernel_code()
    cell = math.prod(grid.spacing)
    h = grid.spacing[0]

    u = u0.values.copy()
    sup = kern.sup_norm(u)
    if sup >= config.blowup_threshold:
        raise ValidationError("blow-up threshold must exceed the initial sup norm")
    t = 0.0
    l2 = cell * kern.sum_sq(np.ravel(u))
    accum_u2 = 0.0  # int_0^t integrate(u^2), trapezoid in time
    accum_ut2 = 0.0  # int_0^t integrate(u_t^2), left endpoint in time
    J_at_0 = monitor_J(grid, u0, nl, gamma)
    worst_dip = 0.0
    n_steps = 0

    times: list[float] = []
    sups: list[float] = []
    l2s: list[float] = []
    J_direct: list[float] = []
    J_accum: list[float] = []
    I_vals: list[float] = []

    def record() -> None:
        times.append(t)
        sups.append(sup)
        l2s.append(l2)
        J_direct.append(monitor_J(grid, Field(grid, u), nl, gamma) if n_steps else J_at_0)
        J_accum.append(J_at_0 + accum_ut2)
        I_vals.append(accum_u2 + M)

    record()
    outcome: Outcome | None = None
    while outcome is None:
        if sup >= config.blowup_threshold:
            outcome = BlewUp(t)
            break
        if t >= config.t_max * (1.0 - 1e-12):
            outcome = Survived(t)
            break
        lip = nl.fprime(sup)
        dt = config.safety * config.dt0 / (1.0 + lip) if math.isfinite(lip) else 0.0
        dt = min(dt, config.t_max - t)
        while True:
            if dt < config.dt_min:
                outcome = StepUnderflow(t)
                break
            if not config.diffusion:
                u_new, rel_err, ok = _euler_advance(kern, kind, par, u, dt)
            elif grid.ndim == 1:
                u_new, rel_err, ok = kern.imex_advance_1d(u, dt, h, kind, par)
            else:
                u_new, rel_err, ok, _ = kern.imex_advance_2d(
                    u, dt, h, grid.spacing[1], kind, par, _CG_TOL, _CG_MAX_ITER
                )
            if ok and rel_err <= REL_ERR_TOL:
                break
            dt *= 0.5
        if outcome is not None:
            break

        du = np.ravel(u_new) - np.ravel(u)
        accum_ut2 += cell * kern.sum_sq(du) / dt
        l2_new = cell * kern.sum_sq(np.ravel(u_new))
        accum_u2 += 0.5 * dt * (l2 + l2_new)
        u = u_new
        t += dt
        l2 = l2_new
        sup = kern.sup_norm(u)
        mn = kern.min_value(u)
        if mn < 0 and sup > 0:
            worst_dip = min(worst_dip, mn / sup)
        n_steps += 1
        if n_steps % config.record_every == 0:
            record()

    if not times or times[-1] != t:
        record()
    return Trajectory(
        np.array(times),
        np.array(sups),
        np.array(l2s),
        np.array(J_direct),
        np.array(J_accum),
        np.array(I_vals),
        outcome,
        M,
        n_steps,
        worst_dip,
    )


def _second_derivative_I(traj: Trajectory) -> np.ndarray:
    """I'' at interior records: centered first derivative of l2_mass (= I').

    Three-point formula, second-order accurate on the nonuniform record
    times.
    """
    t = traj.times
    if t.size < 3:
        raise InsufficientRecords("need at least 3 recorded samples")
    ip = traj.l2_mass
    dt_f = t[2:] - t[1:-1]
    dt_b = t[1:-1] - t[:-2]
    return (
        dt_b * dt_b * ip[2:] + (dt_f * dt_f - dt_b * dt_b) * ip[1:-1] - dt_f * dt_f * ip[:-2]
    ) / (dt_f * dt_b * (dt_f + dt_b))


def concavity_defect(traj: Trajectory, xi: float) -> np.ndarray:
    """d_k = I''(t_k) I(t_k) - (1+xi) I'(t_k)^2 at interior recorded times.

    I' is the recorded l2_mass; I'' comes from centered differences of
    l2_mass on the (nonuniform) record times.  Positive defects are the
    discrete trace of the concavity inequality.
    """
    ipp = _second_derivative_I(traj)
    ip = traj.l2_mass
    return ipp * traj.I_series[1:-1] - (1.0 + xi) * ip[1:-1] ** 2


def minimal_concavity_M(traj: Trajectory, xi: float) -> float:
    """Smallest M >= 0 keeping every interior concavity defect nonnegative.

    Diagnostic companion to the explicit certificate constant: the defect is
    affine in M with slope I''(t_k), so the minimum is a max of ratios.
    Returns inf when some record has nonpositive I'' but a positive
    requirement.
    """
    ipp = _second_derivative_I(traj)
    ip = traj.l2_mass
    area = traj.I_series[1:-1] - traj.M
    need = (1.0 + xi) * ip[1:-1] ** 2 - ipp * area
    m_min = 0.0
    for k in range(need.size):
        if ipp[k] > 0:
            m_min = max(m_min, need[k] / ipp[k])
        elif need[k] > 0:
            return math.inf
    return m_min


def export_trajectory_csv(traj: Trajectory, xi: float, path) -> None:
    """Write the monitor series as CSV, full (17 significant digit) precision.

    The concavity defect is undefined at the first and last record and is
    written as nan there.
    """
    defect = np.full(traj.times.size, np.nan)
    if traj.times.size >= 3:
        defect[1:-1] = concavity_defect(traj, xi)
    cols = (
        traj.times,
        traj.sup_norm,
        traj.l2_mass,
        traj.J_series,
        traj.Jtt_series,
        traj.I_series,
        defect,
    )
    with open(path, "w", newline="") as fh:
        fh.write("t,sup_norm,l2_mass,J_direct,J_accumulated,I,concavity_defect\n")
        for row in zip(*cols):
            fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
