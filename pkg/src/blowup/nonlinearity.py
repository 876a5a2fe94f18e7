"""Source terms f with exact antiderivatives F, and the structural
growth conditions that certify blow-up.

The central object is the margin of the eigenvalue-aware condition

    m(u) = u f(u) + beta u^2 + gamma - alpha F(u),   u > 0,

which must be nonnegative for all u > 0, with the coupling
0 < beta <= (alpha - 2) lambda0 / 2 to the principal Dirichlet eigenvalue.
The two classical conditions it relaxes are the homogeneous form
(2+eps) F <= u f and its additive relaxation (2+eps) F <= u f + c^2; both
are decided by the same machinery with (alpha, beta, gamma) =
(2+eps, 0, 0) and (2+eps, 0, c^2).

Deciding an inequality over all u > 0 numerically combines two views:

* dense log-spaced sampling on (0, u_max], which catches mid-range dips;
* a closed-form comparison of leading growth, which catches tail failures
  beyond any finite sample.

For the power-sum families the margin is assembled term by term with
pre-merged coefficients (e.g. 1 - alpha/(p+1) for the u^{p+1} term), so
boundary cases like alpha = p + 1 evaluate to an exact zero coefficient
instead of a catastrophically cancelled difference of huge numbers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import backends
from .errors import (
    BetaConstraintViolated,
    InvalidSampleRange,
    ValidationError,
)

_POSITIVITY_SAMPLES = np.geomspace(1e-8, 1e8, 33)

KIND_POWER = 0
KIND_POWER_LINEAR = 1
KIND_EXPM1 = 2
KIND_POLY = 3


class NonlinearityBase:
    """Shared evaluation plumbing for the closed-form families."""

    def kernel_code(self) -> tuple[int, np.ndarray]:
        raise NotImplementedError

    def f(self, u):
        """Pointwise source term; scalar in, scalar out."""
        kind, par = self.kernel_code()
        arr = np.asarray(u, dtype=np.float64)
        out = backends.active().eval_f_arr(kind, par, np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def F(self, u):
        """Antiderivative of f with F(0) = 0, in closed form."""
        kind, par = self.kernel_code()
        arr = np.asarray(u, dtype=np.float64)
        out = backends.active().eval_F_arr(kind, par, np.atleast_1d(arr))
        return float(out[0]) if arr.ndim == 0 else out.reshape(arr.shape)

    def fprime(self, s: float) -> float:
        """Local Lipschitz scale f'(s); drives the adaptive step size."""
        raise NotImplementedError

    def _power_terms(self, alpha: float) -> list[tuple[float, float]]:
        """(exponent, coefficient) pairs of u f(u) - alpha F(u)."""
        raise NotImplementedError

    def asymptotic_cap(self) -> float | None:
        """Largest alpha with nonnegative leading margin term, None if unbounded."""
        raise NotImplementedError

    def condition_margin(self, u, alpha: float, beta: float, gamma: float):
        """m(u) = u f(u) + beta u^2 + gamma - alpha F(u), merged-term form."""
        arr = np.asarray(u, dtype=np.float64)
        out = np.full(arr.shape, gamma, dtype=np.float64)
        with np.errstate(over="ignore", invalid="ignore"):
            for expo, coef in _merge_terms(self._power_terms(alpha), beta):
                if coef != 0.0:
                    out += coef * arr**expo
        return float(out) if arr.ndim == 0 else out

    def asymptotic_ok(self, alpha: float, beta: float, gamma: float) -> bool:
        """True when the margin stays nonnegative as u -> infinity."""
        terms = [(e, c) for e, c in _merge_terms(self._power_terms(alpha), beta) if c != 0.0]
        if not terms:
            return gamma >= 0.0
        return max(terms)[1] > 0.0

    def _positivity_check(self) -> None:
        with np.errstate(over="ignore", invalid="ignore"):
            vals = np.atleast_1d(self.f(_POSITIVITY_SAMPLES))
        if np.isnan(vals).any() or (vals <= 0).any():
            bad = _POSITIVITY_SAMPLES[np.flatnonzero(~(vals > 0))[0]]
            raise ValidationError(f"source term must be positive for u > 0; fails near u = {bad:g}")


def _merge_terms(
    terms: list[tuple[float, float]], beta: float
) -> list[tuple[float, float]]:
    merged: dict[float, float] = {}
    for expo, coef in terms + [(2.0, beta)]:
        merged[expo] = merged.get(expo, 0.0) + coef
    return sorted(merged.items())


@dataclass(frozen=True)
class Power(NonlinearityBase):
    """f(u) = u^p with p > 1; F(u) = u^(p+1)/(p+1)."""

    p: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", float(self.p))
        if not (math.isfinite(self.p) and self.p > 1):
            raise ValidationError(f"power exponent must exceed 1, got {self.p}")
        self._positivity_check()

    def kernel_code(self):
        return KIND_POWER, np.array([self.p], dtype=np.float64)

    def fprime(self, s: float) -> float:
        with np.errstate(over="ignore"):
            return float(self.p * np.float64(s) ** (self.p - 1.0))

    def _power_terms(self, alpha):
        return [(self.p + 1.0, 1.0 - alpha / (self.p + 1.0))]

    def asymptotic_cap(self):
        return self.p + 1.0

    def describe(self) -> str:
        return f"u^{self.p:g}"


@dataclass(frozen=True)
class PowerPlusLinear(NonlinearityBase):
    """f(u) = u^p + a*u with p > 1, a >= 0."""

    p: float
    a: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "p", float(self.p))
        object.__setattr__(self, "a", float(self.a))
        if not (math.isfinite(self.p) and self.p > 1):
            raise ValidationError(f"power exponent must exceed 1, got {self.p}")
        if not (math.isfinite(self.a) and self.a >= 0):
            raise ValidationError(f"linear coefficient must be nonnegative, got {self.a}")
        self._positivity_check()

    def kernel_code(self):
        return KIND_POWER_LINEAR, np.array([self.p, self.a], dtype=np.float64)

    def fprime(self, s: float) -> float:
        with np.errstate(over="ignore"):
            return float(self.p * np.float64(s) ** (self.p - 1.0) + self.a)

    def _power_terms(self, alpha):
        # u f = u^{p+1} + a u^2, alpha F = alpha u^{p+1}/(p+1) + alpha a u^2 / 2
        return [
            (self.p + 1.0, 1.0 - alpha / (self.p + 1.0)),
            (2.0, self.a - alpha * self.a / 2.0),
        ]

    def asymptotic_cap(self):
        return self.p + 1.0

    def describe(self) -> str:
        return f"u^{self.p:g} + {self.a:g}*u"


@dataclass(frozen=True)
class ExpMinusOne(NonlinearityBase):
    """f(u) = exp(u) - 1; F(u) = exp(u) - 1 - u."""

    def kernel_code(self):
        return KIND_EXPM1, np.empty(0, dtype=np.float64)

    def fprime(self, s: float) -> float:
        with np.errstate(over="ignore"):
            return float(np.exp(np.float64(s)))

    def condition_margin(self, u, alpha, beta, gamma):
        # u f - alpha F = (u - alpha) e^u + (alpha - 1) u + alpha; grouping
        # through e^u keeps the evaluation stable for u >> 1.
        arr = np.asarray(u, dtype=np.float64)
        with np.errstate(over="ignore", invalid="ignore"):
            out = (
                (arr - alpha) * np.exp(arr)
                + beta * arr * arr
                + (alpha - 1.0) * arr
                + alpha
                + gamma
            )
        return float(out) if arr.ndim == 0 else out

    def asymptotic_ok(self, alpha, beta, gamma):
        # (u - alpha) e^u dominates every fixed alpha
        return True

    def asymptotic_cap(self):
        return None

    def describe(self) -> str:
        return "exp(u) - 1"


@dataclass(frozen=True)
class Polynomial(NonlinearityBase):
    """f(u) = sum_k c_k u^k for k = 1..d, nonnegative leading coefficient.

    The all-zero coefficient vector is accepted as the documented f = 0
    surrogate (pure diffusion) used by solver tests; the positivity
    requirement applies to every other instance.
    """

    coeffs: tuple[float, ...]

    def __post_init__(self) -> None:
        cs = tuple(float(c) for c in self.coeffs)
        object.__setattr__(self, "coeffs", cs)
        if len(cs) == 0:
            raise ValidationError("polynomial needs at least one coefficient")
        if not all(math.isfinite(c) for c in cs):
            raise ValidationError("polynomial coefficients must be finite")
        if cs[-1] < 0:
            raise ValidationError(f"leading coefficient must be nonnegative, got {cs[-1]}")
        if any(c != 0.0 for c in cs):
            self._positivity_check()

    def kernel_code(self):
        return KIND_POLY, np.array(self.coeffs, dtype=np.float64)

    def fprime(self, s: float) -> float:
        acc = 0.0
        with np.errstate(over="ignore"):
            for k in range(len(self.coeffs), 0, -1):
                acc = acc * s + k * self.coeffs[k - 1]
        return float(acc)

    def _power_terms(self, alpha):
        return [
            (k + 1.0, c * (1.0 - alpha / (k + 1.0)))
            for k, c in enumerate(self.coeffs, start=1)
        ]

    def asymptotic_cap(self):
        degree = max((k for k, c in enumerate(self.coeffs, start=1) if c != 0.0), default=None)
        return None if degree is None else degree + 1.0

    def describe(self) -> str:
        parts = [f"{c:g}*u^{k}" for k, c in enumerate(self.coeffs, start=1) if c != 0.0]
        return " + ".join(parts) if parts else "0"


Nonlinearity = Union[Power, PowerPlusLinear, ExpMinusOne, Polynomial]


def eval_f(nl: Nonlinearity, u):
    return nl.f(u)


def eval_F(nl: Nonlinearity, u):
    return nl.F(u)


def condition_margin(nl: Nonlinearity, u, alpha: float, beta: float, gamma: float):
    """Margin u f(u) + beta u^2 + gamma - alpha F(u) at u (scalar or array)."""
    return nl.condition_margin(u, alpha, beta, gamma)


# ----------------------------------------------------------------------
# condition verdicts


@dataclass(frozen=True)
class ConditionParams:
    """Admissible parameter triple: alpha > 2, beta > 0, gamma > 0."""

    alpha: float
    beta: float
    gamma: float

    def __post_init__(self) -> None:
        for name in ("alpha", "beta", "gamma"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (math.isfinite(self.alpha) and self.alpha > 2):
            raise ValidationError(f"alpha must exceed 2, got {self.alpha}")
        if not (math.isfinite(self.beta) and self.beta > 0):
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if not (math.isfinite(self.gamma) and self.gamma > 0):
            raise ValidationError(f"gamma must be positive, got {self.gamma}")


@dataclass(frozen=True)
class ConditionVerdict:
    satisfied: bool
    worst_margin: float
    witness_u: float | None
    asymptotic_ok: bool


def _sample_points(u_max: float, n_samples: int, base: float) -> np.ndarray:
    if not (math.isfinite(u_max) and u_max > 0):
        raise InvalidSampleRange(f"u_max must be positive and finite, got {u_max}")
    if n_samples < 100:
        raise InvalidSampleRange(f"need at least 100 samples, got {n_samples}")
    if not (math.isfinite(base) and base > 1):
        raise InvalidSampleRange(f"log-spacing base must exceed 1, got {base}")
    return u_max * base ** -np.arange(n_samples - 1, -1, -1, dtype=np.float64)


def _decide(
    nl: Nonlinearity,
    alpha: float,
    beta: float,
    gamma: float,
    u_max: float,
    n_samples: int,
    base: float,
) -> ConditionVerdict:
    u = _sample_points(u_max, n_samples, base)
    m = nl.condition_margin(u, alpha, beta, gamma)
    finite = ~np.isnan(m)
    worst_idx = int(np.argmin(np.where(finite, m, np.inf)))
    worst = float(m[worst_idx])
    asym = nl.asymptotic_ok(alpha, beta, gamma)
    witness: float | None = None
    if worst < 0:
        witness = float(u[worst_idx])
    elif not asym:
        # tail failure beyond the sampled range: probe geometrically until
        # the leading (negative) term wins
        probe = u_max
        for _ in range(500):
            probe *= 2.0
            if nl.condition_margin(probe, alpha, beta, gamma) < 0:
                witness = probe
                break
    satisfied = worst >= 0 and asym
    return ConditionVerdict(satisfied, worst, witness, asym)


def check_condition_C(
    nl: Nonlinearity,
    params: ConditionParams,
    lambda0: float,
    u_max: float = 1e6,
    n_samples: int = 4096,
    base: float = 1.01,
) -> ConditionVerdict:
    """Decide the eigenvalue-aware condition for (alpha, beta, gamma).

    The coupling beta <= (alpha - 2) * lambda0 / 2 is a hard precondition:
    violating it breaks the energy inequality chain regardless of margins,
    so it rejects instead of returning an unsatisfied verdict.  The boundary
    value itself is accepted, since the chain only needs
    (alpha - 2) * lambda0 - 2 * beta >= 0.
    """
    if not (math.isfinite(lambda0) and lambda0 > 0):
        raise ValidationError(f"lambda0 must be positive, got {lambda0}")
    bound = 0.5 * (params.alpha - 2.0) * lambda0
    if params.beta > bound * (1.0 + 1e-12):
        raise BetaConstraintViolated(
            f"beta = {params.beta:g} exceeds (alpha-2)*lambda0/2 = {bound:g}"
        )
    return _decide(nl, params.alpha, params.beta, params.gamma, u_max, n_samples, base)


def check_condition_PP(
    nl: Nonlinearity,
    epsilon: float,
    u_max: float = 1e6,
    n_samples: int = 4096,
    base: float = 1.01,
) -> ConditionVerdict:
    """Homogeneous condition (2+eps) F(u) <= u f(u) for all u > 0."""
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    return _decide(nl, 2.0 + epsilon, 0.0, 0.0, u_max, n_samples, base)


def check_condition_IBB(
    nl: Nonlinearity,
    epsilon: float,
    c: float,
    u_max: float = 1e6,
    n_samples: int = 4096,
    base: float = 1.01,
) -> ConditionVerdict:
    """Relaxed condition (2+eps) F(u) <= u f(u) + c^2 for all u > 0."""
    if not (math.isfinite(epsilon) and epsilon > 0):
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    if not math.isfinite(c):
        raise ValidationError(f"constant c must be finite, got {c}")
    return _decide(nl, 2.0 + epsilon, 0.0, c * c, u_max, n_samples, base)


DEFAULT_BETA_FRACTIONS = (1.0, 0.75, 0.5, 0.25, 0.1)
DEFAULT_GAMMA_GRID = tuple(float(10.0**k) for k in range(-3, 7))


def search_condition_params(
    nl: Nonlinearity,
    lambda0: float,
    u_max: float = 1e6,
    n_samples: int = 4096,
    base: float = 1.01,
    n_alpha: int = 16,
    beta_fractions: tuple[float, ...] = DEFAULT_BETA_FRACTIONS,
    gamma_grid: tuple[float, ...] = DEFAULT_GAMMA_GRID,
    alpha_cap_unbounded: float = 8.0,
) -> ConditionParams | None:
    """Grid search for admissible (alpha, beta, gamma), None when none pass.

    Preference order: largest alpha, then largest beta, then smallest gamma.
    The alpha grid descends from the family's asymptotic cap (p+1 for pure
    powers; ``alpha_cap_unbounded`` for exponentially growing f) so the cap
    itself, where boundary cases live, is always tried first.
    """
    if not (math.isfinite(lambda0) and lambda0 > 0):
        raise ValidationError(f"lambda0 must be positive, got {lambda0}")
    cap = nl.asymptotic_cap()
    if cap is None:
        cap = alpha_cap_unbounded
    if cap <= 2:
        return None
    alphas = [cap - (cap - 2.0) * k / n_alpha for k in range(n_alpha)]
    for alpha in alphas:
        beta_bound = 0.5 * (alpha - 2.0) * lambda0
        for frac in beta_fractions:
            beta = frac * beta_bound
            if beta <= 0:
                continue
            for gamma in gamma_grid:
                params = ConditionParams(alpha, beta, gamma)
                verdict = check_condition_C(nl, params, lambda0, u_max, n_samples, base)
                if verdict.satisfied:
                    return params
    return None
