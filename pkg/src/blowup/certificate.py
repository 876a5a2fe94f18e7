"""Blow-up certificate: initial energy, the constants xi and M, and the
resulting upper bound on the blow-up time.

The certificate is admissible exactly when the source condition holds (with
the beta/eigenvalue coupling) and the initial energy

    J(0) = -1/2 * dirichlet_energy(u0) + integrate(F(u0) - gamma)

is strictly positive.  The gamma term uses the same quadrature as every
other integral (so integrate(1) < |domain|, by design): J(0) here is
exactly the J the evolution monitors, which keeps the monitored inequality
chain consistent to round-off.

With xi = sqrt(alpha/2) - 1 and

    M = [alpha/(alpha-2) * (1 + sqrt(alpha/2)) * mass0^2] / (2 alpha J(0)),
    mass0 = integrate(u0^2),

the blow-up time obeys 0 < T* <= M / (xi * mass0).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConditionCViolated, NegativeInitialData
from .grid import Field, Grid, dirichlet_energy, integrate, quadrature_measure
from .nonlinearity import (
    ConditionParams,
    Nonlinearity,
    check_condition_C,
)


@dataclass(frozen=True)
class Certificate:
    """Certificate fields; M and T_star are None when not admissible."""

    J0: float
    params: ConditionParams
    xi: float
    mass0: float
    M: float | None
    T_star: float | None
    admissible: bool


def initial_energy_J0(grid: Grid, u0: Field, nl: Nonlinearity, gamma: float) -> float:
    """Initial energy J(0); positive values certify blow-up."""
    if float(u0.values.min()) < 0:
        raise NegativeInitialData("initial data must be nonnegative at every node")
    bulk = integrate(grid, Field(grid, nl.F(u0.values)))
    return -0.5 * dirichlet_energy(grid, u0) + bulk - gamma * quadrature_measure(grid)


def remark_constant_M(alpha: float, mass0: float, J0: float) -> float:
    """The explicit M that closes the concavity inequality."""
    if J0 <= 0:
        raise ValueError("M is only defined for positive initial energy")
    xi1 = 1.0 + math.sqrt(alpha / 2.0)
    return (alpha / (alpha - 2.0)) * xi1 * mass0 * mass0 / (2.0 * alpha * J0)


def blow_up_certificate(
    grid: Grid,
    u0: Field,
    nl: Nonlinearity,
    params: ConditionParams,
    lambda0: float,
    u_max: float = 1e6,
    n_samples: int = 4096,
    base: float = 1.01,
) -> Certificate:
    """Validate the params and evaluate the certificate on the given data.

    Parameter failures raise (they are usage errors); J0 <= 0 is a
    well-formed non-admissible certificate, not an error.
    """
    verdict = check_condition_C(nl, params, lambda0, u_max, n_samples, base)
    if not verdict.satisfied:
        raise ConditionCViolated(
            f"(alpha, beta, gamma) = ({params.alpha:g}, {params.beta:g}, "
            f"{params.gamma:g}) fail the source condition; worst margin "
            f"{verdict.worst_margin:g}"
            + (f" at u = {verdict.witness_u:g}" if verdict.witness_u is not None else "")
        )
    J0 = initial_energy_J0(grid, u0, nl, params.gamma)
    mass0 = integrate(grid, Field(grid, u0.values * u0.values))
    xi = math.sqrt(params.alpha / 2.0) - 1.0
    if J0 > 0:
        M = remark_constant_M(params.alpha, mass0, J0)
        return Certificate(J0, params, xi, mass0, M, M / (xi * mass0), True)
    return Certificate(J0, params, xi, mass0, None, None, False)
