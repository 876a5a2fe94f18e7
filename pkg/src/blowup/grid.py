"""Spatial domains, uniform Dirichlet grids, and the discrete calculus.

A field stores interior nodal values only; the homogeneous Dirichlet
boundary is structural, so u = 0 on the boundary cannot be violated by
data.  The quadrature (``integrate``) and the edge-sum gradient energy
(``dirichlet_energy``) are paired with the central-difference Laplacian so
that the discrete integration-by-parts identity

    integrate(u * apply_laplacian(u)) == -dirichlet_energy(u)

holds to round-off, which is what makes the energy inequality chain
checkable exactly rather than up to discretization error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from . import backends
from .errors import GridMismatch, NonFiniteState, ValidationError


@dataclass(frozen=True)
class Interval:
    """The open interval (0, length)."""

    length: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.length) and self.length > 0):
            raise ValidationError(f"interval length must be positive, got {self.length}")


@dataclass(frozen=True)
class Rectangle:
    """The open rectangle (0, lx) x (0, ly)."""

    lx: float
    ly: float

    def __post_init__(self) -> None:
        for side in (self.lx, self.ly):
            if not (math.isfinite(side) and side > 0):
                raise ValidationError(f"rectangle sides must be positive, got {self.lx}, {self.ly}")


Domain = Union[Interval, Rectangle]


@dataclass(frozen=True)
class Grid:
    """Uniform grid of interior nodes; spacing h = L/(n+1) per axis."""

    domain: Domain
    shape: tuple[int, ...]
    spacing: tuple[float, ...]

    @property
    def ndim(self) -> int:
        return len(self.shape)

    @property
    def n_interior(self) -> int:
        return int(np.prod(self.shape))

    def axis_coords(self, axis: int = 0) -> np.ndarray:
        """Interior node coordinates x_i = i*h along one axis."""
        n = self.shape[axis]
        h = self.spacing[axis]
        return h * np.arange(1, n + 1)


def build_grid(domain: Domain, n_per_axis: int) -> Grid:
    """Grid with ``n_per_axis`` interior nodes per axis."""
    n = int(n_per_axis)
    if n != n_per_axis or n < 2:
        raise ValidationError(f"need at least 2 interior nodes per axis, got {n_per_axis}")
    if isinstance(domain, Interval):
        return Grid(domain, (n,), (domain.length / (n + 1),))
    return Grid(domain, (n, n), (domain.lx / (n + 1), domain.ly / (n + 1)))


@dataclass(frozen=True)
class Field:
    """Interior nodal values of a grid function; always finite."""

    grid: Grid
    values: np.ndarray

    def __post_init__(self) -> None:
        # defensive copy: fields are value-semantic and frozen
        arr = np.array(self.values, dtype=np.float64, order="C")
        if arr.shape != self.grid.shape:
            raise GridMismatch(
                f"values shape {arr.shape} does not match grid shape {self.grid.shape}"
            )
        if not np.isfinite(arr).all():
            raise NonFiniteState("field contains NaN or infinite values")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)


def zero_field(grid: Grid) -> Field:
    return Field(grid, np.zeros(grid.shape))


def sample_function(grid: Grid, g: Callable[..., float]) -> Field:
    """Field with values g(x_i) (1D) or g(x_i, y_j) (2D)."""
    if grid.ndim == 1:
        vals = np.asarray([g(x) for x in grid.axis_coords(0)], dtype=np.float64)
    else:
        xs = grid.axis_coords(0)
        ys = grid.axis_coords(1)
        vals = np.asarray([[g(x, y) for y in ys] for x in xs], dtype=np.float64)
    return Field(grid, vals)


def _check(grid: Grid, u: Field) -> None:
    if u.grid is not grid and u.grid != grid:
        raise GridMismatch("field does not live on the given grid")


def apply_laplacian(grid: Grid, u: Field) -> Field:
    """Second-order central Laplacian with zero boundary values."""
    _check(grid, u)
    kern = backends.active()
    if grid.ndim == 1:
        out = kern.laplacian_1d(u.values, grid.spacing[0])
    else:
        out = kern.laplacian_2d(u.values, grid.spacing[0], grid.spacing[1])
    return Field(grid, out)


def integrate(grid: Grid, w: Field) -> float:
    """Composite trapezoid rule with zero boundary: cell measure times sum.

    Note the boundary cells of a non-vanishing integrand are under-counted;
    integrate(1) on Interval(1) with n = 99 is 0.99, not 1.  This is the
    price of pairing exactly with the Dirichlet stencil.
    """
    _check(grid, w)
    cell = math.prod(grid.spacing)
    return cell * backends.active().ksum(np.ravel(w.values))


def quadrature_measure(grid: Grid) -> float:
    """integrate(1): the measure of the domain as seen by the quadrature."""
    return math.prod(grid.spacing) * grid.n_interior


def dirichlet_energy(grid: Grid, u: Field) -> float:
    """Edge sum of squared difference quotients, approximating the integral
    of the squared gradient. Includes the edges touching the zero boundary."""
    _check(grid, u)
    kern = backends.active()
    if grid.ndim == 1:
        return kern.dirichlet_energy_1d(u.values, grid.spacing[0])
    return kern.dirichlet_energy_2d(u.values, grid.spacing[0], grid.spacing[1])
