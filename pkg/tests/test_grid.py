import math

import numpy as np
import pytest

from blowup import (
    Field,
    GridMismatch,
    Interval,
    NonFiniteState,
    Rectangle,
    ValidationError,
    apply_laplacian,
    build_grid,
    dirichlet_energy,
    integrate,
    quadrature_measure,
    sample_function,
    zero_field,
)


class TestDomainsAndGrids:
    def test_interval_spacing(self):
        g = build_grid(Interval(math.pi), 3)
        assert g.spacing == (math.pi / 4,)

    def test_fine_interval_spacing(self):
        g = build_grid(Interval(1.0), 99)
        assert g.spacing == (0.01,)

    def test_rectangle_spacing_per_axis(self):
        g = build_grid(Rectangle(1.0, 2.0), 9)
        assert g.spacing == (0.1, 0.2)
        assert g.shape == (9, 9)

    def test_interior_coordinates(self):
        g = build_grid(Interval(1.0), 4)
        np.testing.assert_allclose(g.axis_coords(0), [0.2, 0.4, 0.6, 0.8])

    @pytest.mark.parametrize("n", [0, 1, -3])
    def test_rejects_too_few_nodes(self, n):
        with pytest.raises(ValidationError):
            build_grid(Interval(1.0), n)

    @pytest.mark.parametrize("length", [0.0, -1.0, math.inf])
    def test_rejects_bad_domain(self, length):
        with pytest.raises(ValidationError):
            Interval(length)
        with pytest.raises(ValidationError):
            Rectangle(length, 1.0)


class TestField:
    def test_shape_mismatch(self):
        g = build_grid(Interval(1.0), 4)
        with pytest.raises(GridMismatch):
            Field(g, np.zeros(5))

    def test_non_finite_rejected(self):
        g = build_grid(Interval(1.0), 4)
        with pytest.raises(NonFiniteState):
            Field(g, np.array([0.0, np.nan, 0.0, 0.0]))
        with pytest.raises(NonFiniteState):
            Field(g, np.array([0.0, np.inf, 0.0, 0.0]))

    def test_values_are_frozen_copies(self):
        g = build_grid(Interval(1.0), 3)
        src = np.array([1.0, 2.0, 3.0])
        f = Field(g, src)
        src[0] = 99.0
        assert f.values[0] == 1.0
        with pytest.raises(ValueError):
            f.values[0] = 0.0

    def test_grid_mismatch_between_grids(self):
        g1 = build_grid(Interval(1.0), 4)
        g2 = build_grid(Interval(2.0), 4)
        u = zero_field(g1)
        with pytest.raises(GridMismatch):
            integrate(g2, u)


class TestSampling:
    def test_zero(self):
        g = build_grid(Interval(math.pi), 5)
        f = sample_function(g, lambda x: 0.0)
        assert not f.values.any()

    def test_sine_values(self):
        g = build_grid(Interval(math.pi), 3)
        f = sample_function(g, math.sin)
        np.testing.assert_allclose(
            f.values, [math.sqrt(2) / 2, 1.0, math.sqrt(2) / 2], rtol=1e-15
        )

    def test_scaling_linearity(self):
        g = build_grid(Interval(math.pi), 3)
        f1 = sample_function(g, math.sin)
        f10 = sample_function(g, lambda x: 10 * math.sin(x))
        np.testing.assert_allclose(f10.values, 10 * f1.values, rtol=1e-15)

    def test_non_finite_sample_rejected(self):
        g = build_grid(Interval(1.0), 4)
        with pytest.raises(NonFiniteState):
            sample_function(g, lambda x: 1.0 / (x - x))


class TestLaplacian:
    def test_zero_field(self):
        g = build_grid(Interval(1.0), 8)
        assert not apply_laplacian(g, zero_field(g)).values.any()

    def test_direct_stencil_arithmetic(self):
        # h = 1, u = (1, 2, 1): interior stencil values (0, -2, 0)
        g = build_grid(Interval(4.0), 3)
        u = Field(g, np.array([1.0, 2.0, 1.0]))
        np.testing.assert_allclose(apply_laplacian(g, u).values, [0.0, -2.0, 0.0], atol=1e-14)

    def test_sine_eigenrelation_second_order(self):
        errs = []
        for n in (100, 200):
            g = build_grid(Interval(math.pi), n)
            u = sample_function(g, math.sin)
            err = np.max(np.abs(apply_laplacian(g, u).values + u.values))
            errs.append(err)
        assert errs[0] < 1e-3
        assert 3.5 < errs[0] / errs[1] < 4.5

    def test_2d_sine_eigenrelation_second_order(self):
        errs = []
        for n in (20, 40):
            g = build_grid(Rectangle(math.pi, math.pi), n)
            u = sample_function(g, lambda x, y: math.sin(x) * math.sin(y))
            err = np.max(np.abs(apply_laplacian(g, u).values + 2.0 * u.values))
            errs.append(err)
        assert 3.2 < errs[0] / errs[1] < 4.8


class TestQuadrature:
    def test_unit_function_undercounts_boundary_cells(self):
        g = build_grid(Interval(1.0), 99)
        assert integrate(g, Field(g, np.ones(99))) == pytest.approx(0.99, abs=1e-14)
        assert quadrature_measure(g) == pytest.approx(0.99, abs=1e-14)

    def test_sine_integral(self):
        g = build_grid(Interval(math.pi), 999)
        assert integrate(g, sample_function(g, math.sin)) == pytest.approx(2.0, abs=1e-4)

    def test_sine_squared_integral(self):
        g = build_grid(Interval(math.pi), 999)
        w = sample_function(g, lambda x: math.sin(x) ** 2)
        assert integrate(g, w) == pytest.approx(math.pi / 2, abs=1e-4)

    def test_2d_measure(self):
        g = build_grid(Rectangle(1.0, 2.0), 9)
        assert quadrature_measure(g) == pytest.approx(0.1 * 0.2 * 81, rel=1e-14)

    def test_second_order_on_boundary_compatible_integrand(self):
        # vanishes at the boundary (the quadrature's convention) but has
        # nonzero boundary slope, so no superconvergence hides the rate
        def fn(x):
            return x * (1.0 - x) * math.exp(x)

        exact = 3.0 - math.e  # int_0^1 x(1-x)e^x
        errs = []
        for n in (100, 200, 400):
            g = build_grid(Interval(1.0), n)
            errs.append(abs(integrate(g, sample_function(g, fn)) - exact))
        assert 3.3 < errs[0] / errs[1] < 4.7
        assert 3.3 < errs[1] / errs[2] < 4.7


class TestDirichletEnergy:
    def test_zero(self):
        g = build_grid(Interval(2.0), 7)
        assert dirichlet_energy(g, zero_field(g)) == 0.0

    def test_sine_gradient_energy(self):
        g = build_grid(Interval(math.pi), 999)
        u = sample_function(g, math.sin)
        assert dirichlet_energy(g, u) == pytest.approx(math.pi / 2, abs=1e-3)

    def test_hat_function_edge_arithmetic(self):
        # L = 1, n = 3, h = 1/4, single interior peak: two edges of slope 4
        g = build_grid(Interval(1.0), 3)
        u = Field(g, np.array([0.0, 1.0, 0.0]))
        assert dirichlet_energy(g, u) == pytest.approx(2 * 16 * 0.25, rel=1e-14)

    def test_always_nonnegative(self, rng):
        g = build_grid(Interval(1.5), 64)
        for _ in range(10):
            u = Field(g, rng.standard_normal(64))
            assert dirichlet_energy(g, u) >= 0.0


class TestDiscreteCalculusIdentities:
    """The stencil/quadrature pairing makes these exact, not approximate."""

    @pytest.mark.parametrize("make", [
        lambda: build_grid(Interval(math.pi), 257),
        lambda: build_grid(Rectangle(math.pi, 1.7), 23),
    ])
    def test_integration_by_parts_exact(self, make, rng):
        g = make()
        for _ in range(20):
            u = Field(g, rng.standard_normal(g.shape))
            lhs = integrate(g, Field(g, u.values * apply_laplacian(g, u).values))
            rhs = -dirichlet_energy(g, u)
            assert lhs == pytest.approx(rhs, rel=1e-12)

    @pytest.mark.parametrize("make", [
        lambda: build_grid(Interval(2.0), 101),
        lambda: build_grid(Rectangle(1.0, 2.0), 17),
    ])
    def test_laplacian_self_adjoint(self, make, rng):
        g = make()
        for _ in range(20):
            u = Field(g, rng.standard_normal(g.shape))
            v = Field(g, rng.standard_normal(g.shape))
            a = integrate(g, Field(g, v.values * apply_laplacian(g, u).values))
            b = integrate(g, Field(g, u.values * apply_laplacian(g, v).values))
            assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
