import math

import numpy as np
import pytest

from blowup import (
    Field,
    Interval,
    NonConvergence,
    Rectangle,
    ZeroField,
    analytic_lambda0,
    build_grid,
    dirichlet_energy,
    discrete_lambda0,
    integrate,
    principal_eigenpair,
    rayleigh_quotient,
    sample_function,
)


class TestClosedForms:
    def test_analytic_values(self):
        assert analytic_lambda0(Interval(math.pi)) == pytest.approx(1.0, rel=1e-15)
        assert analytic_lambda0(Interval(1.0)) == pytest.approx(math.pi**2, rel=1e-15)
        assert analytic_lambda0(Rectangle(math.pi, math.pi)) == pytest.approx(2.0, rel=1e-15)

    def test_discrete_value_below_continuum(self):
        g = build_grid(Interval(math.pi), 50)
        assert discrete_lambda0(g) < analytic_lambda0(g.domain)


class TestPrincipalEigenpair1D:
    def test_unit_eigenvalue_interval(self):
        g = build_grid(Interval(math.pi), 2000)
        eig = principal_eigenpair(g, tol=1e-10)
        assert abs(eig.lambda0 - 1.0) < 1e-5
        assert abs(eig.lambda0 - discrete_lambda0(g)) < 1e-12
        assert eig.residual <= 1e-10

    def test_pi_squared_on_unit_interval(self):
        g = build_grid(Interval(1.0), 2000)
        eig = principal_eigenpair(g, tol=1e-8)
        assert abs(eig.lambda0 - math.pi**2) < 1e-3

    def test_normalization_and_positivity(self):
        g = build_grid(Interval(2.0), 300)
        eig = principal_eigenpair(g, tol=1e-9)
        phi2 = Field(g, eig.phi0.values**2)
        assert integrate(g, phi2) == pytest.approx(1.0, rel=1e-12)
        assert (eig.phi0.values > 0).all()

    def test_consistency_rate_second_order(self):
        errs = []
        for n in (100, 200, 400):
            g = build_grid(Interval(1.3), n)
            eig = principal_eigenpair(g, tol=1e-9)
            errs.append(abs(eig.lambda0 - analytic_lambda0(g.domain)))
        assert 3.5 < errs[0] / errs[1] < 4.5
        assert 3.5 < errs[1] / errs[2] < 4.5

    def test_nonconvergence_reported(self):
        g = build_grid(Interval(math.pi), 50)
        with pytest.raises(NonConvergence):
            principal_eigenpair(g, tol=1e-13, max_iter=1)


class TestPrincipalEigenpair2D:
    def test_square_eigenvalue(self):
        g = build_grid(Rectangle(math.pi, math.pi), 200)
        eig = principal_eigenpair(g, tol=1e-8)
        assert abs(eig.lambda0 - 2.0) < 1e-3
        assert abs(eig.lambda0 - discrete_lambda0(g)) < 1e-10
        assert (eig.phi0.values > 0).all()

    def test_anisotropic_rectangle(self):
        g = build_grid(Rectangle(1.0, 2.0), 60)
        eig = principal_eigenpair(g, tol=1e-7)
        assert abs(eig.lambda0 - analytic_lambda0(g.domain)) < 5e-3 * analytic_lambda0(g.domain)


class TestRayleighQuotient:
    def test_eigenfunction_attains_minimum(self):
        g = build_grid(Interval(math.pi), 500)
        eig = principal_eigenpair(g, tol=1e-10)
        assert rayleigh_quotient(g, eig.phi0) == pytest.approx(eig.lambda0, rel=1e-10)

    def test_first_mode_sample(self):
        g = build_grid(Interval(math.pi), 2000)
        assert rayleigh_quotient(g, sample_function(g, math.sin)) == pytest.approx(1.0, abs=1e-3)

    def test_second_mode_sample(self):
        g = build_grid(Interval(math.pi), 2000)
        u = sample_function(g, lambda x: math.sin(2 * x))
        assert rayleigh_quotient(g, u) == pytest.approx(4.0, abs=1e-3)

    def test_zero_field_rejected(self):
        g = build_grid(Interval(1.0), 8)
        with pytest.raises(ZeroField):
            rayleigh_quotient(g, Field(g, np.zeros(8)))

    def test_minimality_over_random_fields(self, rng):
        g = build_grid(Interval(math.pi), 200)
        eig = principal_eigenpair(g, tol=1e-10)
        for _ in range(100):
            u = Field(g, rng.standard_normal(200))
            assert rayleigh_quotient(g, u) >= eig.lambda0 - 1e-10

    def test_minimality_2d(self, rng):
        g = build_grid(Rectangle(2.0, 1.0), 16)
        eig = principal_eigenpair(g, tol=1e-8)
        for _ in range(50):
            u = Field(g, rng.standard_normal(g.shape))
            assert rayleigh_quotient(g, u) >= eig.lambda0 - 1e-8


class TestDiscretePoincare:
    @pytest.mark.parametrize("make", [
        lambda: build_grid(Interval(math.pi), 128),
        lambda: build_grid(Rectangle(math.pi, 2.0), 20),
    ])
    def test_energy_dominates_mass(self, make, rng):
        g = make()
        eig = principal_eigenpair(g, tol=1e-8)
        for _ in range(100):
            u = Field(g, rng.standard_normal(g.shape))
            mass = integrate(g, Field(g, u.values * u.values))
            assert dirichlet_energy(g, u) >= eig.lambda0 * mass * (1 - 1e-10)
