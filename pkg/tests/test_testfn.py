"""Tests for meso_dbm.testfn."""

import math

import numpy as np
import pytest

from meso_dbm.errors import DomainError
from meso_dbm.testfn import (
    BUMP,
    CAUCHY,
    ODD_BUMP,
    GridFunction,
    TestFunction,
    UniformGrid,
    builtin,
    check_invariants,
    derivative_l2_sq,
    fourier_sq_integral,
    fourier_transform,
    fourier_value,
    from_csv,
    identity,
    l2_norm_sq,
    lowest_nonvanishing_moment,
    moment,
    poisson_l2_norm_sq,
    poisson_smooth,
    resolve,
    scaled,
    sobolev_half_seminorm_sq,
    weighted_lipschitz_norm,
)


class TestBuiltins:
    def test_names_and_aliases(self):
        assert builtin("bump") is BUMP
        assert resolve("f_h") is ODD_BUMP
        assert resolve("f_c") is CAUCHY

    def test_unknown_name(self):
        with pytest.raises(DomainError):
            builtin("gaussian")

    @pytest.mark.parametrize("f", [BUMP, ODD_BUMP, CAUCHY])
    def test_invariants_hold(self, f):
        check_invariants(f)

    def test_wrong_support_detected(self):
        lying = TestFunction(CAUCHY.evaluator, CAUCHY.derivative_evaluator, (-1.0, 1.0), "lying")
        with pytest.raises(DomainError):
            check_invariants(lying)

    def test_scaled_support_and_values(self):
        g = scaled(BUMP, 4.0)
        assert g.support_hint == (-0.25, 0.25)
        np.testing.assert_allclose(g(np.array([0.0, 0.125])), BUMP(np.array([0.0, 0.5])))
        np.testing.assert_allclose(g.derivative(0.125), 4.0 * BUMP.derivative(0.5))

    def test_scaled_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            scaled(BUMP, 0.0)

    def test_identity(self):
        f = identity()
        np.testing.assert_array_equal(f(np.array([-1.0, 2.0])), [-1.0, 2.0])


class TestMoments:
    def test_bump_mass(self):
        assert moment(BUMP, 0) == pytest.approx(16.0 / 15.0, rel=1e-10)

    def test_odd_bump_first_moment(self):
        """μ_1(f_h) = 16/105."""
        assert moment(ODD_BUMP, 1) == pytest.approx(16.0 / 105.0, rel=1e-10)

    def test_lowest_nonvanishing(self):
        assert lowest_nonvanishing_moment(BUMP) == 0
        assert lowest_nonvanishing_moment(ODD_BUMP) == 1
        assert lowest_nonvanishing_moment(CAUCHY) == 0

    def test_negative_order(self):
        with pytest.raises(DomainError):
            moment(BUMP, -1)


class TestNorms:
    def test_l2_bump(self):
        assert l2_norm_sq(BUMP) == pytest.approx(256.0 / 315.0, rel=1e-10)

    def test_l2_cauchy(self):
        assert l2_norm_sq(CAUCHY) == pytest.approx(math.pi / 2, rel=1e-8)

    def test_derivative_l2_bump(self):
        assert derivative_l2_sq(BUMP) == pytest.approx(256.0 / 105.0, rel=1e-10)

    def test_poisson_norm_cauchy(self):
        """‖𝒫_τ f_c‖² = π/(2(1+τ))."""
        for tau in (0.5, 2.0):
            assert poisson_l2_norm_sq(CAUCHY, tau) == pytest.approx(math.pi / (2 * (1 + tau)), rel=1e-6)

    def test_poisson_norm_rejects_tau(self):
        with pytest.raises(DomainError):
            poisson_l2_norm_sq(BUMP, 0.0)

    def test_half_seminorm_cauchy(self):
        """∬((f(u)-f(v))/(u-v))² = 4π²σ_∞² = π²/2 for f_c."""
        assert sobolev_half_seminorm_sq(CAUCHY) == pytest.approx(math.pi**2 / 2, rel=1e-5)

    def test_weighted_lipschitz_positive(self):
        assert weighted_lipschitz_norm(BUMP) > 1.0

    @pytest.mark.parametrize("f, expected", [(BUMP, 256.0 / 315.0), (CAUCHY, math.pi / 2)])
    def test_plancherel(self, f, expected):
        assert fourier_sq_integral(f, lambda w: 1.0) == pytest.approx(expected, rel=1e-6)
        assert l2_norm_sq(f) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("f", [BUMP, CAUCHY])
    def test_half_seminorm_bounded_by_weighted_norm(self, f):
        assert sobolev_half_seminorm_sq(f) <= math.pi**2 * weighted_lipschitz_norm(f) ** 2

    def test_weighted_norm_cauchy(self):
        """|x+y|/√((1+x²)(1+y²)) ≤ 1 with equality on xy = 1."""
        assert weighted_lipschitz_norm(CAUCHY) == pytest.approx(1.0, abs=1e-3)

    def test_poisson_norm_decreases_in_tau(self):
        norms = [l2_norm_sq(BUMP)] + [poisson_l2_norm_sq(BUMP, tau) for tau in (0.1, 1.0, 4.0)]
        assert all(a > b for a, b in zip(norms, norms[1:]))


class TestFourier:
    @pytest.mark.parametrize("omega", [0.0, 0.7, -1.5, 3.0])
    def test_cauchy_transform(self, omega):
        """f̂_c(ω) = √(π/2) e^{-|ω|}."""
        value = fourier_value(CAUCHY, omega)
        assert value.real == pytest.approx(math.sqrt(math.pi / 2) * math.exp(-abs(omega)), rel=1e-7)
        assert abs(value.imag) < 1e-9

    def test_bump_at_zero(self):
        assert fourier_value(BUMP, 0.0).real == pytest.approx(16.0 / 15.0 / math.sqrt(2 * math.pi))

    def test_odd_function_is_imaginary(self):
        value = fourier_value(ODD_BUMP, 1.0)
        assert abs(value.real) < 1e-10
        assert value.imag != 0.0

    @pytest.mark.parametrize("f", [BUMP, ODD_BUMP])
    def test_transform_conjugate_symmetric(self, f):
        grid = UniformGrid(-2.0, 2.0, 1.0)
        ft = fourier_transform(f, grid)
        assert ft.grid is grid and len(ft.values) == 5
        np.testing.assert_allclose(ft.values[::-1], np.conj(ft.values), atol=1e-10)

    def test_transform_matches_pointwise(self):
        ft = fourier_transform(CAUCHY, UniformGrid(0.0, 1.0, 0.5))
        np.testing.assert_allclose(ft.values.real, math.sqrt(math.pi / 2) * np.exp(-np.array([0.0, 0.5, 1.0])), rtol=1e-7)

    def test_grid_function_length_checked(self):
        grid = UniformGrid(0.0, 1.0, 0.5)
        assert grid.count == 3
        with pytest.raises(DomainError):
            GridFunction(grid, np.zeros(2))

    def test_grid_step_checked(self):
        with pytest.raises(DomainError):
            UniformGrid(0.0, 1.0, 0.0)
        with pytest.raises(DomainError):
            UniformGrid(1.0, 0.0, 0.5)


class TestPoissonSmoothing:
    def test_cauchy_at_zero(self):
        assert float(poisson_smooth(CAUCHY, 1.0)(0.0)) == pytest.approx(0.5, rel=1e-8)

    @pytest.mark.parametrize("tau, x", [(0.5, 0.7), (2.0, -1.3)])
    def test_cauchy_closed_form(self, tau, x):
        """𝒫_τ f_c(x) = (1+τ)/(x² + (1+τ)²)."""
        expected = (1 + tau) / (x * x + (1 + tau) ** 2)
        assert float(poisson_smooth(CAUCHY, tau)(x)) == pytest.approx(expected, rel=1e-8)

    def test_semigroup(self):
        twice = poisson_smooth(poisson_smooth(BUMP, 0.5), 0.5)
        once = poisson_smooth(BUMP, 1.0)
        assert float(twice(0.3)) == pytest.approx(float(once(0.3)), rel=1e-6)

    def test_rejects_tau(self):
        with pytest.raises(DomainError):
            poisson_smooth(BUMP, 0.0)


class TestTabulated:
    def test_from_csv_reproduces_bump(self, tmp_path):
        u = np.linspace(-1.0, 1.0, 401)
        path = tmp_path / "bump_table.csv"
        np.savetxt(path, np.column_stack([u, BUMP(u)]), delimiter=",", header="u,f")
        f = from_csv(path)
        assert f.support_hint == (-1.0, 1.0)
        assert float(f(0.3)) == pytest.approx(float(BUMP(0.3)), abs=1e-6)
        assert float(f(2.0)) == 0.0
        assert resolve(str(path)).label == "bump_table"

    def test_from_csv_too_short(self, tmp_path):
        path = tmp_path / "short.csv"
        path.write_text("0,1\n1,0\n")
        with pytest.raises(DomainError):
            from_csv(path)
