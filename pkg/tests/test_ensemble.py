"""Tests for meso_dbm.ensemble."""

import math

import numpy as np
import pytest
from pydantic import ValidationError
from scipy import stats

from meso_dbm.ensemble import (
    SimParams,
    deformed_gue_at_time,
    deformed_gue_eigenvalues,
    hermitian_eigenvalues,
    sample_gue,
    simulate_dbm_sde,
)
from meso_dbm.errors import DomainError
from meso_dbm.semicircle import Configuration, kolmogorov_distance, quantile_configuration


class TestSimParams:
    def test_derived_time(self):
        p = SimParams(n=1024, alpha=0.5, gamma=0.5, tau=1.0)
        assert p.t == pytest.approx(1.0 / (32.0 * math.sqrt(2.0)))
        assert p.q == pytest.approx(math.exp(-p.t))

    def test_off_centre_time(self):
        p = SimParams(n=16, alpha=0.5, gamma=0.5, tau=2.0, x_star=1.0)
        assert p.t == pytest.approx(2.0 / 4.0)

    @pytest.mark.parametrize(
        "bad",
        [
            dict(n=0, alpha=0.5, gamma=0.5, tau=1.0),
            dict(n=8, alpha=1.0, gamma=0.5, tau=1.0),
            dict(n=8, alpha=0.5, gamma=0.0, tau=1.0),
            dict(n=8, alpha=0.5, gamma=0.5, tau=-1.0),
            dict(n=8, alpha=0.5, gamma=0.5, tau=1.0, x_star=1.5),
        ],
    )
    def test_rejects_out_of_range(self, bad):
        with pytest.raises(ValidationError):
            SimParams(**bad)

    def test_frozen(self):
        p = SimParams(n=8, alpha=0.5, gamma=0.5, tau=1.0)
        with pytest.raises(ValidationError):
            p.n = 9


class TestGue:
    def test_hermitian_and_normalised(self):
        n = 400
        m = sample_gue(n, seed=1).entries
        np.testing.assert_allclose(m, m.conj().T)
        assert np.var(np.diag(m).real) == pytest.approx(1.0 / (2 * n), rel=0.2)
        off = m[np.triu_indices(n, 1)]
        assert np.var(off.real) == pytest.approx(1.0 / (4 * n), rel=0.05)

    def test_spectrum_fills_semicircle(self):
        eig = hermitian_eigenvalues(sample_gue(1000, seed=2))
        assert eig.kind == "evolved"
        assert kolmogorov_distance(eig.points) < 0.02
        assert eig.points[-1] < math.sqrt(2.0) + 0.1

    def test_not_hermitian(self):
        with pytest.raises(DomainError):
            hermitian_eigenvalues(np.array([[0.0, 1.0], [0.0, 0.0]]))

    def test_non_square(self):
        from meso_dbm.ensemble import HermitianMatrix

        with pytest.raises(DomainError):
            HermitianMatrix(np.zeros((2, 3)))

    def test_two_by_two_closed_form(self):
        a, d, b = 0.7, -0.2, 0.3 - 0.4j
        eig = hermitian_eigenvalues(np.array([[a, b], [np.conj(b), d]]))
        r = math.hypot((a - d) / 2, abs(b))
        np.testing.assert_allclose(eig.points, [(a + d) / 2 - r, (a + d) / 2 + r], atol=1e-14)

    def test_trace_and_frobenius(self):
        m = sample_gue(50, seed=5)
        eig = hermitian_eigenvalues(m).points
        assert eig.sum() == pytest.approx(np.trace(m.entries).real, abs=1e-10)
        assert np.sum(eig**2) == pytest.approx(np.linalg.norm(m.entries) ** 2, rel=1e-12)

    def test_unitary_conjugation_keeps_spectrum(self):
        n = 30
        rng = np.random.default_rng(6)
        u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        m = sample_gue(n, seed=6).entries
        np.testing.assert_allclose(
            hermitian_eigenvalues(u @ m @ u.conj().T).points, hermitian_eigenvalues(m).points, atol=1e-12
        )

    def test_unitary_conjugation_keeps_law(self):
        n, trials = 4, 3000
        rng = np.random.default_rng(9)
        u, _ = np.linalg.qr(rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)))
        rotated = np.array([u @ sample_gue(n, seed=9, trial=k).entries @ u.conj().T for k in range(trials)])
        assert np.var(rotated[:, 0, 0].real) == pytest.approx(1.0 / (2 * n), rel=0.15)
        assert np.var(rotated[:, 0, 1].real) == pytest.approx(1.0 / (4 * n), rel=0.15)
        assert np.var(rotated[:, 0, 1].imag) == pytest.approx(1.0 / (4 * n), rel=0.15)


class TestDeformedGue:
    def test_time_zero_is_identity(self):
        xi = quantile_configuration(5)
        out = deformed_gue_at_time(xi, 0.0, seed=1)
        np.testing.assert_array_equal(out.points, xi.points)

    def test_negative_time(self):
        with pytest.raises(DomainError):
            deformed_gue_at_time(quantile_configuration(3), -0.1)

    def test_single_point_law(self):
        """n = 1: x(t) ~ N(qξ, (1-q²)/2)."""
        t, xi = 0.3, Configuration([0.5])
        q, s = math.exp(-t), -math.expm1(-2 * t)
        x = np.array([deformed_gue_at_time(xi, t, seed=4, trial=k).points[0] for k in range(4000)])
        se_mean = math.sqrt(s / 2 / 4000)
        assert abs(x.mean() - q * 0.5) < 4 * se_mean
        assert x.var(ddof=1) == pytest.approx(s / 2, rel=0.1)

    def test_dimension_check(self):
        params = SimParams(n=4, alpha=0.5, gamma=0.5, tau=1.0)
        with pytest.raises(DomainError):
            deformed_gue_eigenvalues(quantile_configuration(3), params)

    def test_reproducible(self):
        params = SimParams(n=16, alpha=0.5, gamma=0.5, tau=1.0)
        xi = quantile_configuration(16)
        a = deformed_gue_eigenvalues(xi, params, seed=8, trial=2)
        b = deformed_gue_eigenvalues(xi, params, seed=8, trial=2)
        np.testing.assert_array_equal(a.points, b.points)
        assert np.all(np.diff(a.points) > 0)


class TestSde:
    def test_deterministic_relaxation(self):
        """Without noise or interaction each particle decays like e^{-t}."""
        xi = Configuration([-1.0, 0.2, 0.9])
        out = simulate_dbm_sde(xi, t=0.5, steps=4000, noise=False, interaction=False)
        np.testing.assert_allclose(out.points, xi.points * math.exp(-0.5), rtol=1e-3)

    def test_ordering_kept(self):
        params = SimParams(n=32, alpha=0.5, gamma=0.3, tau=1.0)
        out = simulate_dbm_sde(quantile_configuration(32), params, seed=3)
        assert np.all(np.diff(out.points) > 0)

    def test_needs_time(self):
        with pytest.raises(DomainError):
            simulate_dbm_sde(quantile_configuration(2))

    @pytest.mark.slow
    def test_matches_matrix_model(self):
        """n = 2: the SDE endpoint and the deformed GUE spectrum have the same law."""
        t, trials = 0.3, 400
        xi = Configuration([-0.5, 0.5])
        sde = np.array([simulate_dbm_sde(xi, t=t, steps=300, seed=10, trial=k).points for k in range(trials)])
        mat = np.array([deformed_gue_at_time(xi, t, seed=11, trial=k).points for k in range(trials)])
        for j in range(2):
            assert stats.ks_2samp(sde[:, j], mat[:, j]).pvalue > 1e-3
        assert stats.ks_2samp(np.diff(sde, axis=1).ravel(), np.diff(mat, axis=1).ravel()).pvalue > 1e-3
