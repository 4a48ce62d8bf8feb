"""Tests for meso_dbm.mcstat."""

import numpy as np
import pytest

from meso_dbm.ensemble import SimParams
from meso_dbm.errors import DomainError, TrialFailureError
from meso_dbm.mcstat import (
    block_jackknife,
    gaussianity_report,
    linear_statistic,
    run_mc,
    scaling_regression,
    variance_bound_ratio,
    variance_ci,
)
from meso_dbm.semicircle import Configuration
from meso_dbm.testfn import BUMP, PairGrid


class TestStatistics:
    def test_linear_statistic(self):
        """n = 2, α = 1/2: f(0) + f(√2·0.5) = 1 + 1/4."""
        assert linear_statistic(np.array([0.0, 0.5]), BUMP, 0.5) == pytest.approx(1.25)

    def test_linear_statistic_centred(self):
        x = Configuration([0.3, 0.9])
        assert linear_statistic(x, BUMP, 0.5, x_star=0.3) == pytest.approx(1.0 + float(BUMP(np.sqrt(2) * 0.6)))

    def test_jackknife_mean_error(self):
        rng = np.random.default_rng(0)
        x = rng.standard_normal(4000)
        est, se = block_jackknife(x)
        assert est == pytest.approx(x.mean())
        assert se == pytest.approx(1.0 / np.sqrt(4000), rel=0.4)

    def test_jackknife_needs_blocks(self):
        with pytest.raises(DomainError):
            block_jackknife(np.ones(10), blocks=20)

    def test_variance_ci_brackets_estimate(self):
        rng = np.random.default_rng(1)
        x = rng.normal(0.0, 2.0, 2000)
        lo, hi = variance_ci(x)
        assert 0.0 <= lo <= np.var(x, ddof=1) <= hi
        assert hi - lo < 1.0

    def test_gaussianity(self):
        rng = np.random.default_rng(2)
        rep = gaussianity_report(rng.standard_normal(2000))
        assert rep.ks_pvalue > 0.01
        assert abs(rep.skewness) < 0.15
        assert abs(rep.excess_kurtosis) < 0.3
        skewed = gaussianity_report(rng.exponential(size=2000))
        assert skewed.ks_pvalue < 0.01

    def test_gaussianity_sample_size(self):
        with pytest.raises(DomainError):
            gaussianity_report(np.arange(100.0))

    def test_gaussianity_degenerate(self):
        with pytest.raises(DomainError):
            gaussianity_report(np.ones(600))

    def test_scaling_regression_exact(self):
        ns = [256, 512, 1024, 2048]
        slope, err = scaling_regression([(n, 3.0 * n**0.1) for n in ns])
        assert slope == pytest.approx(0.1, abs=1e-12)
        assert err == pytest.approx(0.0, abs=1e-10)

    def test_scaling_regression_checks(self):
        with pytest.raises(DomainError):
            scaling_regression([(1, 1.0), (2, 1.0)])
        with pytest.raises(DomainError):
            scaling_regression([(1, 1.0), (2, -1.0), (3, 1.0)])

    def test_variance_bound_ratio(self):
        ratio = variance_bound_ratio(1.0, BUMP, PairGrid(points=201, refine_points=11))
        assert 0.0 < ratio < 1.0


class TestRunMc:
    params = SimParams(n=16, alpha=0.5, gamma=0.3, tau=1.0)

    def test_reproducible(self, seed):
        a = run_mc(self.params, BUMP, trials=200, seed=seed)
        b = run_mc(self.params, BUMP, trials=200, seed=seed)
        assert a.variance == b.variance
        np.testing.assert_array_equal(a.samples, b.samples)
        assert a.n_trials == 200 and a.failures == 0

    def test_summary_dict(self, seed):
        d = run_mc(self.params, BUMP, init="random_iid", trials=100, seed=seed).to_dict()
        assert "samples" not in d
        assert d["init"] == "random_iid"
        assert d["variance_ci"][0] <= d["variance"] <= d["variance_ci"][1]

    def test_given_configuration(self, seed):
        xi = Configuration(np.linspace(-1.0, 1.0, 16))
        summary = run_mc(self.params, BUMP, trials=100, seed=seed, xi=xi)
        assert summary.variance > 0

    def test_argument_checks(self):
        with pytest.raises(DomainError):
            run_mc(self.params, BUMP, init="uniform")
        with pytest.raises(DomainError):
            run_mc(self.params, BUMP, engine="qr")
        with pytest.raises(DomainError):
            run_mc(self.params, BUMP, trials=10)
        with pytest.raises(DomainError):
            run_mc(self.params, BUMP, trials=100, xi=Configuration([0.0, 1.0]))

    def test_failures_abort(self, monkeypatch, seed):
        from meso_dbm import mcstat
        from meso_dbm.errors import OrderingError

        def broken(*args, **kwargs):
            raise OrderingError("tie")

        monkeypatch.setattr(mcstat, "deformed_gue_eigenvalues", broken)
        with pytest.raises(TrialFailureError):
            run_mc(self.params, BUMP, trials=100, seed=seed)

    @pytest.mark.slow
    def test_workers_give_same_samples(self, seed):
        a = run_mc(self.params, BUMP, trials=200, seed=seed, jobs=1)
        b = run_mc(self.params, BUMP, trials=200, seed=seed, jobs=2)
        np.testing.assert_array_equal(a.samples, b.samples)

    @pytest.mark.slow
    def test_sde_engine_runs(self, seed):
        summary = run_mc(SimParams(n=8, alpha=0.5, gamma=0.3, tau=1.0), BUMP, trials=100, seed=seed, engine="sde")
        assert summary.engine == "sde" and summary.variance > 0
