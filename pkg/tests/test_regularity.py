"""Tests for meso_dbm.regularity."""

import math

import numpy as np
import pytest

from meso_dbm.errors import DomainError
from meso_dbm.regularity import (
    RegularityGrid,
    check_regularity,
    tied_delta_max,
    xp_integral_term,
    xp_statistic,
    xp_variance_mc,
)
from meso_dbm.semicircle import Configuration, quantile_configuration, sample_iid, stieltjes_u
from meso_dbm.theory import var_im_xp_prediction


class TestRegularity:
    @pytest.mark.parametrize("n", [256, 1024])
    def test_quantiles_pass(self, n):
        report = check_regularity(quantile_configuration(n))
        assert report.passed
        assert report.sup_value <= report.threshold == pytest.approx(n**0.2)

    def test_iid_passes(self, seed):
        assert check_regularity(sample_iid(1024, seed)).passed

    def test_all_zeros_fail(self):
        report = check_regularity(Configuration(np.zeros(1024)))
        assert not report.passed
        assert report.argmax_w.imag >= 1.0 / 1024

    def test_window_joins_bulk_interval(self):
        xi = quantile_configuration(256)
        assert check_regularity(xi, U=(-0.5, 0.5)) == check_regularity(xi)
        wide = check_regularity(xi, U=(-3.0, 3.0))
        apart = check_regularity(xi, U=(4.0, 5.0))
        assert wide.grid_size > check_regularity(xi).grid_size
        assert apart.grid_size > check_regularity(xi).grid_size
        assert -3.0 <= wide.argmax_w.real <= 3.0

    def test_window_order_checked(self):
        with pytest.raises(DomainError):
            check_regularity(quantile_configuration(16), U=(1.0, -1.0))

    def test_monotone_in_a(self, seed):
        xi = sample_iid(256, seed)
        reports = [check_regularity(xi, A=a) for a in (0.05, 0.2, 1.0, 4.0)]
        verdicts = [r.passed for r in reports]
        assert verdicts == sorted(verdicts)
        assert not verdicts[0] and verdicts[-1]
        for r in reports:
            assert r.passed == (r.sup_value <= r.threshold)

    def test_reordering_does_not_matter(self, seed):
        pts = sample_iid(128, seed).points
        shuffled = np.random.default_rng(seed).permutation(pts)
        a = check_regularity(Configuration(pts))
        b = check_regularity(Configuration(shuffled))
        assert b.sup_value == pytest.approx(a.sup_value, rel=1e-12)
        assert b.argmax_w == a.argmax_w

    @pytest.mark.slow
    def test_quantile_sup_shrinks_relative_to_threshold(self):
        ratios = [check_regularity(quantile_configuration(n)).sup_value / n**0.2 for n in (256, 1024, 4096)]
        assert ratios[0] > ratios[1] > ratios[2]

    def test_report_dict(self):
        d = check_regularity(quantile_configuration(64), grid=RegularityGrid(levels=4)).to_dict()
        assert set(d) == {"sup_value", "threshold", "passed", "argmax_w", "grid_size"}
        assert len(d["argmax_w"]) == 2

    def test_parameter_checks(self):
        xi = quantile_configuration(16)
        with pytest.raises(DomainError):
            check_regularity(xi, A=0.0)
        with pytest.raises(DomainError):
            check_regularity(xi, delta=-0.1)
        with pytest.raises(DomainError):
            check_regularity(xi, delta=0.2, gamma=0.5)

    def test_delta_bound(self):
        assert tied_delta_max(0.5) == pytest.approx(1.0 / 6.0)
        with pytest.raises(DomainError):
            tied_delta_max(1.0)


class TestXp:
    def test_p0_is_stieltjes(self):
        t = 0.2
        w = 1j * math.sqrt(2) * math.sinh(t)
        assert xp_integral_term(0, t) == stieltjes_u(w)

    def test_quadrature_agrees_with_closed_form(self):
        assert abs(xp_integral_term(0, 0.3, method="quad") - xp_integral_term(0, 0.3)) < 1e-9

    def test_closed_form_only_for_p0(self):
        with pytest.raises(DomainError):
            xp_integral_term(1, 0.3, method="closed")

    def test_quantiles_make_xp_small(self):
        xi = quantile_configuration(4096)
        assert abs(xp_statistic(xi, 0, 0.1)) < 1e-4
        assert abs(xp_statistic(xi, 1, 0.1)) < 1e-2

    def test_odd_p_imaginary_part_for_symmetric_points(self):
        """Symmetric ξ makes Σ(w-ξ)^{-2} real on the imaginary axis."""
        xi = quantile_configuration(101)
        assert abs(xp_statistic(xi, 1, 0.2).imag) < 1e-10

    @pytest.mark.slow
    def test_variance_against_prediction(self, seed):
        n, gamma, tau = 1024, 0.5, 1.0
        var, se = xp_variance_mc(n, 0, gamma, tau, trials=1000, seed=seed)
        assert var == pytest.approx(var_im_xp_prediction(0, gamma, tau, n), rel=0.2)
        assert se > 0

    def test_variance_needs_trials(self):
        with pytest.raises(DomainError):
            xp_variance_mc(16, 0, 0.5, 1.0, trials=5)
