"""
اختبارات سلاسل Chebyshev وفجوة الدورية
Tests for chebyshev_analysis
"""

import numpy as np
import pytest
from numpy.polynomial import chebyshev as npcheb

from contour_errors import ChebyshevDomainError, ContourValidationError
from contour_geometry import regular_polygon
from chebyshev_analysis import (
    ChebyshevSeries, cheb_eval, cheb_eval_recurrence, cheb_fit_rho, fit_rho_series, periodicity_gap,
)
from tests.conftest import asymmetric_star


class TestChebEval:
    """تقييم السلسلة بخوارزمية Clenshaw"""

    def test_first_kind_examples(self):
        assert cheb_eval(ChebyshevSeries([0, 1]), 0.7) == pytest.approx(0.7)
        assert cheb_eval(ChebyshevSeries([1]), -0.3) == 1.0
        assert cheb_eval(ChebyshevSeries([0, 0, 1]), 0.5) == pytest.approx(-0.5)

    def test_scalar_and_array_output(self):
        s = ChebyshevSeries([1, 2, 3])
        assert isinstance(cheb_eval(s, 0.1), float)
        out = cheb_eval(s, np.array([-1.0, 0.0, 1.0]))
        assert isinstance(out, np.ndarray)
        np.testing.assert_allclose(out, [2.0, -2.0, 6.0])

    def test_matches_recurrence_and_numpy(self):
        rng = np.random.default_rng(8)
        x = np.linspace(-1, 1, 101)
        for _ in range(50):
            s = ChebyshevSeries(rng.normal(size=int(rng.integers(1, 25))))
            np.testing.assert_allclose(cheb_eval(s, x), cheb_eval_recurrence(s, x), atol=1e-9)
            np.testing.assert_allclose(cheb_eval(s, x), npcheb.chebval(x, s.alphas), atol=1e-9)

    def test_domain(self):
        s = ChebyshevSeries([1, 1])
        with pytest.raises(ChebyshevDomainError):
            cheb_eval(s, 1.5)
        with pytest.raises(ChebyshevDomainError):
            cheb_eval_recurrence(s, np.array([0.0, -1.01]))
        assert cheb_eval(s, 1.0 + 1e-13) == pytest.approx(2.0)

    def test_empty_series(self):
        with pytest.raises(ContourValidationError):
            ChebyshevSeries([])


class TestPeriodicityGap:
    """ρ(1) − ρ(−1) = 2·Σ α_odd"""

    def test_even_only(self):
        assert periodicity_gap(ChebyshevSeries([1, 0, 5, 0])) == 0.0

    def test_linear_term(self):
        assert periodicity_gap(ChebyshevSeries([0, 1])) == 2.0

    def test_closed_form(self):
        s = ChebyshevSeries([0.5, 1.0, -2.0, 0.25, 3.0, -0.75])
        assert periodicity_gap(s) == 2.0 * (1.0 + 0.25 - 0.75)

    def test_matches_endpoint_evaluation(self):
        rng = np.random.default_rng(1000)
        for _ in range(1000):
            s = ChebyshevSeries(rng.normal(size=int(rng.integers(1, 30))))
            assert abs(periodicity_gap(s) - (cheb_eval(s, 1.0) - cheb_eval(s, -1.0))) < 1e-9


class TestRhoFit:
    """ملاءمة ρ(θ) بالمربعات الصغرى"""

    def test_circle_has_no_gap(self):
        p = regular_polygon(256, 25.0, center=(3.0, 4.0))
        series, gap = cheb_fit_rho(p, (3.0, 4.0), 8, 129)
        assert series.alphas[0] == pytest.approx(25.0, abs=1e-9)
        assert np.all(np.abs(series.alphas[1:]) < 1e-9)
        assert abs(gap) < 1e-9

    def test_asymmetric_star_has_gap(self):
        fit = fit_rho_series(asymmetric_star(), (0.0, 0.0), 8, 256)
        assert abs(fit.gap) > 1e-3 * float(np.mean(fit.rho))
        assert fit.gap == pytest.approx(float(fit.fitted[-1] - fit.fitted[0]), abs=1e-9)

    def test_constrained_fit_closes_gap(self):
        free = fit_rho_series(asymmetric_star(), (0.0, 0.0), 8, 256)
        closed = fit_rho_series(asymmetric_star(), (0.0, 0.0), 8, 256, constrained=True)
        assert abs(closed.gap) < 1e-9
        assert closed.residual >= free.residual
        assert closed.constrained

    def test_sample_grid_includes_both_ends(self):
        fit = fit_rho_series(asymmetric_star(), (0.0, 0.0), 4, 33)
        assert fit.theta[0] == 0.0
        assert fit.theta[-1] == pytest.approx(2 * np.pi)
        assert fit.rho[0] == pytest.approx(fit.rho[-1], abs=1e-9)

    def test_csv(self):
        fit = fit_rho_series(asymmetric_star(), (0.0, 0.0), 4, 33)
        lines = fit.to_csv().splitlines()
        assert lines[0] == "theta,rho_true,rho_cheb_fit"
        assert len(lines) == 34

    def test_too_few_samples(self):
        with pytest.raises(ContourValidationError):
            cheb_fit_rho(asymmetric_star(), (0.0, 0.0), 8, 8)

    def test_center_outside(self):
        with pytest.raises(ContourValidationError, match="center outside contour"):
            cheb_fit_rho(asymmetric_star(), (500.0, 500.0), 4, 32)
