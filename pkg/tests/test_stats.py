"""Wilcoxon signed-rank and A12: exhaustive and scipy oracles."""
import numpy as np
import pytest
from scipy import stats as sps

from emobatch.stats import (
    ComparisonReport,
    Magnitude,
    a12,
    compare,
    magnitude,
    wilcoxon_signed_rank,
)
from tests._oracles import brute_a12, exact_wilcoxon_p


class TestWilcoxon:
    def test_identical_samples(self):
        x = np.arange(8.0)
        assert wilcoxon_signed_rank(x, x) == 1.0

    def test_ten_uniform_wins(self):
        y = np.zeros(10)
        x = np.arange(1.0, 11.0)
        assert wilcoxon_signed_rank(x, y) == pytest.approx(2.0 / 1024.0)

    def test_matches_sign_flip_enumeration_with_ties(self):
        rng = np.random.default_rng(0)
        for _ in range(60):
            n = int(rng.integers(5, 13))
            x = rng.integers(0, 5, size=n).astype(float)
            y = rng.integers(0, 5, size=n).astype(float)
            assert wilcoxon_signed_rank(x, y) == pytest.approx(
                exact_wilcoxon_p(x, y), abs=1e-12
            )

    def test_matches_scipy_exact_without_ties(self):
        rng = np.random.default_rng(1)
        for _ in range(40):
            x = rng.normal(size=14)
            y = rng.normal(size=14)
            assert wilcoxon_signed_rank(x, y) == pytest.approx(
                sps.wilcoxon(x, y, method="exact").pvalue, abs=1e-12
            )

    def test_matches_scipy_approximation_without_ties(self):
        rng = np.random.default_rng(2)
        for _ in range(40):
            x = rng.normal(size=35)
            y = rng.normal(size=35)
            expected = sps.wilcoxon(x, y, correction=True, method="approx").pvalue
            assert wilcoxon_signed_rank(x, y) == pytest.approx(expected, abs=1e-12)

    def test_symmetric_in_arguments(self):
        rng = np.random.default_rng(3)
        for n in (8, 30):
            x = rng.integers(0, 6, size=n).astype(float)
            y = rng.integers(0, 6, size=n).astype(float)
            assert wilcoxon_signed_rank(x, y) == pytest.approx(
                wilcoxon_signed_rank(y, x), abs=1e-12
            )

    def test_approximate_regime_with_ties_is_sane(self):
        rng = np.random.default_rng(4)
        x = rng.integers(0, 4, size=40).astype(float)
        y = x.copy()
        y[:30] += 1.0  # strong one-sided shift
        p = wilcoxon_signed_rank(x, y)
        assert 0.0 <= p < 0.01
        weak = x.copy()
        flips = rng.uniform(size=40) < 0.5
        weak[flips] += 1.0
        weak[~flips] -= 1.0
        assert wilcoxon_signed_rank(x, weak) > 0.05

    def test_length_and_size_validation(self):
        with pytest.raises(ValueError):
            wilcoxon_signed_rank([1.0, 2.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            wilcoxon_signed_rank(np.arange(5.0), np.arange(6.0))

    def test_p_stays_in_unit_interval(self):
        rng = np.random.default_rng(5)
        for n in (6, 12, 25, 60):
            for _ in range(10):
                x = rng.normal(size=n)
                y = x + rng.normal(scale=3.0, size=n)
                assert 0.0 <= wilcoxon_signed_rank(x, y) <= 1.0


class TestA12:
    def test_full_separation(self):
        assert a12([4.0, 5.0, 6.0], [1.0, 2.0, 3.0]) == 1.0
        assert a12([1.0, 2.0, 3.0], [4.0, 5.0, 6.0]) == 0.0

    def test_identical_multisets(self):
        x = [1.0, 2.0, 2.0, 7.0]
        assert a12(x, list(x)) == 0.5

    def test_matches_brute_force(self):
        rng = np.random.default_rng(6)
        for _ in range(50):
            x = rng.integers(0, 8, size=int(rng.integers(2, 12))).astype(float)
            y = rng.integers(0, 8, size=int(rng.integers(2, 12))).astype(float)
            assert a12(x, y) == pytest.approx(brute_a12(x, y), abs=1e-15)

    def test_complement_identity_without_ties(self):
        rng = np.random.default_rng(7)
        x = rng.normal(size=15)
        y = rng.normal(size=11)
        assert a12(x, y) + a12(y, x) == pytest.approx(1.0, abs=1e-12)

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            a12([], [1.0])


class TestMagnitudeBands:
    @pytest.mark.parametrize(
        "value,band",
        [
            (0.5, Magnitude.EQUAL),
            (0.559, Magnitude.EQUAL),
            (0.56, Magnitude.SMALL),
            (0.639, Magnitude.SMALL),
            (0.64, Magnitude.MEDIUM),
            (0.709, Magnitude.MEDIUM),
            (0.71, Magnitude.LARGE),
            (1.0, Magnitude.LARGE),
        ],
    )
    def test_bands(self, value, band):
        assert magnitude(value) is band

    def test_symmetric_folding(self):
        for v in (0.0, 0.2, 0.35, 0.45):
            assert magnitude(v) is magnitude(1.0 - v)


class TestCompare:
    def test_report_fields(self):
        rng = np.random.default_rng(8)
        x = rng.normal(loc=1.0, size=12)
        y = rng.normal(loc=0.0, size=12)
        report = compare(x, y)
        assert isinstance(report, ComparisonReport)
        assert report.p_value == pytest.approx(wilcoxon_signed_rank(x, y))
        assert report.a12 == pytest.approx(a12(x, y))
        assert report.magnitude is magnitude(report.a12)
