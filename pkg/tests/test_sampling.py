"""Latin hypercube design: stratification, determinism, bounds."""
import numpy as np
import pytest

from emobatch import Bounds, RandomSource
from emobatch.sampling import InitialDesign, default_initial_size, latin_hypercube


def unit_bounds(n):
    return Bounds(np.zeros(n), np.ones(n))


class TestLatinHypercube:
    def test_one_point_per_stratum_1d(self):
        design = latin_hypercube(4, unit_bounds(1), RandomSource(0))
        strata = np.floor(design.points[:, 0] * 4).astype(int)
        assert sorted(strata) == [0, 1, 2, 3]

    def test_stratification_every_dimension_many_seeds(self):
        for seed in range(100):
            design = latin_hypercube(8, unit_bounds(3), RandomSource(seed))
            for j in range(3):
                bins = np.floor(design.points[:, j] * 8).astype(int)
                counts = np.bincount(bins, minlength=8)
                assert counts.tolist() == [1] * 8, (seed, j)

    def test_respects_bounds(self):
        b = Bounds(np.array([-3.0, 10.0]), np.array([-1.0, 20.0]))
        design = latin_hypercube(16, b, RandomSource(1))
        assert np.all(design.points >= b.lower)
        assert np.all(design.points <= b.upper)
        # stratification still holds after rescaling
        z = b.normalize(design.points)
        for j in range(2):
            counts = np.bincount(np.floor(z[:, j] * 16).astype(int), minlength=16)
            assert counts.tolist() == [1] * 16

    def test_deterministic(self):
        a = latin_hypercube(12, unit_bounds(4), RandomSource(9))
        b = latin_hypercube(12, unit_bounds(4), RandomSource(9))
        assert np.array_equal(a.points, b.points)

    def test_columns_not_identically_permuted(self):
        design = latin_hypercube(32, unit_bounds(2), RandomSource(2))
        ranks = np.argsort(np.argsort(design.points, axis=0), axis=0)
        assert not np.array_equal(ranks[:, 0], ranks[:, 1])

    def test_size_validation(self):
        with pytest.raises(ValueError):
            latin_hypercube(0, unit_bounds(2), RandomSource(0))

    def test_design_size_agreement(self):
        with pytest.raises(ValueError):
            InitialDesign(points=np.zeros((3, 2)), size=4)


def test_default_initial_size():
    assert default_initial_size(5) == 54
    assert default_initial_size(10) == 109
    assert default_initial_size(30) == 329
