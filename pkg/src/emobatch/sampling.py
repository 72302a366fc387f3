"""Latin hypercube sampling for the initial training design."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Bounds, RandomSource

__all__ = ["InitialDesign", "default_initial_size", "latin_hypercube"]


def default_initial_size(n: int) -> int:
    """Initial archive size used throughout: 11 n - 1."""
    return 11 * n - 1


@dataclass(frozen=True)
class InitialDesign:
    """A space-filling set of starting points."""

    points: np.ndarray
    size: int

    def __post_init__(self) -> None:
        if self.points.shape[0] != self.size:
            raise ValueError("size must match the number of points")


def latin_hypercube(size: int, bounds: Bounds, rng: RandomSource) -> InitialDesign:
    """Stratified random design: one point per stratum in every dimension.

    Each dimension is cut into `size` equal strata; a point lands uniformly
    inside each stratum and the strata are matched up across dimensions by
    independent random permutations.
    """
    if size < 1:
        raise ValueError("size must be positive")
    n = bounds.n
    Z = np.empty((size, n))
    for j in range(n):
        cells = rng.permutation(size)
        Z[:, j] = (cells + rng.uniform(size=size)) / size
    return InitialDesign(points=bounds.denormalize(Z), size=size)
