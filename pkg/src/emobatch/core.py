"""Shared domain types: bounds, populations, dominance, random streams.

Everything here treats optimization as minimization. Objective vectors are
plain float arrays; populations store decision and objective matrices side
by side so the numerical code stays vectorized.
"""
from __future__ import annotations

import abc
import bisect
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

__all__ = [
    "Bounds",
    "BudgetExhaustedError",
    "ConfigError",
    "DifferentiableVectorObjective",
    "EmptyTangentError",
    "EvaluatedSolution",
    "IllConditionedError",
    "NotSupportedError",
    "Population",
    "RandomSource",
    "Source",
    "dominates",
    "nondominated_filter",
    "nondominated_mask",
]


class BudgetExhaustedError(RuntimeError):
    """Raised when a true evaluation is requested beyond the budget."""


class IllConditionedError(RuntimeError):
    """Raised when a kernel matrix cannot be factorized even with maximal jitter."""


class EmptyTangentError(RuntimeError):
    """Raised when no usable tangent direction exists at a point."""


class NotSupportedError(RuntimeError):
    """Raised for requests outside the implemented scope (e.g. 4-objective hypervolume)."""


class ConfigError(ValueError):
    """Raised for invalid experiment or suite configuration."""


class Source(Enum):
    """Provenance of an objective vector."""

    TRUE_EVALUATION = 0
    SURROGATE_PREDICTION = 1


@dataclass(frozen=True)
class Bounds:
    """Box constraints of the decision space."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self) -> None:
        lo = np.asarray(self.lower, dtype=float)
        up = np.asarray(self.upper, dtype=float)
        if lo.ndim != 1 or lo.shape != up.shape or lo.size < 1:
            raise ValueError("bounds must be two equally sized 1-D arrays")
        if not np.all(lo < up):
            raise ValueError("every lower bound must be strictly below its upper bound")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", up)

    @property
    def n(self) -> int:
        return self.lower.size

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def contains(self, x: np.ndarray, atol: float = 0.0) -> bool:
        x = np.asarray(x, dtype=float)
        return bool(np.all(x >= self.lower - atol) and np.all(x <= self.upper + atol))

    def normalize(self, x: np.ndarray) -> np.ndarray:
        """Map points from the box to [0, 1]^n."""
        return (np.asarray(x, dtype=float) - self.lower) / self.span

    def denormalize(self, z: np.ndarray) -> np.ndarray:
        return self.lower + np.asarray(z, dtype=float) * self.span

    def clip(self, x: np.ndarray) -> np.ndarray:
        return np.clip(np.asarray(x, dtype=float), self.lower, self.upper)


@dataclass(frozen=True)
class EvaluatedSolution:
    """A decision vector together with its (true or predicted) objectives."""

    x: np.ndarray
    f: np.ndarray
    source: Source

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", np.asarray(self.x, dtype=float))
        object.__setattr__(self, "f", np.asarray(self.f, dtype=float))


class Population:
    """Ordered collection of evaluated solutions, stored as matrices.

    The order of members is part of the contract: deterministic algorithms
    break ties by the lowest index, so populations never reorder silently.
    """

    __slots__ = ("X", "F", "sources")

    def __init__(self, X: np.ndarray, F: np.ndarray, sources: np.ndarray) -> None:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        F = np.atleast_2d(np.asarray(F, dtype=float))
        sources = np.asarray(sources, dtype=np.uint8)
        if X.shape[0] != F.shape[0] or sources.shape != (X.shape[0],):
            raise ValueError("X, F and sources must agree on the member count")
        self.X = X
        self.F = F
        self.sources = sources

    @classmethod
    def from_arrays(cls, X: np.ndarray, F: np.ndarray, source: Source) -> "Population":
        X = np.atleast_2d(np.asarray(X, dtype=float))
        codes = np.full(X.shape[0], source.value, dtype=np.uint8)
        return cls(X, F, codes)

    @classmethod
    def empty(cls, n: int, m: int) -> "Population":
        return cls(np.empty((0, n)), np.empty((0, m)), np.empty((0,), dtype=np.uint8))

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def m(self) -> int:
        return self.F.shape[1]

    def __len__(self) -> int:
        return self.X.shape[0]

    def __getitem__(self, i: int) -> EvaluatedSolution:
        return EvaluatedSolution(self.X[i], self.F[i], Source(int(self.sources[i])))

    def __iter__(self):
        for i in range(len(self)):
            yield self[i]

    def subset(self, idx) -> "Population":
        idx = np.asarray(idx)
        return Population(self.X[idx], self.F[idx], self.sources[idx])

    @staticmethod
    def concat(*parts: "Population") -> "Population":
        parts = [p for p in parts if len(p) > 0]
        if not parts:
            raise ValueError("cannot concatenate zero non-empty populations")
        return Population(
            np.concatenate([p.X for p in parts]),
            np.concatenate([p.F for p in parts]),
            np.concatenate([p.sources for p in parts]),
        )


class RandomSource:
    """Seeded random stream with deterministically derivable children.

    A child stream is identified by the parent seed plus an integer path, so
    concurrent tasks can each own an independent stream while the whole tree
    stays a pure function of the root seed.
    """

    def __init__(self, seed: int, _path: tuple[int, ...] = ()) -> None:
        self.seed = int(seed)
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        self._path = tuple(int(p) for p in _path)
        self._gen = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence((self.seed, *self._path)))
        )

    def child(self, *indices: int) -> "RandomSource":
        return RandomSource(self.seed, self._path + tuple(indices))

    @property
    def generator(self) -> np.random.Generator:
        return self._gen

    def __getattr__(self, name: str):
        # Delegate draws (random, uniform, integers, ...) to the generator.
        return getattr(self._gen, name)

    def __repr__(self) -> str:
        return f"RandomSource(seed={self.seed}, path={self._path})"


def dominates(a: np.ndarray, b: np.ndarray) -> bool:
    """Pareto dominance for minimization: a <= b everywhere and a != b."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("objective vectors must have equal length")
    return bool(np.all(a <= b) and np.any(a != b))


def _nondominated_mask_2d(F: np.ndarray) -> np.ndarray:
    """Sweep by ascending f1; a point is dominated by the best f2 so far."""
    k = F.shape[0]
    order = np.lexsort((F[:, 1], F[:, 0]))
    f1 = F[order, 0]
    f2 = F[order, 1]
    starts = np.empty(k, dtype=bool)
    starts[0] = True
    starts[1:] = f1[1:] != f1[:-1]
    start_idx = np.flatnonzero(starts)
    group = np.cumsum(starts) - 1
    group_min = f2[start_idx]  # rows are f2-sorted within each f1 group
    before = np.concatenate(([np.inf], np.minimum.accumulate(group_min)[:-1]))
    dominated = (before[group] <= f2) | (group_min[group] < f2)
    mask = np.empty(k, dtype=bool)
    mask[order] = ~dominated
    return mask


def _nondominated_mask_3d(F: np.ndarray) -> np.ndarray:
    """Sweep by ascending f1, keeping a staircase of minimal (f2, f3) pairs."""
    k = F.shape[0]
    order = np.lexsort((F[:, 2], F[:, 1], F[:, 0]))
    S = F[order]
    keep = np.ones(k, dtype=bool)
    stair2: list[float] = []  # ascending f2
    stair3: list[float] = []  # strictly descending f3
    i = 0
    while i < k:
        j = i
        f1 = S[i, 0]
        while j < k and S[j, 0] == f1:
            j += 1
        # Against strictly smaller f1: weak (f2, f3) dominance suffices.
        for r in range(i, j):
            pos = bisect.bisect_right(stair2, S[r, 1]) - 1
            if pos >= 0 and stair3[pos] <= S[r, 2]:
                keep[r] = False
        # Within the equal-f1 group: planar dominance on (f2, f3).
        best3 = np.inf  # best f3 among strictly smaller f2 in this group
        r = i
        while r < j:
            r2 = r
            f2 = S[r, 1]
            while r2 < j and S[r2, 1] == f2:
                r2 += 1
            min3 = S[r, 2]  # rows are f3-sorted within the (f1, f2) block
            for q in range(r, r2):
                if best3 <= S[q, 2] or S[q, 2] > min3:
                    keep[q] = False
            best3 = min(best3, min3)
            r = r2
        # Fold the group into the staircase.
        for r in range(i, j):
            f2, f3 = S[r, 1], S[r, 2]
            pos = bisect.bisect_right(stair2, f2) - 1
            if pos >= 0 and stair3[pos] <= f3:
                continue  # an existing pair is at least as good
            ins = bisect.bisect_left(stair2, f2)
            end = ins
            while end < len(stair2) and stair3[end] >= f3:
                end += 1
            stair2[ins:end] = [f2]
            stair3[ins:end] = [f3]
        i = j
    mask = np.empty(k, dtype=bool)
    mask[order] = keep
    return mask


def nondominated_mask(F: np.ndarray, chunk: int = 256) -> np.ndarray:
    """Boolean mask of the members not dominated by any other member.

    Duplicates in objective space never dominate each other, so all copies
    of a non-dominated vector are kept.  Two- and three-objective inputs
    use sorted sweeps; higher dimensions fall back to blocked pairwise
    comparison (`chunk` rows at a time).
    """
    F = np.atleast_2d(np.asarray(F, dtype=float))
    k = F.shape[0]
    mask = np.ones(k, dtype=bool)
    if k <= 1:
        return mask
    if F.shape[1] == 2:
        return _nondominated_mask_2d(F)
    if F.shape[1] == 3:
        return _nondominated_mask_3d(F)
    for start in range(0, k, chunk):
        block = F[start : start + chunk]  # candidates being tested
        le = (F[:, None, :] <= block[None, :, :]).all(axis=2)
        lt = (F[:, None, :] < block[None, :, :]).any(axis=2)
        dominated = (le & lt).any(axis=0)
        mask[start : start + chunk] = ~dominated
    return mask


def nondominated_filter(pop: Population) -> Population:
    """Keep exactly the non-dominated members, preserving input order."""
    if len(pop) == 0:
        return pop
    return pop.subset(nondominated_mask(pop.F))


class DifferentiableVectorObjective(abc.ABC):
    """A twice-differentiable vector objective F: R^n -> R^m.

    Both Gaussian-process surrogate banks and analytic test functions
    implement this interface, which is what the tangent-space machinery
    consumes.
    """

    @property
    @abc.abstractmethod
    def n_var(self) -> int: ...

    @property
    @abc.abstractmethod
    def n_obj(self) -> int: ...

    @abc.abstractmethod
    def value(self, x: np.ndarray) -> np.ndarray:
        """Objective vector at x, shape (m,)."""

    def values(self, X: np.ndarray) -> np.ndarray:
        """Objective matrix for a batch of points, shape (N, m)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        return np.stack([self.value(x) for x in X])

    @abc.abstractmethod
    def jacobian(self, x: np.ndarray) -> np.ndarray:
        """Gradient rows, shape (m, n)."""

    @abc.abstractmethod
    def hessians(self, x: np.ndarray) -> np.ndarray:
        """Per-objective Hessians, shape (m, n, n), each symmetric."""
