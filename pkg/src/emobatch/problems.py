"""Benchmark problems with analytically known, possibly disconnected Pareto fronts.

Families
--------
* ``ZDT3`` and ``ZDT3_STAR``, a parametric generalization whose front
  disconnection is tunable.
* ``DTLZ2``, its inverted form ``MINUS_DTLZ2``, ``DTLZ7`` and the parametric
  ``DTLZ7_STAR``.
* ``WFG2`` and the parametric ``WFG2_STAR``.

The parametric families share three controls (:class:`DisconnectParams`):
``regions`` sets how many disconnected pieces the front breaks into,
``alpha`` shapes each piece (>1 concave, <1 convex, 1 linear) and ``beta``
moves the pieces around.  The classic problems are the special cases
ZDT3 = ZDT3_STAR(10, 1, 1), DTLZ7 = DTLZ7_STAR(3, 0, 1) and
WFG2 = WFG2_STAR(5, 1, 1).

Besides evaluation the module offers true-Pareto-front sampling with
reconstructible decision vectors (:func:`sample_true_pf`), segment counting
and coverage analysis for disconnected fronts, and a thread-safe
:class:`EvaluationBudget` that caps expensive evaluations.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .core import (
    Bounds,
    BudgetExhaustedError,
    ConfigError,
    DifferentiableVectorObjective,
    NotSupportedError,
    Population,
    RandomSource,
    Source,
    nondominated_mask,
)

__all__ = [
    "DisconnectParams",
    "EvaluationBudget",
    "Family",
    "ProblemSpec",
    "ShiftedSphereObjectives",
    "available_problems",
    "count_segments",
    "default_wfg_position_count",
    "evaluate_batch",
    "evaluate_true",
    "make_problem",
    "objective_values",
    "pf_segments",
    "sample_true_pf",
    "segment_coverage",
]


class Family(Enum):
    """Problem family identifiers."""

    ZDT3 = "zdt3"
    ZDT3_STAR = "zdt3_star"
    DTLZ2 = "dtlz2"
    MINUS_DTLZ2 = "minus_dtlz2"
    DTLZ7 = "dtlz7"
    DTLZ7_STAR = "dtlz7_star"
    WFG2 = "wfg2"
    WFG2_STAR = "wfg2_star"


@dataclass(frozen=True)
class DisconnectParams:
    """Controls for the parametric disconnected-front families.

    ``regions`` drives the number of disconnected pieces, ``alpha`` the
    shape of each piece (>1 concave, <1 convex, 1 linear) and ``beta``
    the location of the pieces.
    """

    regions: int
    alpha: float
    beta: float

    def __post_init__(self) -> None:
        if self.regions < 1:
            raise ConfigError("regions must be a positive integer")
        if self.alpha < 0:
            raise ConfigError("alpha must be non-negative")
        if self.beta <= 0:
            raise ConfigError("beta must be positive")


# Parameter triples that make the parametric families coincide with the
# classic problems.
_CLASSIC_PARAMS = {
    Family.ZDT3: DisconnectParams(10, 1.0, 1.0),
    Family.DTLZ7: DisconnectParams(3, 0.0, 1.0),
    Family.WFG2: DisconnectParams(5, 1.0, 1.0),
}

_ZDT_FAMILIES = (Family.ZDT3, Family.ZDT3_STAR)
_DTLZ7_FAMILIES = (Family.DTLZ7, Family.DTLZ7_STAR)
_WFG_FAMILIES = (Family.WFG2, Family.WFG2_STAR)
_STAR_FAMILIES = (Family.ZDT3_STAR, Family.DTLZ7_STAR, Family.WFG2_STAR)


def default_wfg_position_count(n: int, m: int) -> int:
    """Default number of WFG position variables.

    Starts from 2(m-1) and grows in multiples of (m-1) until the distance
    variable count n-k is even, as the pairwise reduction requires.
    """
    k = 2 * (m - 1)
    while k < n and (n - k) % 2 != 0:
        k += m - 1
    if k >= n or (n - k) % 2 != 0:
        raise ConfigError(
            f"no valid position-variable count for n={n}, m={m}: "
            "need k divisible by m-1 with n-k positive and even"
        )
    return k


@dataclass(frozen=True)
class ProblemSpec:
    """Immutable description of one problem instance."""

    family: Family
    n: int
    m: int
    params: DisconnectParams | None = None
    wfg_k: int | None = None
    label: str = ""

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ConfigError("at least two objectives are required")
        if self.family in _ZDT_FAMILIES:
            if self.m != 2:
                raise ConfigError("ZDT families are bi-objective")
            if self.n < 2:
                raise ConfigError("ZDT families need n >= 2")
        else:
            if self.m not in (2, 3):
                raise ConfigError("supported objective counts are 2 and 3")
            if self.n < self.m:
                raise ConfigError("need n >= m")
        if self.family in _STAR_FAMILIES:
            if self.params is None:
                classic = {
                    Family.ZDT3_STAR: Family.ZDT3,
                    Family.DTLZ7_STAR: Family.DTLZ7,
                    Family.WFG2_STAR: Family.WFG2,
                }[self.family]
                object.__setattr__(self, "params", _CLASSIC_PARAMS[classic])
        elif self.params is not None:
            raise ConfigError(f"{self.family.value} takes no disconnect parameters")
        if self.family in _WFG_FAMILIES:
            k = self.wfg_k
            if k is None:
                k = default_wfg_position_count(self.n, self.m)
                object.__setattr__(self, "wfg_k", k)
            if k % (self.m - 1) != 0 or not (self.m - 1) <= k < self.n:
                raise ConfigError(
                    "WFG position-variable count must be a positive multiple "
                    "of m-1 and smaller than n"
                )
            if (self.n - k) % 2 != 0:
                raise ConfigError("WFG distance-variable count must be even")
        elif self.wfg_k is not None:
            raise ConfigError("wfg_k only applies to WFG families")
        if not self.label:
            object.__setattr__(self, "label", self.family.value)

    @property
    def bounds(self) -> Bounds:
        if self.family in _WFG_FAMILIES:
            upper = 2.0 * np.arange(1, self.n + 1)
        else:
            upper = np.ones(self.n)
        return Bounds(np.zeros(self.n), upper)

    def effective_params(self) -> DisconnectParams:
        if self.family in _STAR_FAMILIES:
            return self.params  # filled at construction
        if self.family in _CLASSIC_PARAMS:
            return _CLASSIC_PARAMS[self.family]
        raise NotSupportedError(f"{self.family.value} has no disconnect parameters")


class EvaluationBudget:
    """Thread-safe counter capping the number of expensive evaluations."""

    def __init__(self, maximum: int) -> None:
        if maximum < 0:
            raise ConfigError("budget maximum must be non-negative")
        self._maximum = int(maximum)
        self._consumed = 0
        self._lock = threading.Lock()

    @property
    def maximum(self) -> int:
        return self._maximum

    @property
    def consumed(self) -> int:
        return self._consumed

    @property
    def remaining(self) -> int:
        return self._maximum - self._consumed

    def charge(self, amount: int = 1) -> None:
        """Consume `amount` evaluations, failing if the cap would be passed."""
        if amount < 0:
            raise ValueError("amount must be non-negative")
        with self._lock:
            if self._consumed + amount > self._maximum:
                raise BudgetExhaustedError(
                    f"evaluation budget exhausted: {self._consumed} consumed, "
                    f"{amount} requested, {self._maximum} allowed"
                )
            self._consumed += amount

    def __repr__(self) -> str:
        return f"EvaluationBudget({self._consumed}/{self._maximum})"


# ---------------------------------------------------------------------------
# Closed-form evaluations (vectorized over rows of X).
# ---------------------------------------------------------------------------

def _zdt3_star(X: np.ndarray, p: DisconnectParams) -> np.ndarray:
    x1 = X[:, 0]
    n = X.shape[1]
    g = 1.0 + 9.0 * X[:, 1:].sum(axis=1) / (n - 1)
    wave = np.power(x1, p.alpha) * np.sin(p.regions * np.pi * np.power(x1, p.beta))
    f2 = g * (1.0 - np.sqrt(x1 / g)) - wave
    return np.column_stack([x1, f2])


def _dtlz2(X: np.ndarray, m: int, invert: bool) -> np.ndarray:
    n = X.shape[1]
    g = ((X[:, m - 1 :] - 0.5) ** 2).sum(axis=1)
    theta = X[:, : m - 1] * (np.pi / 2.0)
    cos = np.cos(theta)
    sin = np.sin(theta)
    F = np.empty((X.shape[0], m))
    for j in range(m):
        val = 1.0 + g
        for i in range(m - 1 - j):
            val = val * cos[:, i]
        if j > 0:
            val = val * sin[:, m - 1 - j]
        F[:, j] = val
    if invert:
        g_max = 0.25 * (n - m + 1)
        F = (1.0 + g_max) - F
    return F


def _dtlz7_star(X: np.ndarray, m: int, p: DisconnectParams) -> np.ndarray:
    free = X[:, : m - 1]
    g = 1.0 + 9.0 * X[:, m - 1 :].mean(axis=1)
    wave = 1.0 + np.power(free, p.alpha) * np.sin(
        p.regions * np.pi * np.power(free, p.beta)
    )
    h = m - (free / (1.0 + g)[:, None] * wave).sum(axis=1)
    return np.column_stack([free, (1.0 + g) * h])


def _wfg2_star(Z: np.ndarray, m: int, k: int, p: DisconnectParams) -> np.ndarray:
    n = Z.shape[1]
    l = n - k
    y = Z / (2.0 * np.arange(1, n + 1))

    # First transition: shift distance variables linearly about 0.35.
    t1 = y.copy()
    tail = y[:, k:]
    t1[:, k:] = np.abs(tail - 0.35) / np.abs(np.floor(0.35 - tail) + 0.35)

    # Second transition: non-separable reduction of distance-variable pairs.
    a = t1[:, k : k + l : 2]
    b = t1[:, k + 1 : k + l : 2]
    nonsep = (a + b + 2.0 * np.abs(a - b)) / 3.0

    # Third transition: weighted sums (unit weights = means) per chunk.
    chunk = k // (m - 1)
    t3 = np.empty((Z.shape[0], m))
    for i in range(m - 1):
        t3[:, i] = t1[:, i * chunk : (i + 1) * chunk].mean(axis=1)
    t3[:, m - 1] = nonsep.mean(axis=1)

    # Shape stage.  All degeneracy flags are 1 here, so the underlying
    # parameters equal the transition outputs directly.
    x = t3
    x_m = x[:, m - 1]
    cos = np.cos(x[:, : m - 1] * (np.pi / 2.0))
    sin = np.sin(x[:, : m - 1] * (np.pi / 2.0))
    F = np.empty((Z.shape[0], m))
    for j in range(m - 1):
        h = np.ones(Z.shape[0])
        for i in range(m - 1 - j):
            h = h * (1.0 - cos[:, i])
        if j > 0:
            h = h * (1.0 - sin[:, m - 1 - j])
        F[:, j] = x_m + 2.0 * (j + 1) * h
    x1 = x[:, 0]
    h_last = 1.0 - np.power(x1, p.alpha) * np.cos(
        p.regions * np.power(x1, p.beta) * np.pi
    ) ** 2
    F[:, m - 1] = x_m + 2.0 * m * h_last
    return F


def objective_values(spec: ProblemSpec, X: np.ndarray) -> np.ndarray:
    """Exact objective values, without budget accounting.

    Intended for analysis and plotting; optimization loops must go through
    :func:`evaluate_true` so the evaluation budget stays honest.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != spec.n:
        raise ValueError(f"expected {spec.n} variables, got {X.shape[1]}")
    fam = spec.family
    if fam in _ZDT_FAMILIES:
        return _zdt3_star(X, spec.effective_params())
    if fam is Family.DTLZ2:
        return _dtlz2(X, spec.m, invert=False)
    if fam is Family.MINUS_DTLZ2:
        return _dtlz2(X, spec.m, invert=True)
    if fam in _DTLZ7_FAMILIES:
        return _dtlz7_star(X, spec.m, spec.effective_params())
    if fam in _WFG_FAMILIES:
        return _wfg2_star(X, spec.m, spec.wfg_k, spec.effective_params())
    raise NotSupportedError(f"unknown family {fam}")


def evaluate_true(
    spec: ProblemSpec, x: np.ndarray, budget: EvaluationBudget | None = None
) -> np.ndarray:
    """Evaluate one decision vector, charging the budget if one is given."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.size != spec.n:
        raise ValueError(f"expected a vector of {spec.n} variables")
    if not spec.bounds.contains(x, atol=1e-9):
        raise ValueError("decision vector is out of bounds")
    if budget is not None:
        budget.charge(1)
    return objective_values(spec, x[None, :])[0]


def evaluate_batch(
    spec: ProblemSpec, X: np.ndarray, budget: EvaluationBudget | None = None
) -> Population:
    """Evaluate rows of X in order, charging the budget once per row."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    F = np.empty((X.shape[0], spec.m))
    for i, row in enumerate(X):
        F[i] = evaluate_true(spec, row, budget)
    return Population.from_arrays(X, F, Source.TRUE_EVALUATION)


# ---------------------------------------------------------------------------
# True Pareto-front sampling.
# ---------------------------------------------------------------------------

def _stratified_unit(rng: RandomSource, size: int) -> np.ndarray:
    """One jittered point per equal-width cell of [0, 1]."""
    return (np.arange(size) + rng.uniform(size=size)) / size


def _pf_parameter_grid(spec: ProblemSpec, rng: RandomSource, sweep: int) -> np.ndarray:
    """Decision vectors parameterizing the Pareto set, before filtering."""
    fam = spec.family
    n, m = spec.n, spec.m
    if fam in _ZDT_FAMILIES:
        t = _stratified_unit(rng, sweep)
        X = np.zeros((sweep, n))
        X[:, 0] = t
        return X
    if fam in (Family.DTLZ2, Family.MINUS_DTLZ2, *_DTLZ7_FAMILIES):
        side = int(np.ceil(sweep ** (1.0 / (m - 1))))
        axes = [_stratified_unit(rng.child(i), side) for i in range(m - 1)]
        mesh = np.meshgrid(*axes, indexing="ij")
        free = np.column_stack([g.ravel() for g in mesh])
        X = np.zeros((free.shape[0], n))
        X[:, : m - 1] = free
        if fam is Family.DTLZ2:
            X[:, m - 1 :] = 0.5  # distance term at its minimum
        # MINUS_DTLZ2 and DTLZ7 keep distance variables at 0: the former
        # needs the distance term maximal, the latter minimal.
        return X
    if fam in _WFG_FAMILIES:
        k = spec.wfg_k
        side = int(np.ceil(sweep ** (1.0 / (m - 1))))
        axes = [_stratified_unit(rng.child(i), side) for i in range(m - 1)]
        mesh = np.meshgrid(*axes, indexing="ij")
        free = np.column_stack([g.ravel() for g in mesh])
        scale = 2.0 * np.arange(1, n + 1)
        X = np.empty((free.shape[0], n))
        chunk = k // (m - 1)
        for i in range(m - 1):
            cols = slice(i * chunk, (i + 1) * chunk)
            X[:, cols] = free[:, i][:, None] * scale[cols]
        X[:, k:] = 0.35 * scale[k:]  # distance variables at their optimum
        return X
    raise NotSupportedError(f"no Pareto-front parameterization for {fam}")


def _farthest_point_subset(F: np.ndarray, count: int) -> np.ndarray:
    """Greedy even-coverage subset; starts at the first-objective minimum."""
    n = len(F)
    if count >= n:
        return np.arange(n)
    chosen = np.empty(count, dtype=int)
    chosen[0] = int(np.argmin(F[:, 0]))
    dist = np.linalg.norm(F - F[chosen[0]], axis=1)
    for i in range(1, count):
        nxt = int(np.argmax(dist))
        chosen[i] = nxt
        np.minimum(dist, np.linalg.norm(F - F[nxt], axis=1), out=dist)
    return np.sort(chosen)


def _even_arc_subset(F: np.ndarray, count: int) -> np.ndarray:
    """Subset of a bi-objective front evenly spaced in arc length.

    Greedy farthest-point selection measures straight-line distance, which
    lets chords across concave bends leave uneven consecutive gaps along
    the curve; spacing by cumulative arc length avoids that.
    """
    n = len(F)
    if count >= n:
        return np.arange(n)
    order = np.argsort(F[:, 0], kind="stable")
    S = F[order]
    arc = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(S, axis=0), axis=1))])
    targets = arc[-1] * (np.arange(count) + 0.5) / count
    idx = np.clip(np.searchsorted(arc, targets), 0, n - 1)
    for i in range(1, count):  # keep picks distinct
        if idx[i] <= idx[i - 1]:
            idx[i] = idx[i - 1] + 1
    for i in range(count - 1, -1, -1):  # push overflow back inside range
        limit = n - 1 - (count - 1 - i)
        if idx[i] > limit:
            idx[i] = limit
    return np.sort(order[idx])


def sample_true_pf(spec: ProblemSpec, count: int, rng: RandomSource) -> Population:
    """Sample `count` spread-out points of the true Pareto front.

    A dense sweep of the front's parameterization is filtered down to its
    non-dominated subset (disconnected fronts shed the dominated arcs of
    the generating curve) and thinned to `count`: evenly in arc length for
    bi-objective curves, by farthest-point selection otherwise.  The
    returned decision vectors reproduce the returned objective values
    exactly under :func:`objective_values`.
    """
    if count < 1:
        raise ValueError("count must be positive")
    # Curves need a dense sweep so that steep arcs still sample finely in
    # arc length; surfaces grow quadratically, so start them smaller.
    sweep = max(16384, 8 * count) if spec.m == 2 else max(4096, 4 * count)
    for _ in range(4):
        X = _pf_parameter_grid(spec, rng, sweep)
        F = objective_values(spec, X)
        keep = nondominated_mask(F)
        X, F = X[keep], F[keep]
        if len(F) >= count:
            break
        sweep *= 4
    else:
        raise NotSupportedError(
            f"could not draw {count} non-dominated front samples for {spec.label}"
        )
    idx = _even_arc_subset(F, count) if spec.m == 2 else _farthest_point_subset(F, count)
    return Population.from_arrays(X[idx], F[idx], Source.TRUE_EVALUATION)


# ---------------------------------------------------------------------------
# Disconnected-front structure analysis.
# ---------------------------------------------------------------------------

def _front_array(front) -> np.ndarray:
    F = front.F if isinstance(front, Population) else np.asarray(front, dtype=float)
    return np.atleast_2d(F)


def count_segments(front, gap_factor: float = 5.0) -> int:
    """Number of connected pieces of a bi-objective front.

    Sorts by the first objective and splits where the consecutive-point
    Euclidean gap exceeds gap_factor times the median gap.
    """
    F = _front_array(front)
    if F.shape[1] != 2:
        raise NotSupportedError("segment counting requires exactly two objectives")
    if len(F) < 2:
        return 1
    S = F[np.argsort(F[:, 0], kind="stable")]
    gaps = np.linalg.norm(np.diff(S, axis=0), axis=1)
    return 1 + int(np.count_nonzero(gaps > gap_factor * np.median(gaps)))


def pf_segments(front, gap_factor: float = 5.0) -> list[np.ndarray]:
    """Indices of each connected piece of a front.

    Bi-objective fronts use the sorted-gap rule of :func:`count_segments`.
    Higher-dimensional fronts use connected components of the graph that
    joins points closer than gap_factor times the median nearest-neighbor
    distance.
    """
    F = _front_array(front)
    n = len(F)
    if n == 0:
        return []
    if n == 1:
        return [np.array([0])]
    if F.shape[1] == 2:
        order = np.argsort(F[:, 0], kind="stable")
        S = F[order]
        gaps = np.linalg.norm(np.diff(S, axis=0), axis=1)
        breaks = np.flatnonzero(gaps > gap_factor * np.median(gaps))
        pieces = np.split(order, breaks + 1)
        return [np.sort(p) for p in pieces]
    diff = F[:, None, :] - F[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    np.fill_diagonal(dist, np.inf)
    nn = dist.min(axis=1)
    eps = gap_factor * np.median(nn)
    adjacency = dist <= eps
    labels = np.full(n, -1, dtype=int)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        stack = [start]
        labels[start] = current
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adjacency[i]):
                if labels[j] < 0:
                    labels[j] = current
                    stack.append(j)
        current += 1
    return [np.flatnonzero(labels == c) for c in range(current)]


def segment_coverage(
    front, pf: Population, gap_factor: float = 5.0, tol: float | None = None
) -> tuple[int, int]:
    """How many true-front segments have a nearby point in `front`.

    A segment counts as covered when any front point lies within `tol`
    (default: 5% of the true front's bounding-box diagonal) of any of the
    segment's sampled points.  Returns (covered, total).
    """
    F = _front_array(front)
    P = pf.F
    segments = pf_segments(pf, gap_factor)
    if tol is None:
        tol = 0.05 * float(np.linalg.norm(P.max(axis=0) - P.min(axis=0)))
    covered = 0
    for seg in segments:
        seg_pts = P[seg]
        d2 = ((F[:, None, :] - seg_pts[None, :, :]) ** 2).sum(axis=2)
        if d2.size and float(d2.min()) <= tol * tol:
            covered += 1
    return covered, len(segments)


# ---------------------------------------------------------------------------
# Analytic smooth objectives for derivative-based components.
# ---------------------------------------------------------------------------

class ShiftedSphereObjectives(DifferentiableVectorObjective):
    """Vector objective f_j(x) = ||x - c_j||^2 with analytic derivatives.

    With centers at the origin and the first coordinate axis unit vector
    this is the classic convex bi-objective whose Pareto set is the segment
    joining the centers.
    """

    def __init__(self, centers: np.ndarray) -> None:
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        if centers.shape[0] < 2:
            raise ConfigError("need at least two objectives")
        self._centers = centers

    @property
    def n_var(self) -> int:
        return self._centers.shape[1]

    @property
    def n_obj(self) -> int:
        return self._centers.shape[0]

    def value(self, x: np.ndarray) -> np.ndarray:
        d = np.asarray(x, dtype=float)[None, :] - self._centers
        return (d**2).sum(axis=1)

    def jacobian(self, x: np.ndarray) -> np.ndarray:
        return 2.0 * (np.asarray(x, dtype=float)[None, :] - self._centers)

    def hessians(self, x: np.ndarray) -> np.ndarray:
        eye = 2.0 * np.eye(self.n_var)
        return np.repeat(eye[None, :, :], self.n_obj, axis=0)


# ---------------------------------------------------------------------------
# Named instances.
# ---------------------------------------------------------------------------

# The seven named parametric instances bind fixed (regions, alpha, beta)
# triples; classics take the defaults.  Values: family, default m, params.
_NAMED_INSTANCES: dict[str, tuple[Family, int, DisconnectParams | None]] = {
    "zdt3": (Family.ZDT3, 2, None),
    "zdt31": (Family.ZDT3_STAR, 2, DisconnectParams(10, 10.0, 1.0)),
    "zdt32": (Family.ZDT3_STAR, 2, DisconnectParams(5, 0.0, 5.0)),
    "dtlz2": (Family.DTLZ2, 3, None),
    "minusdtlz2": (Family.MINUS_DTLZ2, 3, None),
    "dtlz7": (Family.DTLZ7, 3, None),
    "dtlz71": (Family.DTLZ7_STAR, 3, DisconnectParams(5, 0.0, 1.0)),
    "dtlz72": (Family.DTLZ7_STAR, 3, DisconnectParams(3, 0.0, 2.0)),
    "wfg2": (Family.WFG2, 2, None),
    "wfg21": (Family.WFG2_STAR, 2, DisconnectParams(10, 1.0, 1.0)),
    "wfg22": (Family.WFG2_STAR, 2, DisconnectParams(5, 5.0, 1.0)),
    "wfg23": (Family.WFG2_STAR, 2, DisconnectParams(5, 1.0, 5.0)),
}


def available_problems() -> list[str]:
    """Stable identifiers accepted by :func:`make_problem`."""
    return sorted(_NAMED_INSTANCES)


def make_problem(
    name: str, n: int, m: int | None = None, wfg_k: int | None = None
) -> ProblemSpec:
    """Build a named problem instance.

    ZDT instances are always bi-objective.  DTLZ instances default to three
    objectives and WFG instances to two; both accept an explicit m of 2
    or 3.
    """
    key = name.strip().lower()
    if key not in _NAMED_INSTANCES:
        raise ConfigError(
            f"unknown problem {name!r}; available: {', '.join(available_problems())}"
        )
    family, default_m, params = _NAMED_INSTANCES[key]
    if m is None:
        m = default_m
    if family in _ZDT_FAMILIES and m != 2:
        raise ConfigError(f"{name} is bi-objective")
    return ProblemSpec(family=family, n=n, m=m, params=params, wfg_k=wfg_k, label=key)
