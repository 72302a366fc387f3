"""Tangent-space interpolation around stationary points of a vector objective.

At a Pareto-optimal point some convex combination of the objective gradients
vanishes.  Differentiating that stationarity condition along a curve of
optimal points yields a linear system whose null space contains the tangent
directions of the (m-1)-dimensional optimal manifold.  This module estimates
the combination weights, extracts tangent bases from the null space, and
scatters candidate points along those tangents.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np

from .core import (
    Bounds,
    ConfigError,
    DifferentiableVectorObjective,
    EmptyTangentError,
    Population,
    Source,
    nondominated_mask,
)

__all__ = [
    "InterpolationConfig",
    "KktMultipliers",
    "TangentBasis",
    "estimate_multipliers",
    "interpolate",
    "kkt_system_matrix",
    "tangent_vectors",
]

logger = logging.getLogger(__name__)

STATIONARITY_TOLERANCE = 1e-10
MAX_PROJECTION_ITERATIONS = 500
NULL_SPACE_RTOL = 1e-8
DIRECTION_NORM_FLOOR = 1e-10
DUPLICATE_TOLERANCE = 1e-6


@dataclass(frozen=True)
class KktMultipliers:
    """Convex combination weights of the objective gradients at a point."""

    alpha: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        alpha = np.asarray(self.alpha, dtype=float)
        object.__setattr__(self, "alpha", alpha)
        if np.any(alpha < -1e-12) or abs(alpha.sum() - 1.0) > 1e-9:
            raise ValueError("multipliers must form a point on the unit simplex")


@dataclass(frozen=True)
class TangentBasis:
    """Orthonormal tangent directions and the worst null-space residual."""

    directions: np.ndarray
    residual: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "directions", np.atleast_2d(np.asarray(self.directions, dtype=float)))

    @property
    def count(self) -> int:
        return self.directions.shape[0]


@dataclass(frozen=True)
class InterpolationConfig:
    """How many candidates to scatter and how far to step along tangents."""

    count_total: int = 100
    step_scale: float = 0.1
    eta_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self) -> None:
        if self.count_total < 1:
            raise ConfigError("candidate count must be at least 1")
        if self.step_scale < 0:
            raise ConfigError("step scale must be non-negative")
        lo, hi = self.eta_range
        if not 0.0 <= lo < hi <= 1.0:
            raise ConfigError("eta range must satisfy 0 <= low < high <= 1")


def _project_to_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto {a : a >= 0, sum a = 1} (sort-based)."""
    u = np.sort(v)[::-1]
    cumulative = np.cumsum(u) - 1.0
    counts = np.arange(1, v.size + 1)
    feasible = u - cumulative / counts > 0
    k = counts[feasible][-1]
    threshold = cumulative[k - 1] / k
    return np.maximum(v - threshold, 0.0)


def _project2(v0: float, v1: float) -> tuple[float, float]:
    """Scalar form of the simplex projection for two weights."""
    shift = 0.5 * (v0 + v1 - 1.0)
    w0 = v0 - shift
    w1 = v1 - shift
    if w1 <= 0.0:
        return 1.0, 0.0
    if w0 <= 0.0:
        return 0.0, 1.0
    return w0, w1


def _project3(v0: float, v1: float, v2: float) -> tuple[float, float, float]:
    """Scalar form of the simplex projection for three weights."""
    u0, u1, u2 = sorted((v0, v1, v2), reverse=True)
    total = u0 + u1 + u2 - 1.0
    if u2 - total / 3.0 > 0.0:
        threshold = total / 3.0
    elif u1 - 0.5 * (u0 + u1 - 1.0) > 0.0:
        threshold = 0.5 * (u0 + u1 - 1.0)
    else:
        threshold = u0 - 1.0
    w0 = v0 - threshold
    w1 = v1 - threshold
    w2 = v2 - threshold
    return (
        w0 if w0 > 0.0 else 0.0,
        w1 if w1 > 0.0 else 0.0,
        w2 if w2 > 0.0 else 0.0,
    )


def _descend_two(gram: np.ndarray, step: float) -> np.ndarray:
    """Projected gradient descent on the 2-weight quadratic, scalar arithmetic."""
    g00 = float(gram[0, 0])
    g01 = float(gram[0, 1])
    g11 = float(gram[1, 1])
    a0 = a1 = 0.5
    for _ in range(MAX_PROJECTION_ITERATIONS):
        d0 = 2.0 * (g00 * a0 + g01 * a1)
        d1 = 2.0 * (g01 * a0 + g11 * a1)
        s0, s1 = _project2(a0 - d0, a1 - d1)
        stationarity = max(abs(a0 - s0), abs(a1 - s1))
        a0, a1 = _project2(a0 - step * d0, a1 - step * d1)
        if stationarity <= STATIONARITY_TOLERANCE:
            break
    return np.array([a0, a1])


def _descend_three(gram: np.ndarray, step: float) -> np.ndarray:
    """Projected gradient descent on the 3-weight quadratic, scalar arithmetic."""
    g00 = float(gram[0, 0])
    g01 = float(gram[0, 1])
    g02 = float(gram[0, 2])
    g11 = float(gram[1, 1])
    g12 = float(gram[1, 2])
    g22 = float(gram[2, 2])
    third = 1.0 / 3.0
    a0 = a1 = a2 = third
    for _ in range(MAX_PROJECTION_ITERATIONS):
        d0 = 2.0 * (g00 * a0 + g01 * a1 + g02 * a2)
        d1 = 2.0 * (g01 * a0 + g11 * a1 + g12 * a2)
        d2 = 2.0 * (g02 * a0 + g12 * a1 + g22 * a2)
        s0, s1, s2 = _project3(a0 - d0, a1 - d1, a2 - d2)
        stationarity = max(abs(a0 - s0), abs(a1 - s1), abs(a2 - s2))
        a0, a1, a2 = _project3(a0 - step * d0, a1 - step * d1, a2 - step * d2)
        if stationarity <= STATIONARITY_TOLERANCE:
            break
    return np.array([a0, a1, a2])


def estimate_multipliers(
    objective: DifferentiableVectorObjective, x: np.ndarray
) -> KktMultipliers:
    """Simplex-constrained least squares on the gradient combination.

    Minimizes the norm of the weighted gradient sum by projected gradient
    descent; always returns a feasible simplex point, even when the point is
    far from stationary.  The two- and three-objective cases run the same
    descent in scalar arithmetic, which dominates the interpolation cost.
    """
    J = np.atleast_2d(np.asarray(objective.jacobian(x), dtype=float))
    m = J.shape[0]
    gram = J @ J.T
    alpha = np.full(m, 1.0 / m)
    largest = float(np.linalg.eigvalsh(gram)[-1])
    if largest > 0:
        step = 1.0 / (2.0 * largest)
        if m == 2:
            alpha = _descend_two(gram, step)
        elif m == 3:
            alpha = _descend_three(gram, step)
        else:
            for _ in range(MAX_PROJECTION_ITERATIONS):
                gradient = 2.0 * gram @ alpha
                moved = _project_to_simplex(alpha - step * gradient)
                stationarity = np.max(np.abs(alpha - _project_to_simplex(alpha - gradient)))
                alpha = moved
                if stationarity <= STATIONARITY_TOLERANCE:
                    break
    residual = float(np.linalg.norm(J.T @ alpha))
    return KktMultipliers(alpha=alpha, residual=residual)


def kkt_system_matrix(
    objective: DifferentiableVectorObjective, x: np.ndarray, alpha: np.ndarray
) -> np.ndarray:
    """Linear system whose null vectors are (weight-rate, tangent) pairs.

    First row forces the weight rates to sum to zero; the remaining n rows
    are the derivative of the stationarity condition: transposed Jacobian
    columns against the alpha-weighted Hessian.
    """
    J = np.atleast_2d(np.asarray(objective.jacobian(x), dtype=float))
    H = np.asarray(objective.hessians(x), dtype=float)
    alpha = np.asarray(alpha, dtype=float)
    m, n = J.shape
    weighted_hessian = np.tensordot(alpha, H, axes=1)
    system = np.zeros((1 + n, m + n))
    system[0, :m] = 1.0
    system[1:, :m] = J.T
    system[1:, m:] = weighted_hessian
    return system


def _direction_residual(system: np.ndarray, direction: np.ndarray, m: int) -> float:
    """Best-case norm of system @ (weight-rate, direction) over weight rates."""
    target = -system[:, m:] @ direction
    rates, *_ = np.linalg.lstsq(system[:, :m], target, rcond=None)
    return float(np.linalg.norm(system[:, :m] @ rates - target))


def tangent_vectors(
    objective: DifferentiableVectorObjective, x: np.ndarray, alpha: np.ndarray
) -> TangentBasis:
    """Orthonormal decision-space tangent directions from the system null space.

    Null vectors come from the SVD (relative threshold on singular values);
    their decision-space blocks are orthonormalized largest-norm-first and at
    most m-1 are kept.
    """
    system = kkt_system_matrix(objective, x, alpha)
    m = np.asarray(alpha).size
    n = system.shape[0] - 1
    _, singular, vt = np.linalg.svd(system, full_matrices=True)
    largest = singular[0] if singular.size else 0.0
    null_rows = [
        vt[i]
        for i in range(vt.shape[0])
        if i >= singular.size or singular[i] <= NULL_SPACE_RTOL * largest
    ]
    blocks = [row[m:] for row in null_rows]
    blocks = [b for b in blocks if np.linalg.norm(b) > DIRECTION_NORM_FLOOR]
    blocks.sort(key=lambda b: -float(np.linalg.norm(b)))

    directions: list[np.ndarray] = []
    for block in blocks:
        leftover = block.copy()
        for kept in directions:
            leftover -= (leftover @ kept) * kept
        norm = np.linalg.norm(leftover)
        if norm > DIRECTION_NORM_FLOOR:
            directions.append(leftover / norm)
        if len(directions) == m - 1:
            break
    if not directions:
        raise EmptyTangentError(f"no tangent direction at point {x!r}")
    basis = np.array(directions)
    residual = max(_direction_residual(system, d, m) for d in basis)
    return TangentBasis(directions=basis, residual=residual)


def _first_occurrence_mask(candidates: np.ndarray, bounds: Bounds) -> np.ndarray:
    """Mask keeping the first of any group of near-identical candidates."""
    normalized = bounds.normalize(candidates)
    gaps = np.abs(normalized[:, None, :] - normalized[None, :, :]).max(axis=2)
    earlier_duplicate = np.tril(gaps <= DUPLICATE_TOLERANCE, k=-1).any(axis=1)
    return ~earlier_duplicate


def _drop_near_duplicates(
    candidates: np.ndarray, existing: np.ndarray, bounds: Bounds
) -> np.ndarray:
    """Mask of candidates that are not within tolerance of any existing point
    (componentwise, in the normalized decision space)."""
    if existing.size == 0:
        return np.ones(candidates.shape[0], dtype=bool)
    cand_n = bounds.normalize(candidates)
    exist_n = bounds.normalize(existing)
    gaps = np.abs(cand_n[:, None, :] - exist_n[None, :, :]).max(axis=2)
    return gaps.min(axis=1) > DUPLICATE_TOLERANCE


def interpolate(
    population: Population,
    objective: DifferentiableVectorObjective,
    config: InterpolationConfig,
    bounds: Bounds,
    rng,
    exclude: np.ndarray | None = None,
) -> Population:
    """Scatter candidates along per-point tangents and keep the best of them.

    Each point receives an equal share of the candidate budget.  Steps are
    taken in the normalized decision space: a random fraction of `step_scale`
    along each unit tangent direction, with a random sign per direction.
    Out-of-bounds candidates are removed (never clipped); near-duplicates,
    both within the batch and against `exclude` rows, are dropped.  The
    remainder is evaluated through the model objective and only its
    non-dominated subset is returned.
    """
    total_target = config.count_total
    per_point = max(1, math.ceil(total_target / max(len(population), 1)))
    span = bounds.span
    generated: list[np.ndarray] = []
    total = 0
    skipped = 0
    for i in range(len(population)):
        if total >= total_target:
            break
        x = population.X[i]
        multipliers = estimate_multipliers(objective, x)
        try:
            basis = tangent_vectors(objective, x, multipliers.alpha)
        except EmptyTangentError:
            skipped += 1
            continue
        normalized_dirs = basis.directions / span
        norms = np.linalg.norm(normalized_dirs, axis=1, keepdims=True)
        normalized_dirs = normalized_dirs / norms
        take = min(per_point, total_target - total)
        k = basis.count
        lo, hi = config.eta_range
        eta = hi - rng.random((take, k)) * (hi - lo)
        signs = rng.integers(0, 2, size=(take, k)) * 2.0 - 1.0
        z = bounds.normalize(x)
        steps = (signs * eta * config.step_scale) @ normalized_dirs
        candidates = bounds.denormalize(z + steps)
        total += take
        inside = (candidates >= bounds.lower).all(axis=1) & (
            candidates <= bounds.upper
        ).all(axis=1)
        if np.any(inside):
            generated.append(candidates[inside])

    if skipped:
        logger.info("tangent basis empty at %d of %d points", skipped, len(population))
    if not generated:
        logger.warning("interpolation produced no valid candidates")
        return Population.empty(population.n, population.m)

    X = np.vstack(generated)
    X = X[_first_occurrence_mask(X, bounds)]
    if exclude is not None:
        X = X[_drop_near_duplicates(X, np.atleast_2d(exclude), bounds)]
    if X.shape[0] == 0:
        logger.warning("all interpolated candidates duplicated existing points")
        return Population.empty(population.n, population.m)
    F = np.atleast_2d(np.asarray(objective.values(X), dtype=float))
    keep = nondominated_mask(F)
    return Population.from_arrays(X[keep], F[keep], Source.SURROGATE_PREDICTION)
