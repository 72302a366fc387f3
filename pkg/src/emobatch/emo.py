"""Evolutionary multi-objective optimizers run against cheap objective models.

Three interchangeable population-based search loops — a dominance/crowding
scheme, an indicator (hypervolume-difference) scheme, and a decomposition
scheme — share the same reproduction operators (simulated binary crossover
and polynomial mutation).  Every run is a pure function of its random stream,
so repeated runs with the same seed are bit-identical.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .core import (
    Bounds,
    ConfigError,
    DifferentiableVectorObjective,
    Population,
    Source,
    nondominated_mask,
)

__all__ = [
    "EmoConfig",
    "OperatorParams",
    "WeightSet",
    "available_optimizers",
    "crowding_distance",
    "das_dennis_weights",
    "default_emo_config",
    "default_operator_params",
    "ibea_fitness",
    "ibea_run",
    "ihd_indicator",
    "moead_run",
    "nondominated_sort",
    "nsga2_run",
    "polynomial_mutation",
    "run_optimizer",
    "sbx_crossover",
    "tchebycheff",
]

MIN_WEIGHT = 1e-6


@dataclass(frozen=True)
class OperatorParams:
    """Settings of the shared variation operators."""

    crossover_probability: float = 1.0
    crossover_index: float = 20.0
    mutation_probability: float = 0.1
    mutation_index: float = 20.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.crossover_probability <= 1.0:
            raise ConfigError("crossover probability must lie in [0, 1]")
        if not 0.0 <= self.mutation_probability <= 1.0:
            raise ConfigError("mutation probability must lie in [0, 1]")
        if self.crossover_index <= 0 or self.mutation_index <= 0:
            raise ConfigError("distribution indices must be positive")


def default_operator_params(n_var: int) -> OperatorParams:
    """Full crossover, one expected mutation per offspring."""
    return OperatorParams(mutation_probability=1.0 / n_var)


@dataclass(frozen=True)
class EmoConfig:
    """Budget and algorithm settings for one optimizer run."""

    population_size: int
    generations: int = 100
    weight_divisions: int | None = None
    neighborhood_size: int = 20
    whole_population_probability: float = 0.1
    fitness_scaling: float = 0.05
    operators: OperatorParams | None = None

    def __post_init__(self) -> None:
        if self.population_size < 2:
            raise ConfigError("population size must be at least 2")
        if self.generations < 0:
            raise ConfigError("generation count must be non-negative")
        if self.neighborhood_size < 2:
            raise ConfigError("neighborhood size must be at least 2")
        if not 0.0 <= self.whole_population_probability <= 1.0:
            raise ConfigError("whole-population probability must lie in [0, 1]")
        if self.fitness_scaling <= 0:
            raise ConfigError("fitness scaling must be positive")


def default_emo_config(n_obj: int) -> EmoConfig:
    """Population sized so a simplex lattice of matching size exists."""
    if n_obj == 2:
        return EmoConfig(population_size=100, weight_divisions=99)
    if n_obj == 3:
        return EmoConfig(population_size=105, weight_divisions=13)
    raise ConfigError(f"no default optimizer settings for {n_obj} objectives")


# ---------------------------------------------------------------------------
# Reproduction operators
# ---------------------------------------------------------------------------


def sbx_crossover(
    p1: np.ndarray,
    p2: np.ndarray,
    params: OperatorParams,
    bounds: Bounds,
    rng,
) -> tuple[np.ndarray, np.ndarray]:
    """Simulated binary crossover; children are clipped to the box.

    The draw pattern (one gate, one per-variable mask, one per-variable
    spread factor) is fixed regardless of which branches apply, keeping the
    random stream alignment independent of the data.
    """
    p1 = np.asarray(p1, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    n = p1.size
    gate = rng.random()
    crossed = rng.random(n) < 0.5
    u = rng.random(n)
    if gate >= params.crossover_probability:
        return p1.copy(), p2.copy()
    exponent = 1.0 / (params.crossover_index + 1.0)
    a_list = p1.tolist()
    b_list = p2.tolist()
    u_list = u.tolist()
    lo = bounds.lower.tolist()
    hi = bounds.upper.tolist()
    c1 = np.empty(n)
    c2 = np.empty(n)
    for i in range(n):
        a = a_list[i]
        b = b_list[i]
        if crossed[i]:
            ui = u_list[i]
            spread = (2.0 * ui) ** exponent if ui <= 0.5 else (0.5 / (1.0 - ui)) ** exponent
            x1 = 0.5 * ((1.0 + spread) * a + (1.0 - spread) * b)
            x2 = 0.5 * ((1.0 - spread) * a + (1.0 + spread) * b)
        else:
            x1 = a
            x2 = b
        low = lo[i]
        high = hi[i]
        c1[i] = low if x1 < low else high if x1 > high else x1
        c2[i] = low if x2 < low else high if x2 > high else x2
    return c1, c2


def polynomial_mutation(
    x: np.ndarray,
    params: OperatorParams,
    bounds: Bounds,
    rng,
) -> np.ndarray:
    """Polynomial mutation with a symmetric perturbation, clipped to the box."""
    x = np.asarray(x, dtype=float)
    n = x.size
    mutated = rng.random(n) < params.mutation_probability
    u = rng.random(n)
    exponent = 1.0 / (params.mutation_index + 1.0)
    x_list = x.tolist()
    u_list = u.tolist()
    span = bounds.span.tolist()
    lo = bounds.lower.tolist()
    hi = bounds.upper.tolist()
    y = np.empty(n)
    for i in range(n):
        value = x_list[i]
        if mutated[i]:
            ui = u_list[i]
            if ui < 0.5:
                delta = (2.0 * ui) ** exponent - 1.0
            else:
                delta = 1.0 - (2.0 * (1.0 - ui)) ** exponent
            value += delta * span[i]
        low = lo[i]
        high = hi[i]
        y[i] = low if value < low else high if value > high else value
    return y


# ---------------------------------------------------------------------------
# Ranking utilities
# ---------------------------------------------------------------------------


def nondominated_sort(F: np.ndarray) -> list[np.ndarray]:
    """Partition members into fronts by repeatedly peeling the non-dominated set."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if F.shape[0] == 0:
        raise ValueError("cannot sort an empty set")
    remaining = np.arange(F.shape[0])
    fronts: list[np.ndarray] = []
    while remaining.size:
        mask = nondominated_mask(F[remaining])
        fronts.append(remaining[mask])
        remaining = remaining[~mask]
    return fronts


def crowding_distance(front_values: np.ndarray) -> np.ndarray:
    """Per-member diversity score: boundary members get +inf, interior members
    the sum over objectives of the neighbor gap divided by the objective range."""
    F = np.atleast_2d(np.asarray(front_values, dtype=float))
    count = F.shape[0]
    if count <= 2:
        return np.full(count, np.inf)
    distance = np.zeros(count)
    for j in range(F.shape[1]):
        order = np.argsort(F[:, j], kind="stable")
        column = F[order, j]
        distance[order[0]] = np.inf
        distance[order[-1]] = np.inf
        value_range = column[-1] - column[0]
        if value_range > 0:
            distance[order[1:-1]] += (column[2:] - column[:-2]) / value_range
    return distance


def _ranks_and_crowding(F: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    ranks = np.empty(F.shape[0], dtype=int)
    crowding = np.empty(F.shape[0])
    for level, front in enumerate(nondominated_sort(F)):
        ranks[front] = level
        crowding[front] = crowding_distance(F[front])
    return ranks, crowding


def _binary_tournament(keys_better_first: np.ndarray, count: int, rng) -> np.ndarray:
    """Vectorized binary tournament; `keys_better_first` sorts ascending-better.

    On a full tie the first drawn candidate wins, so selection stays a pure
    function of the random stream.
    """
    pool = keys_better_first.shape[0]
    candidates = rng.integers(0, pool, size=(count, 2))
    a, b = candidates[:, 0], candidates[:, 1]
    keys_a = keys_better_first[a]
    keys_b = keys_better_first[b]
    if keys_a.ndim == 1:
        take_a = keys_a <= keys_b
    else:
        take_a = np.ones(count, dtype=bool)
        decided = np.zeros(count, dtype=bool)
        for col in range(keys_a.shape[1]):
            less = ~decided & (keys_a[:, col] < keys_b[:, col])
            more = ~decided & (keys_a[:, col] > keys_b[:, col])
            take_a[more] = False
            decided |= less | more
    return np.where(take_a, a, b)


def _make_offspring(
    X: np.ndarray,
    parent_indices: np.ndarray,
    params: OperatorParams,
    bounds: Bounds,
    rng,
    count: int,
) -> np.ndarray:
    children = []
    for k in range(0, parent_indices.size, 2):
        c1, c2 = sbx_crossover(
            X[parent_indices[k]], X[parent_indices[k + 1]], params, bounds, rng
        )
        children.append(polynomial_mutation(c1, params, bounds, rng))
        children.append(polynomial_mutation(c2, params, bounds, rng))
    return np.array(children[:count])


def _initial_population(bounds: Bounds, count: int, rng) -> np.ndarray:
    return rng.uniform(bounds.lower, bounds.upper, size=(count, bounds.n))


# ---------------------------------------------------------------------------
# Dominance/crowding optimizer
# ---------------------------------------------------------------------------


def _crowding_truncation(F: np.ndarray, target: int) -> np.ndarray:
    """Survivor indices: whole fronts while they fit, then the most crowded-out
    members of the first overflowing front, largest crowding distance first."""
    selected: list[np.ndarray] = []
    taken = 0
    for front in nondominated_sort(F):
        if taken + front.size <= target:
            selected.append(front)
            taken += front.size
            if taken == target:
                break
            continue
        crowding = crowding_distance(F[front])
        order = np.argsort(-crowding, kind="stable")
        selected.append(front[order[: target - taken]])
        break
    return np.concatenate(selected)


def nsga2_run(
    objective: DifferentiableVectorObjective,
    bounds: Bounds,
    config: EmoConfig,
    rng,
) -> Population:
    """Dominance-ranked search with crowding-distance truncation."""
    params = config.operators or default_operator_params(bounds.n)
    size = config.population_size
    X = _initial_population(bounds, size, rng)
    F = np.atleast_2d(np.asarray(objective.values(X), dtype=float))
    for _ in range(config.generations):
        ranks, crowding = _ranks_and_crowding(F)
        keys = np.column_stack([ranks, -crowding])
        pairs = 2 * ((size + 1) // 2)
        parents = _binary_tournament(keys, pairs, rng)
        Q = _make_offspring(X, parents, params, bounds, rng, size)
        FQ = np.atleast_2d(np.asarray(objective.values(Q), dtype=float))
        R = np.vstack([X, Q])
        FR = np.vstack([F, FQ])
        survivors = _crowding_truncation(FR, size)
        X, F = R[survivors], FR[survivors]
    return Population.from_arrays(X, F, Source.SURROGATE_PREDICTION)


# ---------------------------------------------------------------------------
# Indicator-based optimizer
# ---------------------------------------------------------------------------


def ihd_indicator(fa: np.ndarray, fb: np.ndarray, reference: np.ndarray) -> float:
    """Hypervolume-difference indicator between two single objective vectors.

    If `fa` weakly dominates `fb` this is the (possibly negative) difference
    of their exclusive hypervolumes; otherwise it is the volume dominated by
    `fb` but not by `fa`.
    """
    fa = np.asarray(fa, dtype=float)
    fb = np.asarray(fb, dtype=float)
    reference = np.asarray(reference, dtype=float)
    vol_a = float(np.prod(reference - fa))
    vol_b = float(np.prod(reference - fb))
    if np.all(fa <= fb):
        return vol_b - vol_a
    overlap = float(np.prod(reference - np.maximum(fa, fb)))
    return vol_b - overlap


def _normalize_pool(F: np.ndarray) -> np.ndarray:
    low = F.min(axis=0)
    spread = F.max(axis=0) - low
    spread = np.where(spread < 1e-12, 1.0, spread)
    return (F - low) / spread


def _pairwise_ihd(F_normalized: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Matrix M with M[i, j] = indicator of member i against member j."""
    gaps = reference - F_normalized
    single = gaps.prod(axis=1)
    pairwise_max = np.maximum(F_normalized[:, None, :], F_normalized[None, :, :])
    overlap = (reference - pairwise_max).prod(axis=2)
    weakly_dominates = np.all(
        F_normalized[:, None, :] <= F_normalized[None, :, :], axis=2
    )
    return np.where(weakly_dominates, single[None, :] - single[:, None],
                    single[None, :] - overlap)


def _ihd_exponentials(F: np.ndarray, scaling: float) -> np.ndarray:
    """exp(-M/kappa) over the min-max normalized pool, zero diagonal."""
    normalized = _normalize_pool(F)
    reference = np.full(F.shape[1], 1.1)
    M = _pairwise_ihd(normalized, reference)
    E = np.exp(-M / scaling)
    np.fill_diagonal(E, 0.0)
    return E


def ibea_fitness(F: np.ndarray, scaling: float = 0.05) -> np.ndarray:
    """Additive indicator fitness: larger is better (less dominated)."""
    F = np.atleast_2d(np.asarray(F, dtype=float))
    return -_ihd_exponentials(F, scaling).sum(axis=0)


def _indicator_reduction(F: np.ndarray, target: int, scaling: float) -> np.ndarray:
    """Iteratively drop the worst-fitness member until `target` remain.

    The indicator matrix is computed once over the full pool; each removal
    adds the removed member's term back to the survivors' fitness.
    """
    E = _ihd_exponentials(F, scaling)
    fitness = -E.sum(axis=0)
    alive = np.ones(F.shape[0], dtype=bool)
    for _ in range(F.shape[0] - target):
        alive_indices = np.flatnonzero(alive)
        worst = alive_indices[np.argmin(fitness[alive_indices])]
        alive[worst] = False
        fitness[alive] += E[worst, alive]
    return np.flatnonzero(alive)


def ibea_run(
    objective: DifferentiableVectorObjective,
    bounds: Bounds,
    config: EmoConfig,
    rng,
) -> Population:
    """Indicator-based search: mate by fitness tournament, shrink the merged
    pool by iterated worst-removal."""
    params = config.operators or default_operator_params(bounds.n)
    size = config.population_size
    X = _initial_population(bounds, size, rng)
    F = np.atleast_2d(np.asarray(objective.values(X), dtype=float))
    for _ in range(config.generations):
        fitness = ibea_fitness(F, config.fitness_scaling)
        pairs = 2 * ((size + 1) // 2)
        parents = _binary_tournament(-fitness, pairs, rng)
        Q = _make_offspring(X, parents, params, bounds, rng, size)
        FQ = np.atleast_2d(np.asarray(objective.values(Q), dtype=float))
        pool_X = np.vstack([X, Q])
        pool_F = np.vstack([F, FQ])
        survivors = _indicator_reduction(pool_F, size, config.fitness_scaling)
        X, F = pool_X[survivors], pool_F[survivors]
    return Population.from_arrays(X, F, Source.SURROGATE_PREDICTION)


# ---------------------------------------------------------------------------
# Decomposition-based optimizer
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class WeightSet:
    """Simplex-lattice weight vectors with per-vector nearest neighborhoods."""

    vectors: np.ndarray
    neighborhoods: np.ndarray

    @property
    def size(self) -> int:
        return self.vectors.shape[0]


def _simplex_lattice(n_obj: int, divisions: int):
    if n_obj == 1:
        yield (divisions,)
        return
    for head in range(divisions + 1):
        for tail in _simplex_lattice(n_obj - 1, divisions - head):
            yield (head, *tail)


def das_dennis_weights(n_obj: int, divisions: int, neighborhood_size: int = 20) -> WeightSet:
    """All simplex lattice points with spacing 1/divisions, plus for each
    vector the indices of its `neighborhood_size` nearest vectors (self included)."""
    if divisions < 1:
        raise ConfigError("weight divisions must be at least 1")
    grid = np.array(list(_simplex_lattice(n_obj, divisions)), dtype=float)
    vectors = grid / divisions
    count = vectors.shape[0]
    t = min(neighborhood_size, count)
    distances = cdist(vectors, vectors)
    neighborhoods = np.argsort(distances, axis=1, kind="stable")[:, :t]
    return WeightSet(vectors=vectors, neighborhoods=neighborhoods)


def tchebycheff(f: np.ndarray, w: np.ndarray, z_star: np.ndarray) -> float:
    """Weighted distance to the ideal point; zero weights floored at 1e-6."""
    f = np.asarray(f, dtype=float)
    w = np.maximum(np.asarray(w, dtype=float), MIN_WEIGHT)
    return float(np.max(np.abs(f - np.asarray(z_star, dtype=float)) / w))


def moead_run(
    objective: DifferentiableVectorObjective,
    bounds: Bounds,
    config: EmoConfig,
    rng,
) -> Population:
    """Decomposition-based search: one solution per weight vector, offspring
    mated and replaced within a (usually local) neighborhood scope."""
    if config.weight_divisions is None:
        raise ConfigError("decomposition run requires weight_divisions")
    weights = das_dennis_weights(
        objective.n_obj, config.weight_divisions, config.neighborhood_size
    )
    if weights.size != config.population_size:
        raise ConfigError(
            f"population size {config.population_size} does not match the "
            f"simplex lattice size {weights.size}"
        )
    params = config.operators or default_operator_params(bounds.n)
    size = weights.size
    X = _initial_population(bounds, size, rng)
    X = X[rng.permutation(size)]
    F = np.atleast_2d(np.asarray(objective.values(X), dtype=float))
    z_star = F.min(axis=0).tolist()
    n_obj = F.shape[1]
    # Scalar mirrors of the hot per-offspring state: the replacement scan
    # reads objective rows and clipped weights elementwise, so plain floats
    # beat tiny-array calls by an order of magnitude.
    f_rows = F.tolist()
    w_rows = np.maximum(weights.vectors, MIN_WEIGHT).tolist()
    all_indices = np.arange(size)
    for _ in range(config.generations):
        for i in range(size):
            whole = rng.random() < config.whole_population_probability
            scope = all_indices if whole else weights.neighborhoods[i]
            order = rng.permutation(scope)
            c1, _ = sbx_crossover(X[order[0]], X[order[1]], params, bounds, rng)
            child = polynomial_mutation(c1, params, bounds, rng)
            f_child = np.asarray(objective.value(child), dtype=float)
            f_list = f_child.tolist()
            for k in range(n_obj):
                if f_list[k] < z_star[k]:
                    z_star[k] = f_list[k]
            replaced = 0
            for j in order.tolist():
                w = w_rows[j]
                g_child = 0.0
                g_current = 0.0
                current = f_rows[j]
                for k in range(n_obj):
                    zk = z_star[k]
                    wk = w[k]
                    child_term = abs(f_list[k] - zk) / wk
                    if child_term > g_child:
                        g_child = child_term
                    current_term = abs(current[k] - zk) / wk
                    if current_term > g_current:
                        g_current = current_term
                if g_child < g_current:
                    X[j] = child
                    F[j] = f_child
                    f_rows[j] = f_list
                    replaced += 1
                    if replaced == 2:
                        break
    return Population.from_arrays(X, F, Source.SURROGATE_PREDICTION)


# ---------------------------------------------------------------------------
# Dispatch
# ---------------------------------------------------------------------------

_OPTIMIZERS = {
    "nsga2": nsga2_run,
    "ibea": ibea_run,
    "moead": moead_run,
}


def available_optimizers() -> tuple[str, ...]:
    return tuple(sorted(_OPTIMIZERS))


def run_optimizer(
    name: str,
    objective: DifferentiableVectorObjective,
    bounds: Bounds,
    config: EmoConfig,
    rng,
) -> Population:
    try:
        runner = _OPTIMIZERS[name]
    except KeyError:
        raise ConfigError(
            f"unknown optimizer {name!r}; expected one of {available_optimizers()}"
        ) from None
    return runner(objective, bounds, config, rng)
