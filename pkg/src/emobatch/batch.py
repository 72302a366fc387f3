"""Pick which candidates earn an expensive evaluation.

Selectors score a candidate pool (the optimizer output merged with the
interpolated points, all carrying model-predicted objectives) and return the
top batch.  Every selector also exposes its full preference order so a caller
can refill the batch when chosen candidates collide with already-evaluated
points.  Callers are expected to hand in a pool without duplicate decision
vectors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import ConfigError, Population, nondominated_mask
from .emo import WeightSet, ibea_fitness, crowding_distance
from .metrics import ihv_contributions

__all__ = [
    "BatchSelection",
    "select_ibea_native",
    "select_ihv",
    "select_moead_native",
    "select_nsga2_native",
]


@dataclass(frozen=True)
class BatchSelection:
    """Chosen candidate indices plus the scores and full preference order."""

    indices: np.ndarray
    scores: np.ndarray
    ranking: np.ndarray
    subproblem_bests: np.ndarray | None = None

    def __post_init__(self) -> None:
        indices = np.asarray(self.indices, dtype=int)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "scores", np.asarray(self.scores, dtype=float))
        object.__setattr__(self, "ranking", np.asarray(self.ranking, dtype=int))
        if np.unique(indices).size != indices.size:
            raise ValueError("selected indices must be unique")


def _dynamic_reference(F: np.ndarray) -> np.ndarray:
    """Componentwise maximum pushed out by 10% of the per-objective range."""
    high = F.max(axis=0)
    return high + 0.1 * (high - F.min(axis=0))


def select_ihv(
    candidates: Population, batch_size: int, reference: np.ndarray | None = None
) -> BatchSelection:
    """Rank candidates by their individual hypervolume contribution.

    Dominated members (and duplicates) contribute exactly zero and lose every
    tie against non-dominated members; remaining ties break by lowest index.
    """
    if len(candidates) == 0:
        raise ValueError("cannot select from an empty candidate pool")
    if batch_size < 1:
        raise ConfigError("batch size must be at least 1")
    F = candidates.F
    if reference is None:
        reference = _dynamic_reference(F)
    contributions = ihv_contributions(F, np.asarray(reference, dtype=float))
    dominated = ~nondominated_mask(F)
    order = np.lexsort((np.arange(len(candidates)), dominated, -contributions))
    chosen = order[: min(batch_size, len(candidates))]
    return BatchSelection(indices=chosen, scores=contributions, ranking=order)


def _angle_association(F_shifted: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """Index of the weight vector forming the smallest acute angle per row."""
    norms = np.linalg.norm(F_shifted, axis=1, keepdims=True)
    safe = np.where(norms > 0, norms, 1.0)
    directions = F_shifted / safe
    w_norms = np.linalg.norm(weights, axis=1, keepdims=True)
    unit_weights = weights / np.where(w_norms > 0, w_norms, 1.0)
    cosines = directions @ unit_weights.T
    return np.argmax(cosines, axis=1)


def select_nsga2_native(
    candidates: Population, batch_size: int, weights: WeightSet
) -> BatchSelection:
    """Subregion-representative selection by angle association and crowding.

    Non-dominated candidates are associated to their closest weight direction
    (after translating by the ideal point and min-max normalizing); each
    occupied subregion contributes its most crowded member, and the
    representatives with the largest crowding distances form the batch,
    padded from the remaining non-dominated members if subregions run out.
    """
    if len(candidates) == 0:
        raise ValueError("cannot select from an empty candidate pool")
    if batch_size < 1:
        raise ConfigError("batch size must be at least 1")
    F = candidates.F
    total = len(candidates)
    nd_mask = nondominated_mask(F)
    nd_indices = np.flatnonzero(nd_mask)
    G = F[nd_indices]
    shifted = G - G.min(axis=0)
    spread = shifted.max(axis=0)
    shifted = shifted / np.where(spread > 0, spread, 1.0)
    association = _angle_association(shifted, weights.vectors)
    crowding = crowding_distance(G)

    representative_flag = np.zeros(nd_indices.size, dtype=bool)
    for region in np.unique(association):
        members = np.flatnonzero(association == region)
        representative_flag[members[np.argmax(crowding[members])]] = True

    def by_crowding(positions: np.ndarray) -> np.ndarray:
        return positions[np.argsort(-crowding[positions], kind="stable")]

    reps = by_crowding(np.flatnonzero(representative_flag))
    others = by_crowding(np.flatnonzero(~representative_flag))
    dominated_tail = np.flatnonzero(~nd_mask)
    ranking = np.concatenate([nd_indices[reps], nd_indices[others], dominated_tail])

    scores = np.full(total, -np.inf)
    scores[nd_indices] = crowding
    chosen = ranking[: min(batch_size, nd_indices.size)]
    return BatchSelection(indices=chosen, scores=scores, ranking=ranking)


def select_ibea_native(
    candidates: Population, batch_size: int, fitness_scaling: float = 0.05
) -> BatchSelection:
    """Top candidates by additive indicator fitness over the whole pool."""
    if len(candidates) == 0:
        raise ValueError("cannot select from an empty candidate pool")
    if batch_size < 1:
        raise ConfigError("batch size must be at least 1")
    fitness = ibea_fitness(candidates.F, fitness_scaling)
    ranking = np.argsort(-fitness, kind="stable")
    chosen = ranking[: min(batch_size, len(candidates))]
    return BatchSelection(indices=chosen, scores=fitness, ranking=ranking)


def select_moead_native(
    candidates: Population,
    batch_size: int,
    weights: WeightSet,
    previous_bests: np.ndarray,
) -> BatchSelection:
    """Pick members serving the subproblems with the largest relative gains.

    For every weight vector the scalarization-best candidate is found; the
    relative improvement over the previous iteration's best value ranks the
    subproblems, and their best members are collected (each member at most
    once, later subproblems filling gaps) until the batch is full.
    """
    if len(candidates) == 0:
        raise ValueError("cannot select from an empty candidate pool")
    if batch_size < 1:
        raise ConfigError("batch size must be at least 1")
    previous_bests = np.asarray(previous_bests, dtype=float)
    W = weights.vectors
    if previous_bests.shape != (W.shape[0],):
        raise ConfigError("one previous best value per subproblem is required")
    F = candidates.F
    z_star = F.min(axis=0)
    scalarized = np.max(
        np.abs(F[None, :, :] - z_star) / np.maximum(W[:, None, :], 1e-6), axis=2
    )
    best_member = np.argmin(scalarized, axis=1)
    best_value = scalarized[np.arange(W.shape[0]), best_member]
    with np.errstate(divide="ignore", invalid="ignore"):
        improvement = (previous_bests - best_value) / previous_bests
    zero_before = previous_bests == 0
    improvement[zero_before] = np.where(
        best_value[zero_before] < previous_bests[zero_before], np.inf, 0.0
    )

    subproblem_order = np.lexsort((np.arange(W.shape[0]), -improvement))
    ordered_members: list[int] = []
    seen: set[int] = set()
    member_score = np.full(len(candidates), -np.inf)
    for sub in subproblem_order:
        member = int(best_member[sub])
        member_score[member] = max(member_score[member], improvement[sub])
        if member not in seen:
            seen.add(member)
            ordered_members.append(member)
    leftovers = [i for i in range(len(candidates)) if i not in seen]
    ranking = np.array(ordered_members + leftovers, dtype=int)
    chosen = ranking[: min(batch_size, len(ordered_members))]
    return BatchSelection(
        indices=chosen,
        scores=member_score,
        ranking=ranking,
        subproblem_bests=best_value,
    )
