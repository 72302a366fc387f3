"""Nonparametric run comparison: Wilcoxon signed-rank and A12 effect size.

The signed-rank test is implemented directly (rather than delegated) so
that tied absolute differences keep their exact small-sample null
distribution: average ranks make the rank sums half-integers, which the
exact enumeration below handles by working in doubled units.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import rankdata

__all__ = [
    "ComparisonReport",
    "Magnitude",
    "a12",
    "compare",
    "magnitude",
    "wilcoxon_signed_rank",
]

_EXACT_LIMIT = 20


class Magnitude(Enum):
    """Effect-size bands for the A12 statistic, folded around 0.5."""

    EQUAL = "equal"
    SMALL = "small"
    MEDIUM = "medium"
    LARGE = "large"


@dataclass(frozen=True)
class ComparisonReport:
    """Outcome of comparing two paired samples."""

    p_value: float
    a12: float
    magnitude: Magnitude


def _exact_two_sided_p(doubled_ranks: np.ndarray, doubled_w: int) -> float:
    """Exact p over all sign assignments, with rank sums in doubled units."""
    total = int(doubled_ranks.sum())
    counts = np.zeros(total + 1, dtype=float)
    counts[0] = 1.0
    for r in doubled_ranks:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: counts.size - r]
        counts += shifted
    denom = counts.sum()
    p_le = counts[: doubled_w + 1].sum() / denom
    p_ge = counts[doubled_w:].sum() / denom
    return float(min(1.0, 2.0 * min(p_le, p_ge)))


def wilcoxon_signed_rank(x, y) -> float:
    """Two-sided signed-rank p-value for paired samples.

    Zero differences are dropped and tied magnitudes get average ranks.
    Small samples (n <= 20 after dropping zeros) use the exact null
    distribution; larger ones a normal approximation with continuity and
    tie corrections.  All-zero differences give p = 1.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("paired samples must be equal-length vectors")
    if x.size < 5:
        raise ValueError("need at least 5 pairs")
    d = x - y
    d = d[d != 0]
    n = d.size
    if n == 0:
        return 1.0
    ranks = rankdata(np.abs(d))
    w_plus = float(ranks[d > 0].sum())
    if n <= _EXACT_LIMIT:
        doubled = np.round(2.0 * ranks).astype(int)
        return _exact_two_sided_p(doubled, int(round(2.0 * w_plus)))
    mean = n * (n + 1) / 4.0
    var = n * (n + 1) * (2 * n + 1) / 24.0
    _, tie_counts = np.unique(np.abs(d), return_counts=True)
    var -= float((tie_counts**3 - tie_counts).sum()) / 48.0
    if var <= 0:
        return 1.0
    delta = w_plus - mean
    if delta == 0:
        return 1.0
    z = (delta - 0.5 * np.sign(delta)) / math.sqrt(var)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2.0)))


def a12(x, y) -> float:
    """Probability that a draw from x exceeds a draw from y (ties half)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if x.size == 0 or y.size == 0:
        raise ValueError("both samples must be non-empty")
    greater = (x[:, None] > y[None, :]).sum()
    equal = (x[:, None] == y[None, :]).sum()
    return float(greater + 0.5 * equal) / (x.size * y.size)


def magnitude(a: float) -> Magnitude:
    """Fold A12 around 0.5 and band it: 0.56 / 0.64 / 0.71 thresholds."""
    v = a if a >= 0.5 else 1.0 - a
    if v < 0.56:
        return Magnitude.EQUAL
    if v < 0.64:
        return Magnitude.SMALL
    if v < 0.71:
        return Magnitude.MEDIUM
    return Magnitude.LARGE


def compare(x, y) -> ComparisonReport:
    """Wilcoxon p, A12 and its magnitude band for two paired samples."""
    effect = a12(x, y)
    return ComparisonReport(
        p_value=wilcoxon_signed_rank(x, y),
        a12=effect,
        magnitude=magnitude(effect),
    )
