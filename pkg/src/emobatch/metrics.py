"""Exact hypervolume for two and three objectives, plus contributions.

The hypervolume of a front is the Lebesgue measure of the region dominated
by the front and bounded by a reference point.  Points that do not strictly
dominate the reference contribute nothing.  A member's individual
contribution is the measure lost when that member alone is removed.
"""
from __future__ import annotations

from bisect import bisect_right

import numpy as np

from .core import NotSupportedError, Population

__all__ = [
    "experiment_reference",
    "hypervolume",
    "ihv_contributions",
]


def _front_array(front) -> np.ndarray:
    F = front.F if isinstance(front, Population) else np.asarray(front, dtype=float)
    F = np.atleast_2d(F)
    return F


def _hv2(F: np.ndarray, ref: np.ndarray) -> float:
    """Staircase area: sweep ascending f1, each improvement in the running
    f2 minimum contributes a rectangle out to the reference corner."""
    rx = float(ref[0])
    ry = float(ref[1])
    pts = [p for p in F.tolist() if p[0] < rx and p[1] < ry]
    if not pts:
        return 0.0
    pts.sort()
    area = 0.0
    best_y = ry
    for x, y in pts:
        if y < best_y:
            area += (rx - x) * (best_y - y)
            best_y = y
    return area


def _insert_stair(xs: list, ys: list, pos: int, x: float, y: float, rx: float, ry: float) -> float:
    """Splice (x, y) into a 2-D staircase kept as parallel sorted lists.

    `pos` is the bisect_right insertion index and the point must not be
    dominated by its predecessor.  Returns the area gained; dominated
    entries are spliced out.  The gain is integrated segment by segment
    between the new point's height and the old staircase profile until the
    profile drops below y.
    """
    prev_y = ys[pos - 1] if pos > 0 else ry
    gain = 0.0
    seg_start = x
    j = pos
    while True:
        seg_end = xs[j] if j < len(xs) else rx
        gain += (seg_end - seg_start) * (prev_y - y)
        if j >= len(xs) or ys[j] < y:
            break
        prev_y = ys[j]
        seg_start = seg_end
        j += 1
    xs[pos:j] = [x]
    ys[pos:j] = [y]
    return gain


def _hv3(F: np.ndarray, ref: np.ndarray) -> float:
    """Sweep ascending f3; between levels the current staircase area times
    the level gap adds a slab of volume.

    Points that leave the staircase unchanged are skipped before any slab
    bookkeeping, so removing such a point from the input reproduces the
    exact same floating-point accumulation.
    """
    rx = float(ref[0])
    ry = float(ref[1])
    rz = float(ref[2])
    pts = [p for p in F.tolist() if p[0] < rx and p[1] < ry and p[2] < rz]
    if not pts:
        return 0.0
    pts.sort(key=lambda p: p[2])
    xs: list = []
    ys: list = []
    volume = 0.0
    area = 0.0
    z_current = pts[0][2]
    for x, y, z in pts:
        pos = bisect_right(xs, x)
        if pos > 0 and ys[pos - 1] <= y:
            continue
        if z > z_current:
            volume += area * (z - z_current)
            z_current = z
        area += _insert_stair(xs, ys, pos, x, y, rx, ry)
    volume += area * (rz - z_current)
    return volume


def hypervolume(front, ref) -> float:
    """Exact dominated measure of `front` below reference point `ref`."""
    F = _front_array(front)
    ref = np.asarray(ref, dtype=float).reshape(-1)
    if F.shape[1] != ref.size:
        raise ValueError("front and reference point dimensions differ")
    if F.shape[0] == 0:
        return 0.0
    if ref.size == 2:
        return _hv2(F, ref)
    if ref.size == 3:
        return _hv3(F, ref)
    raise NotSupportedError("exact hypervolume supports two or three objectives")


def ihv_contributions(front, ref) -> np.ndarray:
    """Leave-one-out hypervolume contribution of each member.

    Dominated members, and every copy of a duplicated vector, contribute
    exactly zero: their removal leaves the dominated region unchanged.
    """
    F = _front_array(front)
    total = hypervolume(F, ref)
    out = np.empty(len(F))
    for i in range(len(F)):
        out[i] = total - hypervolume(np.delete(F, i, axis=0), ref)
    return out


def experiment_reference(pf_front) -> np.ndarray:
    """Reference point derived from a sampled true front.

    Componentwise: 1.1 x the maximum when it is positive, otherwise the
    maximum shifted up by 10% of that objective's range, so the reference
    stays strictly beyond the front in either sign regime.
    """
    F = _front_array(pf_front)
    hi = F.max(axis=0)
    span = hi - F.min(axis=0)
    return np.where(hi > 0, 1.1 * hi, hi + 0.1 * span)
