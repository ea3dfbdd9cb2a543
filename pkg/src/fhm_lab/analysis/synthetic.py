"""Self-similar calibration measures with a prescribed dimension."""

from __future__ import annotations

import numpy as np

from fhm_lab.errors import InputError
from fhm_lab.measure.boundary import SYNTHETIC, BoundaryMeasure

MAX_ARCS = 1 << 16
KOCH_WINDOW_TOP = 0.1


def _cantor(alpha: float, level: int) -> tuple[np.ndarray, float]:
    s = 2.0 ** (-1.0 / alpha)
    left = np.zeros(1)
    for k in range(level):
        step = 1.0 - s
        left = np.concatenate([left, left + step * s**k])
    return np.column_stack([left + 0.5 * s**level, np.zeros_like(left)]), s**level


def _koch_curve(alpha: float, level: int) -> np.ndarray:
    """Polyline from (0,0) to (1,0) with four pieces of ratio s = 4^(-1/alpha) per level."""
    s = 4.0 ** (-1.0 / alpha)
    cos_t = (1.0 - 2.0 * s) / (2.0 * s)
    sin_t = np.sqrt(max(0.0, 1.0 - cos_t**2))
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    for _ in range(level):
        a, b = pts[:-1], pts[1:]
        d = b - a
        normal = np.column_stack([-d[:, 1], d[:, 0]])
        p1 = a + s * d
        p2 = a + 0.5 * d + s * sin_t * normal
        p3 = b - s * d
        pts = np.vstack([np.stack([a, p1, p2, p3], axis=1).reshape(-1, 2), pts[-1:]])
    return pts


def synthetic_measure(alpha: float, level: int | None = None) -> BoundaryMeasure:
    """Uniform self-similar measure of dimension alpha on a line-like set.

    alpha < 1: two-piece Cantor set in [0, 1]; 1 <= alpha < 2: four-piece generalised Koch curve.
    Arc weights are proportional to arc length^alpha, total mass 1.
    """
    if not (0.0 < alpha < 2.0):
        raise InputError(f"alpha must lie in (0, 2), got {alpha}")
    if alpha < 1.0:
        level = 12 if level is None else level
        if 2**level > MAX_ARCS:
            raise InputError(f"level {level} gives more than {MAX_ARCS} arcs")
        mid, length = _cantor(alpha, level)
        n = len(mid)
        return BoundaryMeasure(
            midpoints=mid, lengths=np.full(n, length), weights=np.full(n, 1.0 / n), method=SYNTHETIC, p=2.0
        )
    level = 7 if level is None else level
    if 4**level > MAX_ARCS:
        raise InputError(f"level {level} gives more than {MAX_ARCS} arcs")
    pts = _koch_curve(alpha, level)
    d = np.diff(pts, axis=0)
    lengths = np.hypot(d[:, 0], d[:, 1])
    weights = lengths**alpha
    return BoundaryMeasure(
        midpoints=0.5 * (pts[:-1] + pts[1:]),
        lengths=lengths,
        weights=weights / weights.sum(),
        method=SYNTHETIC,
        p=2.0,
    )


def contraction_ratio(alpha: float) -> float:
    """Similarity ratio of the pieces of synthetic_measure(alpha)."""
    if not (0.0 < alpha < 2.0):
        raise InputError(f"alpha must lie in (0, 2), got {alpha}")
    return 2.0 ** (-1.0 / alpha) if alpha < 1.0 else 4.0 ** (-1.0 / alpha)


def self_similar_radii(alpha: float, n_radii: int = 4) -> np.ndarray:
    """Radii at successive powers of the contraction ratio.

    Sampling one radius per self-similar generation removes the log-periodic wobble of
    ball masses from the slope fits. The Cantor window starts at half the first-level
    gap so no ball or box spans two first-level pieces.
    """
    s = contraction_ratio(alpha)
    top = 0.5 * (1.0 - 2.0 * s) if alpha < 1.0 else KOCH_WINDOW_TOP
    return top * s ** np.arange(n_radii)


def point_mass_measure(n_arcs: int = 1024, index: int | None = None) -> BoundaryMeasure:
    """Unit mass on a single arc of a uniform partition of [0, 1]."""
    k = n_arcs // 2 if index is None else index
    mid = np.column_stack([(np.arange(n_arcs) + 0.5) / n_arcs, np.zeros(n_arcs)])
    weights = np.zeros(n_arcs)
    weights[k] = 1.0
    return BoundaryMeasure(midpoints=mid, lengths=np.full(n_arcs, 1.0 / n_arcs), weights=weights, method=SYNTHETIC)
