"""Box-grid statistics for boundary point sets and measures."""

from __future__ import annotations

from typing import NamedTuple, Sequence

import numpy as np
from scipy.stats import linregress, t as student_t

from fhm_lab.errors import InputError


class ScalingFit(NamedTuple):
    dimension: float
    ci_low: float
    ci_high: float
    r_squared: float
    sizes: np.ndarray
    values: np.ndarray


def grid_offsets(n_offsets: int, seed: int = 0) -> np.ndarray:
    """Fractional grid shifts in [0, 1)^2; the first is always the centred grid."""
    rng = np.random.default_rng(seed)
    off = rng.random((max(n_offsets, 1), 2))
    off[0] = 0.5
    return off


def box_masses(points: np.ndarray, size: float, offset: np.ndarray, weights: np.ndarray | None = None) -> np.ndarray:
    """Mass (or count) per occupied box of side `size`, grid shifted by offset*size."""
    keys = np.floor(points / size + offset[None, :]).astype(np.int64)
    _, inverse = np.unique(keys, axis=0, return_inverse=True)
    w = np.ones(len(points)) if weights is None else weights
    return np.bincount(inverse.ravel(), weights=w)


def fit_scaling(sizes: np.ndarray, values: np.ndarray, confidence: float = 0.95) -> ScalingFit:
    """Slope of values against log(1/size) with a Student-t interval."""
    x = np.log(1.0 / sizes)
    reg = linregress(x, values)
    dof = len(sizes) - 2
    half = student_t.ppf(0.5 + confidence / 2, dof) * reg.stderr if dof > 0 else np.inf
    return ScalingFit(
        dimension=float(reg.slope),
        ci_low=float(reg.slope - half),
        ci_high=float(reg.slope + half),
        r_squared=float(reg.rvalue**2),
        sizes=np.asarray(sizes),
        values=np.asarray(values),
    )


def densify_polyline(poly: np.ndarray, spacing: float, closed: bool = True) -> np.ndarray:
    pts = np.vstack([poly, poly[:1]]) if closed else poly
    out = []
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing)))
        out.append(a + (np.arange(k)[:, None] / k) * (b - a))
    return np.vstack(out)


def box_counting_dimension(
    points: np.ndarray,
    sizes: Sequence[float],
    n_offsets: int = 4,
    seed: int = 0,
) -> ScalingFit:
    """Box dimension of a point cloud (e.g. a densified boundary polyline).

    The count for each size is the minimum over grid offsets.
    """
    pts = np.asarray(points, dtype=float)
    sizes_arr = np.sort(np.asarray(sizes, dtype=float))[::-1]
    if len(sizes_arr) < 3 or np.any(sizes_arr <= 0):
        raise InputError("box counting needs at least three positive sizes")
    offs = grid_offsets(n_offsets, seed)
    counts = np.array([min(len(box_masses(pts, s, o)) for o in offs) for s in sizes_arr])
    return fit_scaling(sizes_arr, np.log(counts))
