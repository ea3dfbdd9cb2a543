"""Marching-triangles level curves of piecewise-linear fields."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from fhm_lab.errors import InputError
from fhm_lab.utils.logging import get_logger

if TYPE_CHECKING:
    from fhm_lab.solver.fields import ScalarField

logger = get_logger(__name__)

TIE_TOLERANCE = 1e-13
TIE_SHIFT = 1e-12
_MAX_SHIFTS = 64


@dataclass(frozen=True, eq=False)
class LevelComponent:
    """Polyline points[i] -> points[i+1], segment i inside triangles[i] with gradient gradients[i]."""

    points: np.ndarray
    triangles: np.ndarray
    gradients: np.ndarray
    closed: bool = True

    def __len__(self) -> int:
        return len(self.points)

    def _next(self) -> np.ndarray:
        return np.roll(self.points, -1, axis=0)

    @property
    def segment_lengths(self) -> np.ndarray:
        d = self._next() - self.points
        lengths = np.hypot(d[:, 0], d[:, 1])
        if not self.closed:
            lengths[-1] = 0.0
        return lengths

    @property
    def segment_midpoints(self) -> np.ndarray:
        return 0.5 * (self.points + self._next())

    @property
    def vertex_gradients(self) -> np.ndarray:
        """Average of the two adjacent segment gradients."""
        return 0.5 * (self.gradients + np.roll(self.gradients, 1, axis=0))

    @property
    def length(self) -> float:
        return float(self.segment_lengths.sum())

    @property
    def signed_area(self) -> float:
        x, y = self.points[:, 0], self.points[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    def contains(self, pts: np.ndarray) -> np.ndarray:
        from fhm_lab.geometry.domains import points_in_polygon

        return points_in_polygon(np.atleast_2d(pts), self.points)


@dataclass(frozen=True, eq=False)
class LevelCurve:
    level: float
    requested: float
    components: list[LevelComponent] = field(default_factory=list)

    @property
    def total_length(self) -> float:
        return float(sum(c.length for c in self.components))

    @property
    def n_components(self) -> int:
        return len(self.components)

    def inside(self, pts: np.ndarray) -> np.ndarray:
        """Even-odd membership in the union of component interiors."""
        pts = np.atleast_2d(pts)
        hits = np.zeros(len(pts), dtype=int)
        for c in self.components:
            hits += c.contains(pts)
        return hits % 2 == 1


def _edge_table(tris: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    local = np.stack([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]], axis=1)
    flat = np.sort(local.reshape(-1, 2), axis=1)
    edges, inverse = np.unique(flat, axis=0, return_inverse=True)
    return edges, inverse.reshape(-1, 3)


def extract_level_curve(u: "ScalarField", t: float) -> LevelCurve:
    """Contour {u = t}; components are counterclockwise and deterministic."""
    if not (0.0 < t < 1.0):
        raise InputError(f"level must lie strictly inside (0, 1), got {t}")
    values = np.asarray(u.values, dtype=float)
    level = float(t)
    for _ in range(_MAX_SHIFTS):
        if not np.any(np.abs(values - level) <= TIE_TOLERANCE):
            break
        level += TIE_SHIFT
    if level != t:
        logger.debug("level perturbed off a nodal value", requested=t, level=level)

    m = u.mesh
    grads = u.gradients
    edges, tri_edges = _edge_table(m.triangles)
    s = values - level
    crossed = (s[edges[:, 0]] > 0) != (s[edges[:, 1]] > 0)
    if not crossed.any():
        return LevelCurve(level=level, requested=t, components=[])

    a, b = edges[:, 0], edges[:, 1]
    lam = np.where(crossed, (level - values[a]) / np.where(crossed, values[b] - values[a], 1.0), 0.0)
    points = m.vertices[a] + lam[:, None] * (m.vertices[b] - m.vertices[a])

    tri_cross = crossed[tri_edges]
    active = np.flatnonzero(tri_cross.sum(axis=1) == 2)
    edge_tris: dict[int, list[int]] = {}
    tri_pair: dict[int, tuple[int, int]] = {}
    for k in active:
        e1, e2 = tri_edges[k][tri_cross[k]]
        tri_pair[int(k)] = (int(e1), int(e2))
        edge_tris.setdefault(int(e1), []).append(int(k))
        edge_tris.setdefault(int(e2), []).append(int(k))

    visited: set[int] = set()
    components: list[LevelComponent] = []
    # open chains (ends on the mesh boundary) first, starting from an end
    ends = sorted(e for e, ks in edge_tris.items() if len(ks) == 1)
    for start in ends + sorted(edge_tris):
        if start in visited:
            continue
        chain_edges, chain_tris, closed = _walk(start, edge_tris, tri_pair, visited)
        if not closed:
            chain_tris = chain_tris + [chain_tris[-1]]
        pts = points[chain_edges]
        tri_idx = np.asarray(chain_tris, dtype=np.int64)
        comp = LevelComponent(points=pts, triangles=tri_idx, gradients=grads[tri_idx], closed=closed)
        if closed and comp.signed_area < 0:
            rev = tri_idx[::-1]
            tri_idx = np.roll(rev, -1)
            comp = LevelComponent(points=pts[::-1].copy(), triangles=tri_idx, gradients=grads[tri_idx], closed=True)
        components.append(comp)
    if any(not c.closed for c in components):
        logger.warning("open level curve component", level=level, open=sum(not c.closed for c in components))
    return LevelCurve(level=level, requested=t, components=components)


def _walk(
    start: int,
    edge_tris: dict[int, list[int]],
    tri_pair: dict[int, tuple[int, int]],
    visited: set[int],
) -> tuple[list[int], list[int], bool]:
    seq = [start]
    tris: list[int] = []
    visited.add(start)
    cur, prev_tri = start, -1
    while True:
        options = [k for k in edge_tris[cur] if k != prev_tri]
        if not options:
            return seq, tris, False
        k = options[0]
        e1, e2 = tri_pair[k]
        nxt = e2 if e1 == cur else e1
        tris.append(k)
        if nxt == start:
            return seq, tris, True
        if nxt in visited and nxt != start:
            return seq, tris, False
        seq.append(nxt)
        visited.add(nxt)
        cur, prev_tri = nxt, k
