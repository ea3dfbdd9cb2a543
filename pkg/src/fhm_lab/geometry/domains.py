"""Ring domains D = Omega minus closure(B(z0, d/4)) and their normalization."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Any

import numpy as np

from fhm_lab.errors import InputError
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

KOCH_MAX_LEVEL = 5
NORMALIZED_DISTANCE = 4.0
_DISK_POLYGON_VERTICES = 1024
_CHUNK = 4096


@dataclass(frozen=True)
class Normalization:
    """normalized = scale * (raw - z0); s_hat = 1/scale maps back."""

    z0: tuple[float, float] = (0.0, 0.0)
    scale: float = 1.0

    @property
    def s_hat(self) -> float:
        return 1.0 / self.scale

    def then(self, z0: np.ndarray, scale: float) -> "Normalization":
        # scale * (self.scale * (z - self.z0) - z0) = (scale*self.scale) * (z - (self.z0 + z0/self.scale))
        new_z0 = np.asarray(self.z0) + np.asarray(z0) / self.scale
        return Normalization(z0=(float(new_z0[0]), float(new_z0[1])), scale=self.scale * scale)

    def to_raw(self, pts: np.ndarray) -> np.ndarray:
        return np.asarray(self.z0) + np.asarray(pts) / self.scale


@dataclass(frozen=True, eq=False)
class Domain:
    outer: np.ndarray  # (n, 2) counterclockwise, last vertex not repeated
    inner_center: tuple[float, float]
    inner_radius: float
    kind: str
    level: int | None = None
    outer_radius: float | None = None  # exact circle for the disk kind
    outer_center: tuple[float, float] = (0.0, 0.0)
    normalization: Normalization = Normalization()

    @property
    def is_circle(self) -> bool:
        return self.outer_radius is not None

    @property
    def n_edges(self) -> int:
        return len(self.outer)

    @property
    def perimeter(self) -> float:
        if self.is_circle:
            return float(2 * np.pi * self.outer_radius)
        d = np.diff(np.vstack([self.outer, self.outer[:1]]), axis=0)
        return float(np.hypot(d[:, 0], d[:, 1]).sum())

    @property
    def diameter(self) -> float:
        if self.is_circle:
            return float(2 * self.outer_radius)
        pts = self.outer
        best = 0.0
        for start in range(0, len(pts), _CHUNK):
            blk = pts[start : start + _CHUNK]
            d = np.hypot(blk[:, None, 0] - pts[None, :, 0], blk[:, None, 1] - pts[None, :, 1])
            best = max(best, float(d.max()))
        return best

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance to the outer boundary."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_circle:
            rr = np.hypot(pts[:, 0] - self.outer_center[0], pts[:, 1] - self.outer_center[1])
            return np.abs(self.outer_radius - rr)
        return polygon_distance(pts, self.outer)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Points inside Omega (the hole is not excluded)."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if self.is_circle:
            rr = np.hypot(pts[:, 0] - self.outer_center[0], pts[:, 1] - self.outer_center[1])
            return rr < self.outer_radius
        return points_in_polygon(pts, self.outer)

    def in_ring(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        rr = np.hypot(pts[:, 0] - self.inner_center[0], pts[:, 1] - self.inner_center[1])
        return self.contains(pts) & (rr > self.inner_radius)


# polygon helpers


def _signed_area(poly: np.ndarray) -> float:
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def polygon_distance(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    a = poly
    b = np.roll(poly, -1, axis=0)
    ab = b - a
    L2 = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    out = np.empty(len(points))
    step = max(1, 2_000_000 // max(len(poly), 1))
    for start in range(0, len(points), step):
        P = points[start : start + step]
        ap = P[:, None, :] - a[None, :, :]
        lam = np.clip(np.sum(ap * ab[None], axis=2) / L2[None], 0.0, 1.0)
        proj = a[None] + lam[..., None] * ab[None]
        d = np.hypot(P[:, None, 0] - proj[..., 0], P[:, None, 1] - proj[..., 1])
        out[start : start + step] = d.min(axis=1)
    return out


def points_in_polygon(points: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd ray casting."""
    x1, y1 = poly[:, 0], poly[:, 1]
    x2, y2 = np.roll(x1, -1), np.roll(y1, -1)
    inside = np.zeros(len(points), dtype=bool)
    step = max(1, 2_000_000 // max(len(poly), 1))
    for start in range(0, len(points), step):
        px = points[start : start + step, 0][:, None]
        py = points[start : start + step, 1][:, None]
        crosses = (y1[None] > py) != (y2[None] > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1[None] + (py - y1[None]) * (x2 - x1)[None] / (y2 - y1)[None]
        hit = crosses & (px < xint)
        inside[start : start + step] = (hit.sum(axis=1) % 2) == 1
    return inside


def is_simple_polygon(poly: np.ndarray) -> bool:
    """No two non-adjacent edges intersect."""
    n = len(poly)
    if n < 3:
        return False
    a = poly
    b = np.roll(poly, -1, axis=0)

    def orient(p: np.ndarray, q: np.ndarray, r: np.ndarray) -> np.ndarray:
        return np.sign((q[..., 0] - p[..., 0]) * (r[..., 1] - p[..., 1]) - (q[..., 1] - p[..., 1]) * (r[..., 0] - p[..., 0]))

    idx = np.arange(n)
    for i in range(n):
        j = idx[(idx > i + 1) & ~((i == 0) & (idx == n - 1))]
        if j.size == 0:
            continue
        p1, q1 = a[i][None], b[i][None]
        p2, q2 = a[j], b[j]
        o1, o2 = orient(p1, q1, p2), orient(p1, q1, q2)
        o3, o4 = orient(p2, q2, p1), orient(p2, q2, q1)
        if np.any((o1 * o2 < 0) & (o3 * o4 < 0)):
            return False
        if np.any((o1 == 0) & (o2 == 0) & (o3 == 0) & (o4 == 0)):
            return False
    return True


def koch_polygon(level: int, size: float = 1.0) -> np.ndarray:
    """Counterclockwise von Koch prefractal: 3 * 4**level edges, centroid at 0."""
    if not (0 <= level <= KOCH_MAX_LEVEL):
        raise InputError(f"koch level must lie in 0..{KOCH_MAX_LEVEL}, got {level}")
    R = size / np.sqrt(3.0)
    ang = np.deg2rad([90.0, 210.0, 330.0])
    poly = np.column_stack([R * np.cos(ang), R * np.sin(ang)])
    c, s = np.cos(-np.pi / 3), np.sin(-np.pi / 3)
    rot = np.array([[c, -s], [s, c]])
    for _ in range(level):
        a = poly
        d = np.roll(poly, -1, axis=0) - a
        p0 = a + d / 3.0
        p2 = a + 2.0 * d / 3.0
        p1 = p0 + (p2 - p0) @ rot.T  # bump to the right of travel, i.e. outward
        poly = np.stack([a, p0, p1, p2], axis=1).reshape(-1, 2)
    return poly


def koch_boundary_length(level: int, size: float = 1.0) -> float:
    return 3.0 * size * (4.0 / 3.0) ** level


def square_polygon(half_side: float) -> np.ndarray:
    h = half_side
    return np.array([[-h, -h], [h, -h], [h, h], [-h, h]], dtype=float)


# operations


def normalize_domain(raw: Domain, z0: tuple[float, float] | np.ndarray = (0.0, 0.0)) -> Domain:
    """Translate z0 to 0 and dilate so that dist(0, outer) = 4; the hole becomes B(0, 1)."""
    z = np.asarray(z0, dtype=float).reshape(2)
    if not raw.contains(z[None])[0]:
        raise InputError(f"z0 = {tuple(z)} is not interior to the outer boundary")
    d = float(raw.boundary_distance(z[None])[0])
    if d <= 0:
        raise InputError(f"z0 = {tuple(z)} lies on the outer boundary")
    scale = NORMALIZED_DISTANCE / d
    outer = scale * (raw.outer - z[None])
    norm = raw.normalization.then(z, scale)
    if raw.is_circle:
        oc = scale * (np.asarray(raw.outer_center) - z)
        return replace(
            raw,
            outer=outer,
            inner_center=(0.0, 0.0),
            inner_radius=1.0,
            outer_radius=raw.outer_radius * scale,
            outer_center=(float(oc[0]), float(oc[1])),
            normalization=norm,
        )
    return replace(raw, outer=outer, inner_center=(0.0, 0.0), inner_radius=1.0, normalization=norm)


def _circle_polygon(radius: float, center: tuple[float, float] = (0.0, 0.0), n: int = _DISK_POLYGON_VERTICES) -> np.ndarray:
    th = 2 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])


def make_domain(kind: str, params: dict[str, Any] | None = None) -> Domain:
    """Build a normalized test domain.

    disk:   {"radius": R > 1}; the ring 1 < |z| < R (R = 4 is the d = 4 convention)
    square: {"half_side": a, "z0": (x, y)}
    koch:   {"level": 0..5, "size": side length, "z0": (x, y)}
    custom: {"vertices": [[x, y], ...], "z0": (x, y)}
    """
    params = dict(params or {})
    z0 = tuple(params.get("z0", (0.0, 0.0)))
    kind = kind.replace("_", "-")
    if kind == "disk":
        R = float(params.get("radius", 5.0))
        if R <= 1.0:
            raise InputError(f"disk radius must exceed the hole radius 1, got {R}")
        return Domain(
            outer=_circle_polygon(R),
            inner_center=(0.0, 0.0),
            inner_radius=1.0,
            kind="disk",
            outer_radius=R,
        )
    if kind == "square":
        a = float(params.get("half_side", NORMALIZED_DISTANCE))
        if a <= 0:
            raise InputError(f"square half_side must be positive, got {a}")
        raw = Domain(outer=square_polygon(a), inner_center=z0, inner_radius=a / 4, kind="square")
    elif kind in ("koch", "koch-prefractal"):
        level = int(params.get("level", 3))
        size = float(params.get("size", 1.0))
        if size <= 0:
            raise InputError(f"koch size must be positive, got {size}")
        raw = Domain(outer=koch_polygon(level, size), inner_center=z0, inner_radius=0.0, kind="koch-prefractal", level=level)
    elif kind == "custom":
        verts = np.asarray(params.get("vertices", []), dtype=float)
        if verts.ndim != 2 or verts.shape[1] != 2 or len(verts) < 3:
            raise InputError("custom domain needs at least three [x, y] vertices")
        if np.allclose(verts[0], verts[-1]):
            verts = verts[:-1]
        if not is_simple_polygon(verts):
            raise InputError("custom outer polyline is self-intersecting")
        if _signed_area(verts) < 0:
            verts = verts[::-1].copy()
        raw = Domain(outer=verts, inner_center=z0, inner_radius=0.0, kind="custom")
    else:
        raise InputError(f"unknown domain kind {kind!r}")
    dom = normalize_domain(raw, z0)
    logger.debug("domain built", kind=dom.kind, edges=dom.n_edges, scale=dom.normalization.scale)
    return dom
