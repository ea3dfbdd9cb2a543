"""Constrained quality Delaunay meshes of the capacitary ring."""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import cached_property
from pathlib import Path

import numpy as np
import triangle

from fhm_lab.errors import InputError, MeshGenerationError
from fhm_lab.geometry.domains import Domain, points_in_polygon, polygon_distance
from fhm_lab.utils.io import array_checksum, file_checksum
from fhm_lab.utils.logging import get_logger, log_artifact

logger = get_logger(__name__)

MIN_ANGLE_DEG = 20.0
MIN_INNER_SEGMENTS = 16
OUTER, INNER = "outer", "inner"


@dataclass(frozen=True, eq=False)
class Mesh:
    vertices: np.ndarray  # (N, 2)
    triangles: np.ndarray  # (M, 3), counterclockwise
    boundary_edges: np.ndarray  # (K, 2)
    boundary_tags: np.ndarray  # (K,) OUTER | INNER
    h_max: float
    grading: float = 1.0

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @cached_property
    def checksum(self) -> str:
        return array_checksum(self.vertices, self.triangles.astype(np.int64), self.boundary_edges.astype(np.int64))

    @cached_property
    def outer_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == OUTER]

    @cached_property
    def inner_edges(self) -> np.ndarray:
        return self.boundary_edges[self.boundary_tags == INNER]

    @cached_property
    def outer_loop(self) -> np.ndarray:
        """Outer boundary vertex indices in counterclockwise order."""
        return _chain(self.outer_edges)

    @cached_property
    def inner_loop(self) -> np.ndarray:
        return _chain(self.inner_edges)

    @cached_property
    def outer_nodes(self) -> np.ndarray:
        return np.unique(self.outer_edges)

    @cached_property
    def inner_nodes(self) -> np.ndarray:
        return np.unique(self.inner_edges)

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(self.n_vertices, dtype=bool)
        mask[self.boundary_edges.ravel()] = False
        return np.flatnonzero(mask)

    @cached_property
    def areas(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        e1, e2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.vertices[self.triangles].mean(axis=1)

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        """(M, 3, 2): gradient of each P1 hat function on each triangle."""
        p = self.vertices[self.triangles]
        # grad phi_i = rot90(p_{i+2} - p_{i+1}) / (2 area)
        opp = np.roll(p, -2, axis=1) - np.roll(p, -1, axis=1)
        g = np.stack([-opp[..., 1], opp[..., 0]], axis=-1)
        return g / (2.0 * self.areas[:, None, None])

    def edge_lengths(self) -> np.ndarray:
        p = self.vertices[self.triangles]
        return np.linalg.norm(np.roll(p, -1, axis=1) - p, axis=2)

    def transformed(self, matrix: np.ndarray) -> "Mesh":
        """Image of the mesh under x -> matrix @ x (positive determinant)."""
        A = np.asarray(matrix, dtype=float)
        if np.linalg.det(A) <= 0:
            raise InputError("mesh transform must preserve orientation")
        return replace(self, vertices=self.vertices @ A.T)

    def outer_distance(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return polygon_distance(pts, self.vertices[self.outer_loop])

    def boundary_distance(self, points: np.ndarray) -> np.ndarray:
        """Distance to the nearer of the two discrete boundary loops."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        d_out = self.outer_distance(pts)
        d_in = polygon_distance(pts, self.vertices[self.inner_loop])
        return np.minimum(d_out, d_in)

    def contains(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return points_in_polygon(pts, self.vertices[self.outer_loop]) & ~points_in_polygon(
            pts, self.vertices[self.inner_loop]
        )

    def min_angle(self) -> float:
        """Smallest interior angle over all triangles, in degrees."""
        p = self.vertices[self.triangles]
        a = np.roll(p, -1, axis=1) - p
        b = np.roll(p, 1, axis=1) - p
        cos = np.sum(a * b, axis=2) / (np.linalg.norm(a, axis=2) * np.linalg.norm(b, axis=2))
        return float(np.degrees(np.arccos(np.clip(cos, -1.0, 1.0))).min())


def _chain(edges: np.ndarray) -> np.ndarray:
    if len(edges) == 0:
        return np.empty(0, dtype=np.int64)
    nxt = {int(a): int(b) for a, b in edges}
    start = int(edges[0, 0])
    loop = [start]
    cur = nxt[start]
    while cur != start and len(loop) <= len(edges):
        loop.append(cur)
        cur = nxt.get(cur, start)
    return np.asarray(loop, dtype=np.int64)


def _subdivide_polygon(poly: np.ndarray, spacing: float) -> np.ndarray:
    out = []
    nxt = np.roll(poly, -1, axis=0)
    for a, b in zip(poly, nxt):
        k = max(1, int(np.ceil(np.hypot(*(b - a)) / spacing)))
        t = np.arange(k)[:, None] / k
        out.append(a + t * (b - a))
    return np.vstack(out)


def _circle(center: tuple[float, float], radius: float, n: int) -> np.ndarray:
    th = 2 * np.pi * np.arange(n) / n
    return np.column_stack([center[0] + radius * np.cos(th), center[1] + radius * np.sin(th)])


def _loop_segments(offset: int, n: int) -> np.ndarray:
    idx = offset + np.arange(n)
    return np.column_stack([idx, np.roll(idx, -1)])


def mesh(domain: Domain, h_max: float, grading: float = 1.0, min_angle: float = MIN_ANGLE_DEG) -> Mesh:
    """Triangulate the ring with target edge length h_max, refined to grading*h_max at the outer boundary.

    Every outer polyline vertex is kept as a mesh vertex and boundary segments are never split,
    so vertices 0..n_outer-1 are the outer loop and the next n_inner form the inner circle.
    """
    if not (0 < h_max <= 0.2 * domain.inner_radius):
        raise InputError(f"h_max must lie in (0, {0.2 * domain.inner_radius}], got {h_max}")
    if not (0 < grading <= 1):
        raise InputError(f"grading must lie in (0, 1], got {grading}")

    h_out = grading * h_max
    if domain.is_circle:
        n = max(MIN_INNER_SEGMENTS, int(np.ceil(2 * np.pi * domain.outer_radius / h_out)))
        outer = _circle(domain.outer_center, domain.outer_radius, n)
    else:
        outer = _subdivide_polygon(domain.outer, h_out)
    n_in = max(MIN_INNER_SEGMENTS, int(np.ceil(2 * np.pi * domain.inner_radius / h_max)))
    inner = _circle(domain.inner_center, domain.inner_radius, n_in)

    n_out = len(outer)
    pts = np.vstack([outer, inner])
    segs = np.vstack([_loop_segments(0, n_out), _loop_segments(n_out, n_in)])
    markers = np.concatenate([np.full(n_out, 1), np.full(n_in, 2)])[:, None]
    area = np.sqrt(3.0) / 4.0 * h_max**2
    opts = f"pq{min_angle:g}a{area:.12f}Y"
    try:
        out = triangle.triangulate(
            {
                "vertices": pts,
                "segments": segs,
                "segment_markers": markers,
                "holes": np.asarray([domain.inner_center], dtype=float),
            },
            opts,
        )
    except Exception as exc:  # the C library reports failures as generic errors
        raise MeshGenerationError(f"triangle failed with options {opts!r}: {exc}") from exc

    verts = np.asarray(out.get("vertices"), dtype=float)
    tris = np.asarray(out.get("triangles"), dtype=np.int64)
    if tris.size == 0 or len(verts) < len(pts) or not np.array_equal(verts[: len(pts)], pts):
        raise MeshGenerationError(
            f"triangle returned an unusable mesh ({len(verts)} vertices, {tris.size // 3} triangles) for {domain.kind}"
        )

    p = verts[tris]
    signed = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 1, 1] - p[:, 0, 1]) * (p[:, 2, 0] - p[:, 0, 0])
    cw = signed < 0
    tris[cw] = tris[cw][:, [0, 2, 1]]

    # domain polylines are counterclockwise, so loop order is boundary order
    outer_edges = _loop_segments(0, n_out)
    inner_edges = _loop_segments(n_out, n_in)
    result = Mesh(
        vertices=verts,
        triangles=tris,
        boundary_edges=np.vstack([outer_edges, inner_edges]),
        boundary_tags=np.array([OUTER] * n_out + [INNER] * n_in),
        h_max=float(h_max),
        grading=float(grading),
    )
    logger.info(
        "mesh built",
        kind=domain.kind,
        vertices=result.n_vertices,
        triangles=result.n_triangles,
        h_max=h_max,
        grading=grading,
    )
    return result


# plain-text mesh format


def write_mesh(m: Mesh, path: str | Path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        fh.write(f"nodes {m.n_vertices} / triangles {m.n_triangles}\n")
        fh.write(f"# h_max {m.h_max!r} grading {m.grading!r}\n")
        for x, y in m.vertices:
            fh.write(f"{x!r} {y!r}\n")
        for a, b, c in m.triangles:
            fh.write(f"{a} {b} {c}\n")
        fh.write(f"boundary {len(m.boundary_edges)}\n")
        for (a, b), tag in zip(m.boundary_edges, m.boundary_tags):
            fh.write(f"{a} {b} {tag}\n")
    digest = file_checksum(path)
    logger.info("mesh written", **log_artifact(str(path), digest, rows=m.n_triangles))
    return digest


def read_mesh(path: str | Path) -> Mesh:
    with open(path) as fh:
        lines = fh.read().splitlines()
    try:
        head = lines[0].split()
        n_nodes, n_tris = int(head[1]), int(head[4])
        body = 1
        h_max, grading = float("nan"), 1.0
        if lines[1].startswith("#"):
            meta = lines[1].lstrip("#").split()
            h_max, grading = float(meta[1]), float(meta[3])
            body = 2
        verts = np.array([[float(v) for v in ln.split()] for ln in lines[body : body + n_nodes]])
        body += n_nodes
        tris = np.array([[int(v) for v in ln.split()] for ln in lines[body : body + n_tris]], dtype=np.int64)
        body += n_tris
        n_b = int(lines[body].split()[1])
        rows = [ln.split() for ln in lines[body + 1 : body + 1 + n_b]]
    except (IndexError, ValueError) as exc:
        raise InputError(f"{path}: malformed mesh file ({exc})") from exc
    edges = np.array([[int(r[0]), int(r[1])] for r in rows], dtype=np.int64)
    tags = np.array([r[2] for r in rows])
    if len(verts) != n_nodes or len(tris) != n_tris or len(edges) != n_b:
        raise InputError(f"{path}: truncated mesh file")
    if not np.isfinite(h_max):
        e = verts[tris] - verts[np.roll(tris, -1, axis=1)]
        h_max = float(np.hypot(e[..., 0], e[..., 1]).max())
    return Mesh(vertices=verts, triangles=tris, boundary_edges=edges, boundary_tags=tags, h_max=h_max, grading=grading)
