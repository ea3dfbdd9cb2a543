"""The boundary measure mu of a capacitary field, as arc weights along the outer loop."""

from __future__ import annotations

from dataclasses import dataclass, replace
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd

from fhm_lab.errors import InputError, MeasureExtractionError
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.solver.assembly import weak_gradient
from fhm_lab.solver.fields import ScalarField
from fhm_lab.utils.io import file_checksum, format_float
from fhm_lab.utils.logging import get_logger, log_artifact
from fhm_lab.utils.schemas import MEASURE_SCHEMA, validate

logger = get_logger(__name__)

WEAK_IDENTITY = "weak-identity"
LEVEL_LIMIT = "level-limit"
SYNTHETIC = "synthetic"
CLAMP_LIMIT = 0.01


@dataclass(frozen=True, eq=False)
class BoundaryMeasure:
    """Arc i has midpoint midpoints[i], length lengths[i] and mass weights[i]."""

    midpoints: np.ndarray
    lengths: np.ndarray
    weights: np.ndarray
    method: str
    field_checksum: str = ""
    p: float = 2.0
    clamped_mass: float = 0.0

    def __post_init__(self) -> None:
        n = len(self.weights)
        if self.midpoints.shape != (n, 2) or self.lengths.shape != (n,):
            raise InputError("midpoints, lengths and weights must describe the same arcs")
        if np.any(self.weights < 0):
            raise InputError("arc weights must be nonnegative")

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    @property
    def n_arcs(self) -> int:
        return len(self.weights)

    @property
    def density(self) -> np.ndarray:
        return self.weights / self.lengths

    def normalized(self) -> "BoundaryMeasure":
        """Probability version (total mass 1)."""
        return replace(self, weights=self.weights / self.total_mass)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            {
                "arc_index": np.arange(self.n_arcs),
                "midpoint_x": self.midpoints[:, 0],
                "midpoint_y": self.midpoints[:, 1],
                "arc_length": self.lengths,
                "weight": self.weights,
            }
        )


def _outer_arcs(u: ScalarField) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    m = u.mesh
    loop = m.outer_loop
    a = m.vertices[loop]
    b = m.vertices[np.roll(loop, -1)]
    return loop, 0.5 * (a + b), np.hypot(*(b - a).T)


def boundary_measure(u: ScalarField, F: Integrand) -> BoundaryMeasure:
    """Weak-identity extraction: test the equation with the hat functions of outer vertices.

    Vertex weight is -(1/p) * sum_T area <grad f(grad u), grad phi_v>, so that mu has density
    f(grad u)/|grad u| on the boundary and total mass int f(grad u).
    """
    loop, mid, length = _outer_arcs(u)
    g = weak_gradient(u.mesh, u.values, F.unregularized())
    vertex = -g[loop] / F.p
    total = float(vertex.sum())
    negative = float(-vertex[vertex < 0].sum())
    worst = float(-vertex.min()) if vertex.min() < 0 else 0.0
    if total <= 0:
        raise MeasureExtractionError(f"extracted mass {total:g} is not positive")
    if negative > CLAMP_LIMIT * total:
        raise MeasureExtractionError(
            f"negative vertex mass {negative:g} exceeds {CLAMP_LIMIT:.0%} of total {total:g}; mesh under-resolved or field unconverged",
            residual=negative / total,
        )
    if negative > 0:
        logger.info("negative boundary weights clamped", clamped=negative, worst=worst, total=total)
    vertex = np.maximum(vertex, 0.0)
    weights = 0.5 * (vertex + np.roll(vertex, -1))
    return BoundaryMeasure(
        midpoints=mid,
        lengths=length,
        weights=weights,
        method=WEAK_IDENTITY,
        field_checksum=u.mesh.checksum,
        p=F.p,
        clamped_mass=negative,
    )


def _edge_triangles(u: ScalarField, edges: np.ndarray) -> np.ndarray:
    """Index of the (unique) triangle containing each boundary edge."""
    tris = u.mesh.triangles
    local = np.sort(np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]), axis=1)
    owner = np.tile(np.arange(len(tris)), 3)
    key = {(int(a), int(b)): int(k) for (a, b), k in zip(local, owner)}
    return np.array([key[tuple(sorted((int(a), int(b))))] for a, b in edges])


def level_limit_measure(u: ScalarField, F: Integrand) -> BoundaryMeasure:
    """Density-formula extraction: f(grad u_T)/|grad u_T| times arc length on each outer edge."""
    loop, mid, length = _outer_arcs(u)
    edges = np.column_stack([loop, np.roll(loop, -1)])
    grads = u.gradients[_edge_triangles(u, edges)]
    norm = np.hypot(*grads.T)
    ok = norm > 0
    dens = np.zeros(len(norm))
    dens[ok] = F.unregularized().value(grads[ok]) / norm[ok]
    return BoundaryMeasure(
        midpoints=mid, lengths=length, weights=dens * length, method=LEVEL_LIMIT, field_checksum=u.mesh.checksum, p=F.p
    )


def measure_ball(mu: BoundaryMeasure, w: Sequence[float], r: float) -> float:
    """Mass of arcs whose midpoint lies in the closed ball B(w, r)."""
    if r <= 0:
        raise InputError(f"radius must be positive, got {r}")
    d = np.hypot(*(mu.midpoints - np.asarray(w, dtype=float)).T)
    return float(mu.weights[d <= r].sum())


def measure_balls(mu: BoundaryMeasure, centers: np.ndarray, radii: np.ndarray | float) -> np.ndarray:
    """Vectorised measure_ball over paired centers and radii."""
    c = np.atleast_2d(np.asarray(centers, dtype=float))
    r = np.broadcast_to(np.asarray(radii, dtype=float), (len(c),))
    out = np.empty(len(c))
    step = max(1, 4_000_000 // max(mu.n_arcs, 1))
    for s in range(0, len(c), step):
        blk = c[s : s + step]
        d = np.hypot(blk[:, None, 0] - mu.midpoints[None, :, 0], blk[:, None, 1] - mu.midpoints[None, :, 1])
        out[s : s + step] = (d <= r[s : s + step, None]) @ mu.weights
    return out


class MeasureComparison(NamedTuple):
    ratio_min: float
    ratio_max: float
    ratio_median: float
    n_compared: int
    ratios: np.ndarray


def compare_measures(a: BoundaryMeasure, b: BoundaryMeasure, floor: float = 1e-12) -> MeasureComparison:
    """Arcwise ratios a/b on arcs where both carry mass above floor * total."""
    if a.n_arcs != b.n_arcs or not np.allclose(a.midpoints, b.midpoints):
        raise InputError("measures must share the same arcs to be compared")
    mask = (a.weights > floor * a.total_mass) & (b.weights > floor * b.total_mass)
    if not mask.any():
        raise InputError("no arc carries mass in both measures")
    ratios = a.weights[mask] / b.weights[mask]
    return MeasureComparison(
        ratio_min=float(ratios.min()),
        ratio_max=float(ratios.max()),
        ratio_median=float(np.median(ratios)),
        n_compared=int(mask.sum()),
        ratios=ratios,
    )


def rescale_measure(mu: BoundaryMeasure, s_hat: float, p: float | None = None, z0: Sequence[float] = (0.0, 0.0)) -> BoundaryMeasure:
    """Pull mu back through Xi(z) = z0 + s_hat*z: weights times s_hat^(p-2), arcs mapped by Xi^-1."""
    if s_hat <= 0:
        raise InputError(f"s_hat must be positive, got {s_hat}")
    p = mu.p if p is None else p
    z = np.asarray(z0, dtype=float)
    return replace(
        mu,
        midpoints=(mu.midpoints - z) / s_hat,
        lengths=mu.lengths / s_hat,
        weights=mu.weights * s_hat ** (p - 2.0),
        p=p,
    )


def write_measure_csv(mu: BoundaryMeasure, path: str | Path) -> str:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    df = validate(mu.to_frame(), MEASURE_SCHEMA, "measure")
    with open(path, "w") as fh:
        fh.write(
            f"# total_mass={format_float(mu.total_mass)} field_sha256={mu.field_checksum or '-'} "
            f"method={mu.method} p={format_float(mu.p)} clamped_mass={format_float(mu.clamped_mass)}\n"
        )
        df.to_csv(fh, index=False, float_format="%.17g")
    digest = file_checksum(path)
    logger.info("measure written", **log_artifact(str(path), digest, rows=mu.n_arcs, total_mass=mu.total_mass))
    return digest


def read_measure_csv(path: str | Path) -> BoundaryMeasure:
    with open(path) as fh:
        header = fh.readline()
    if not header.startswith("#"):
        raise InputError(f"{path}: missing measure header comment")
    meta = dict(item.split("=", 1) for item in header[1:].split())
    df = validate(pd.read_csv(path, comment="#", float_precision="round_trip"), MEASURE_SCHEMA, "measure")
    mu = BoundaryMeasure(
        midpoints=df[["midpoint_x", "midpoint_y"]].to_numpy(dtype=float),
        lengths=df["arc_length"].to_numpy(dtype=float),
        weights=df["weight"].to_numpy(dtype=float),
        method=meta.get("method", WEAK_IDENTITY),
        field_checksum="" if meta.get("field_sha256", "-") == "-" else meta["field_sha256"],
        p=float(meta.get("p", 2.0)),
        clamped_mass=float(meta.get("clamped_mass", 0.0)),
    )
    if "total_mass" in meta and not np.isclose(mu.total_mass, float(meta["total_mass"]), rtol=1e-12):
        raise InputError(f"{path}: weights sum to {mu.total_mass!r}, header says {meta['total_mass']}")
    return mu
