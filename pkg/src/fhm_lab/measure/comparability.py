"""Two-sided comparison of sup u^(p-1) with r^(p-2) mu(B) near the boundary."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import pandas as pd

from fhm_lab.errors import InputError
from fhm_lab.measure.boundary import BoundaryMeasure, measure_ball
from fhm_lab.solver.fields import ScalarField
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class ComparabilityReport:
    w: tuple[float, float]
    r: float
    sup_u: float  # sup over B(w, r) of u^(p-1)
    mass_half: float  # mu(B(w, r/2))
    mass_double: float  # mu(B(w, 2r))
    ratio_half: float
    ratio_double: float
    degenerate: bool

    def as_dict(self) -> dict[str, float | bool]:
        return {
            "wx": self.w[0],
            "wy": self.w[1],
            "r": self.r,
            "sup_u": self.sup_u,
            "mass_half": self.mass_half,
            "mass_double": self.mass_double,
            "ratio_half": self.ratio_half,
            "ratio_double": self.ratio_double,
            "degenerate": self.degenerate,
        }


def check_measure_solution_comparability(
    u: ScalarField,
    mu: BoundaryMeasure,
    w: Sequence[float],
    r: float,
    p: float | None = None,
) -> ComparabilityReport:
    """Returns sup u^(p-1) / (r^(p-2) mu(B(w, r/2))) and sup u^(p-1) / (r^(p-2) mu(B(w, 2r)))."""
    if r <= 0:
        raise InputError(f"radius must be positive, got {r}")
    p = mu.p if p is None else p
    m = u.mesh
    c = np.asarray(w, dtype=float)
    if m.outer_distance(c[None])[0] > 4 * r:
        raise InputError(f"B(w, 4r) does not meet the outer boundary for w={tuple(c)}, r={r}")
    near = np.hypot(*(m.vertices - c).T) <= r
    sup_u = float(np.max(u.values[near]) ** (p - 1.0)) if near.any() else 0.0
    half = measure_ball(mu, c, r / 2)
    double = measure_ball(mu, c, 2 * r)
    scale = r ** (p - 2.0)
    degenerate = double <= 0.0 or half <= 0.0 or sup_u <= 0.0
    ratio_half = sup_u / (scale * half) if half > 0 else np.inf
    ratio_double = sup_u / (scale * double) if double > 0 else np.inf
    if degenerate:
        logger.info("degenerate comparability ball", w=tuple(c), r=r, mass_half=half, mass_double=double)
    return ComparabilityReport(
        w=(float(c[0]), float(c[1])),
        r=float(r),
        sup_u=sup_u,
        mass_half=half,
        mass_double=double,
        ratio_half=float(ratio_half),
        ratio_double=float(ratio_double),
        degenerate=degenerate,
    )


def outer_boundary_points(u: ScalarField, n: int = 8) -> np.ndarray:
    """n outer-loop vertices evenly spaced by index."""
    loop = u.mesh.outer_loop
    idx = np.linspace(0, len(loop), min(n, len(loop)), endpoint=False).astype(int)
    return u.mesh.vertices[loop[idx]]


def comparability_sweep(
    u: ScalarField,
    mu: BoundaryMeasure,
    points: np.ndarray,
    radii: Sequence[float],
) -> pd.DataFrame:
    rows = [check_measure_solution_comparability(u, mu, w, r).as_dict() for w in points for r in radii]
    return pd.DataFrame(rows)
