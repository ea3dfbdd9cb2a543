"""v = log f(grad u) per triangle, its one-sided truncation w and the shifted g."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from fhm_lab.errors import InputError
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.solver.fields import ScalarField
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

DEGENERATE_GRADIENT = 1e-14
TRUNCATION_RADIUS = 2.0
REGIMES = ("p<2", "p=2", "p>2")


def regime_of(p: float) -> str:
    return "p<2" if p < 2.0 else ("p>2" if p > 2.0 else "p=2")


@dataclass(frozen=True, eq=False)
class LogDensityField:
    v: np.ndarray  # -inf on excluded triangles
    regime: str
    branch: str  # "pos" uses max(v, 0), "neg" uses max(-v, 0)
    c_prime: float
    excluded: np.ndarray  # bool per triangle
    excluded_area: float
    near_hole: np.ndarray  # triangles meeting B(0, 2)

    @property
    def w_pos(self) -> np.ndarray:
        return np.where(self.excluded, 0.0, np.maximum(self.v, 0.0))

    @property
    def w_neg(self) -> np.ndarray:
        return np.where(self.excluded, 0.0, np.maximum(-self.v, 0.0))

    @property
    def w(self) -> np.ndarray:
        return self.w_pos if self.branch == "pos" else self.w_neg

    @property
    def g(self) -> np.ndarray:
        return np.maximum(self.w - self.c_prime, 0.0)

    def for_branch(self, branch: str, c_prime: float | None = None) -> "LogDensityField":
        """The same field truncated on the other side; at p = 2 both are reported."""
        if branch not in ("pos", "neg"):
            raise InputError(f"branch must be 'pos' or 'neg', got {branch!r}")
        w = np.where(self.excluded, 0.0, np.maximum(self.v if branch == "pos" else -self.v, 0.0))
        cp = _auto_shift(w, self.near_hole) if c_prime is None else float(c_prime)
        return replace(self, branch=branch, c_prime=cp)


def _triangles_meeting_ball(u: ScalarField, radius: float) -> np.ndarray:
    """Triangles at distance < radius from the origin (exact point-to-edge distance)."""
    p = u.mesh.vertices[u.mesh.triangles]
    a, b = p, np.roll(p, -1, axis=1)
    ab = b - a
    lam = np.clip(-np.sum(a * ab, axis=2) / np.maximum(np.sum(ab * ab, axis=2), 1e-300), 0.0, 1.0)
    closest = a + lam[..., None] * ab
    return np.hypot(closest[..., 0], closest[..., 1]).min(axis=1) < radius


def _auto_shift(w: np.ndarray, near_hole: np.ndarray) -> float:
    return float(w[near_hole].max()) if near_hole.any() else 0.0


def log_density(
    u: ScalarField,
    F: Integrand,
    p_regime: str | None = None,
    c_prime: float | None = None,
) -> LogDensityField:
    """Per-triangle v, w, g. Without c_prime, c' is the max of w over triangles meeting B(0, 2)."""
    regime = p_regime or regime_of(F.p)
    if regime not in REGIMES:
        raise InputError(f"unknown p regime {regime!r}")
    if c_prime is not None and c_prime < 0:
        raise InputError(f"c_prime must be nonnegative, got {c_prime}")
    grads = u.gradients
    norm = np.hypot(grads[:, 0], grads[:, 1])
    excluded = norm < DEGENERATE_GRADIENT
    v = np.full(len(norm), -np.inf)
    if (~excluded).any():
        v[~excluded] = np.log(F.unregularized().value(grads[~excluded]))
    excluded_area = float(u.mesh.areas[excluded].sum())
    if excluded.any():
        logger.info("degenerate triangles excluded from log density", count=int(excluded.sum()), area=excluded_area)

    branch = "neg" if regime == "p>2" else "pos"
    near = _triangles_meeting_ball(u, TRUNCATION_RADIUS)
    w = np.where(excluded, 0.0, np.maximum(v if branch == "pos" else -v, 0.0))
    cp = _auto_shift(w, near) if c_prime is None else float(c_prime)
    return LogDensityField(
        v=v,
        regime=regime,
        branch=branch,
        c_prime=cp,
        excluded=excluded,
        excluded_area=excluded_area,
        near_hole=near,
    )
