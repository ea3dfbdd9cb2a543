"""Interior and boundary regularity diagnostics for a solved capacitary field."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy.stats import linregress

from fhm_lab.errors import InputError
from fhm_lab.geometry.domains import Domain
from fhm_lab.geometry.mesher import Mesh
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.solver.fields import ScalarField
from fhm_lab.solver.newton import SolveOptions, continuation, geometric_schedule
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

Ball = tuple[Sequence[float], float]


@dataclass(frozen=True)
class HarnackReport:
    table: pd.DataFrame

    @property
    def max_ratio(self) -> float:
        used = self.table.loc[~self.table["skipped"], "ratio"]
        return float(used.max()) if len(used) else float("nan")


def _ball_fits(m: Mesh, center: np.ndarray, radius: float) -> bool:
    return bool(m.contains(center[None])[0] and m.boundary_distance(center[None])[0] >= radius)


def interior_balls(m: Mesh, n: int = 8, fraction: float = 0.3) -> list[Ball]:
    """Up to n balls of radius fraction * max boundary distance whose doubles stay in the ring.

    Centers are centroids spread by angle about the hole.
    """
    d = m.boundary_distance(m.centroids)
    r = fraction * float(d.max())
    c = m.centroids[d >= 2.0 * r]
    hole = m.vertices[m.inner_loop].mean(axis=0)
    order = np.argsort(np.arctan2(c[:, 1] - hole[1], c[:, 0] - hole[0]))
    pick = order[np.unique(np.linspace(0, len(order) - 1, min(n, len(order))).astype(int))]
    return [((float(x), float(y)), r) for x, y in c[pick]]


def harnack_diagnostic(u: ScalarField, balls: Sequence[Ball]) -> HarnackReport:
    """max u / min u over the nodes of each B(c, r) with B(c, 2r) inside the ring."""
    m = u.mesh
    rows = []
    for center, radius in balls:
        c = np.asarray(center, dtype=float)
        row = {"cx": c[0], "cy": c[1], "radius": float(radius), "n_nodes": 0, "ratio": np.nan, "skipped": True, "note": ""}
        if radius <= 0:
            raise InputError(f"ball radius must be positive, got {radius}")
        if not _ball_fits(m, c, 2 * radius):
            row["note"] = "doubled ball leaves the ring"
            logger.info("harnack ball skipped", center=tuple(c), radius=radius, reason=row["note"])
            rows.append(row)
            continue
        inside = np.hypot(*(m.vertices - c).T) <= radius
        if not inside.any():
            row["note"] = "no mesh nodes in ball"
            rows.append(row)
            continue
        vals = u.values[inside]
        lo, hi = float(vals.min()), float(vals.max())
        row.update(n_nodes=int(inside.sum()), ratio=hi / lo if lo > 0 else np.inf, skipped=False)
        rows.append(row)
    return HarnackReport(pd.DataFrame(rows))


@dataclass(frozen=True)
class CaccioppoliReport:
    table: pd.DataFrame

    @property
    def max_ratio(self) -> float:
        used = self.table.loc[~self.table["skipped"], "ratio"]
        return float(used.max()) if len(used) else float("nan")


def caccioppoli_diagnostic(u: ScalarField, balls: Sequence[Ball], p: float) -> CaccioppoliReport:
    """Both sides of int_B |grad u|^p <= C r^-p int_2B |u - u_2B|^p over centroid quadrature."""
    m = u.mesh
    gnorm = np.hypot(*u.gradients.T)
    uc = u.centroid_values
    rows = []
    for center, radius in balls:
        c = np.asarray(center, dtype=float)
        row = {"cx": c[0], "cy": c[1], "radius": float(radius), "lhs": np.nan, "rhs": np.nan, "ratio": np.nan, "skipped": True}
        if not _ball_fits(m, c, 2 * radius):
            logger.info("caccioppoli ball skipped", center=tuple(c), radius=radius)
            rows.append(row)
            continue
        dist = np.hypot(*(m.centroids - c).T)
        inner, outer = dist <= radius, dist <= 2 * radius
        if not inner.any():
            rows.append(row)
            continue
        lhs = float(np.sum(m.areas[inner] * gnorm[inner] ** p))
        mean = float(np.average(uc[outer], weights=m.areas[outer]))
        rhs = float(radius**-p * np.sum(m.areas[outer] * np.abs(uc[outer] - mean) ** p))
        row.update(lhs=lhs, rhs=rhs, ratio=lhs / rhs if rhs > 0 else np.inf, skipped=False)
        rows.append(row)
    return CaccioppoliReport(pd.DataFrame(rows))


class HolderFit(NamedTuple):
    alpha: float
    r_squared: float
    radii: np.ndarray
    oscillation: np.ndarray


def boundary_holder_diagnostic(
    u: ScalarField,
    point: Sequence[float],
    radii: Sequence[float] | None = None,
) -> HolderFit:
    """Decay exponent of osc_{B(w, r)} u against r at an outer boundary point w."""
    m = u.mesh
    w = np.asarray(point, dtype=float)
    if radii is None:
        radii = np.geomspace(4 * m.h_max * m.grading, 1.0, 8)
    r = np.asarray(radii, dtype=float)
    dist = np.hypot(*(m.vertices - w).T)
    osc = np.array([np.ptp(u.values[dist <= ri]) if np.any(dist <= ri) else np.nan for ri in r])
    ok = np.isfinite(osc) & (osc > 0)
    if ok.sum() < 3:
        raise InputError("need at least three radii with a positive oscillation")
    reg = linregress(np.log(r[ok]), np.log(osc[ok]))
    return HolderFit(alpha=float(reg.slope), r_squared=float(reg.rvalue**2), radii=r, oscillation=osc)


@dataclass(frozen=True)
class FundamentalInequalityReport:
    table: pd.DataFrame  # one row per distance threshold

    def constant(self, threshold: float) -> float:
        row = self.table.loc[np.isclose(self.table["threshold"], threshold)]
        if row.empty:
            raise KeyError(threshold)
        return float(row["c"].iloc[0])


def fundamental_inequality(
    u: ScalarField,
    domain: Domain,
    thresholds: Sequence[float] = (0.5, 2.0),
) -> FundamentalInequalityReport:
    """Band of |grad u| d(z)/u(z) over centroids with d(z) >= threshold."""
    m = u.mesh
    d = domain.boundary_distance(m.centroids)
    uc = u.centroid_values
    g = np.hypot(*u.gradients.T)
    rows = []
    for thr in thresholds:
        mask = (d >= thr) & (uc > 0) & (g > 0)
        if not mask.any():
            rows.append({"threshold": thr, "n": 0, "ratio_min": np.nan, "ratio_max": np.nan, "c": np.nan})
            continue
        ratio = g[mask] * d[mask] / uc[mask]
        lo, hi = float(ratio.min()), float(ratio.max())
        rows.append({"threshold": thr, "n": int(mask.sum()), "ratio_min": lo, "ratio_max": hi, "c": max(hi, 1.0 / lo)})
    return FundamentalInequalityReport(pd.DataFrame(rows))


def regularization_study(
    m: Mesh,
    F: Integrand,
    epsilons: Sequence[float],
    opts: SolveOptions | None = None,
) -> pd.DataFrame:
    """L-infinity gap between the solutions at eps and eps/2 for each requested eps.

    Reports gap / eps^min(1, p-1) as the observed constant; no rate is asserted.
    """
    eps = sorted({float(e) for e in epsilons}, reverse=True)
    if not eps or eps[-1] <= 0:
        raise InputError("regularization study needs positive epsilons")
    wanted = set(eps) | {e / 2 for e in eps}
    schedule = tuple(sorted(set(geometric_schedule(min(wanted), eps0=max(1.0, eps[0]))) | wanted, reverse=True))
    opts = opts or SolveOptions()
    opts = replace(opts, stage_tolerance=opts.tolerance)
    captured: dict[float, np.ndarray] = {}

    def keep(_: int, e: float, values: np.ndarray) -> None:
        if e in wanted:
            captured[e] = values.copy()

    continuation(m, F, schedule, opts, on_stage=keep)
    exponent = min(1.0, F.p - 1.0)
    rows = []
    for e in eps:
        gap = float(np.max(np.abs(captured[e] - captured[e / 2])))
        rows.append({"epsilon": e, "linf_gap": gap, "exponent": exponent, "constant": gap / e**exponent})
    return pd.DataFrame(rows)


class ConvergenceFit(NamedTuple):
    order: float
    intercept: float
    r_squared: float


def convergence_order(hs: Sequence[float], errors: Sequence[float]) -> ConvergenceFit:
    """Least-squares slope of log(error) against log(h)."""
    h = np.asarray(hs, dtype=float)
    e = np.asarray(errors, dtype=float)
    if len(h) != len(e) or len(h) < 2 or np.any(h <= 0) or np.any(e <= 0):
        raise InputError("convergence order needs matching positive h and error sequences of length >= 2")
    if len(h) == 2:
        order = float(np.log(e[1] / e[0]) / np.log(h[1] / h[0]))
        return ConvergenceFit(order=order, intercept=float(np.log(e[0]) - order * np.log(h[0])), r_squared=1.0)
    reg = linregress(np.log(h), np.log(e))
    return ConvergenceFit(order=float(reg.slope), intercept=float(reg.intercept), r_squared=float(reg.rvalue**2))
