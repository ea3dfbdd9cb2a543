"""Dimension estimates for boundary measures and the finite-scale gauge comparison."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
import pandas as pd
from scipy.spatial import ConvexHull, QhullError, cKDTree
from scipy.stats import t as student_t

from fhm_lab.analysis.gauge import GaugeFunction, gauge_value
from fhm_lab.errors import InputError
from fhm_lab.geometry.fractal import ScalingFit, box_masses, fit_scaling, grid_offsets
from fhm_lab.measure.boundary import BoundaryMeasure
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

MIN_RADII = 4
TREND_TOLERANCE = 0.05


def measure_diameter(mu: BoundaryMeasure) -> float:
    pts = mu.midpoints
    try:
        pts = pts[ConvexHull(pts).vertices]
    except (QhullError, ValueError):
        pass  # collinear support: brute force on all points
    if len(pts) > 4096:
        pts = pts[np.linspace(0, len(pts) - 1, 4096).astype(int)]
    d = np.hypot(pts[:, None, 0] - pts[None, :, 0], pts[:, None, 1] - pts[None, :, 1])
    return float(d.max())


def geometric_radii(r_min: float, r_max: float, ratio: float = 2.0) -> np.ndarray:
    n = int(np.floor(np.log(r_max / r_min) / np.log(ratio))) + 1
    return r_min * ratio ** np.arange(max(n, 1))


def default_radii(mu: BoundaryMeasure) -> np.ndarray:
    """Ratio-2 grid from 10x the typical arc length to diameter/10.

    Measures too coarse for MIN_RADII such radii get MIN_RADII log-spaced radii
    starting at 2x the arc length instead.
    """
    arc = float(np.median(mu.lengths))
    top = measure_diameter(mu) / 10.0
    r = geometric_radii(10.0 * arc, top)
    if len(r) >= MIN_RADII:
        return r
    logger.warning("measure too coarse for the reliable radius range", arc_length=arc, r_max=top)
    return np.geomspace(2.0 * arc, top, MIN_RADII)


def _ball_masses(tree: cKDTree, weights: np.ndarray, centers: np.ndarray, radii: np.ndarray) -> np.ndarray:
    out = np.empty((len(centers), len(radii)))
    for j, r in enumerate(radii):
        hits = tree.query_ball_point(centers, r)
        out[:, j] = [weights[h].sum() for h in hits]
    return out


def _row_slopes(x: np.ndarray, Y: np.ndarray, ok: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least-squares slope and R^2 of each row of Y against x, using entries where ok."""
    slopes = np.full(len(Y), np.nan)
    r2 = np.full(len(Y), np.nan)
    for i in range(len(Y)):
        mask = ok[i]
        if mask.sum() < 2:
            continue
        xi, yi = x[mask], Y[i, mask]
        xc = xi - xi.mean()
        denom = float(xc @ xc)
        if denom == 0:
            continue
        b = float(xc @ (yi - yi.mean())) / denom
        resid = yi - yi.mean() - b * xc
        tot = float(((yi - yi.mean()) ** 2).sum())
        slopes[i] = b
        r2[i] = 1.0 - float(resid @ resid) / tot if tot > 0 else 1.0
    return slopes, r2


@dataclass
class DimensionReport:
    centers: pd.DataFrame  # x, y, weight, slope, r_squared
    radii: np.ndarray
    local_dimension: float
    local_ci: tuple[float, float]
    information: ScalingFit | None = None
    gauge_counts: dict[str, float] = field(default_factory=dict)
    below_gauge_at_r_min: float | None = None
    skipped_centers: int = 0

    def summary(self) -> dict[str, float | int | str]:
        out: dict[str, float | int | str] = {
            "local_dimension": self.local_dimension,
            "local_ci_low": self.local_ci[0],
            "local_ci_high": self.local_ci[1],
            "r_min": float(self.radii.min()),
            "r_max": float(self.radii.max()),
            "n_radii": len(self.radii),
            "n_centers": len(self.centers),
            "skipped_centers": self.skipped_centers,
        }
        if self.information is not None:
            out.update(
                information_dimension=self.information.dimension,
                information_ci_low=self.information.ci_low,
                information_ci_high=self.information.ci_high,
                information_r_squared=self.information.r_squared,
            )
        out.update({f"gauge_{k}": v for k, v in self.gauge_counts.items()})
        if self.below_gauge_at_r_min is not None:
            out["below_gauge_at_r_min"] = self.below_gauge_at_r_min
        return out

    def to_frame(self) -> pd.DataFrame:
        rows = [{"estimator": "local", "value": self.local_dimension, "ci_low": self.local_ci[0], "ci_high": self.local_ci[1]}]
        if self.information is not None:
            i = self.information
            rows.append({"estimator": "information", "value": i.dimension, "ci_low": i.ci_low, "ci_high": i.ci_high})
        return pd.DataFrame(rows)

    def write_text(self, path: str | Path) -> None:
        """key: value blocks."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = ["[dimension]"] + [f"{k}: {v!r}" if isinstance(v, float) else f"{k}: {v}" for k, v in self.summary().items()]
        lines += ["", "[radii]"] + [f"{r!r}" for r in self.radii]
        path.write_text("\n".join(lines) + "\n")


def local_dimension(
    mu: BoundaryMeasure,
    centers: np.ndarray | None = None,
    radii: Sequence[float] | None = None,
    confidence: float = 0.95,
) -> DimensionReport:
    """Per-center slope of log mu(B(z, r)) against log r, aggregated with mass weights."""
    r = np.sort(np.asarray(default_radii(mu) if radii is None else radii, dtype=float))
    if len(r) < MIN_RADII:
        raise InputError(f"local dimension needs at least {MIN_RADII} radii, got {len(r)}")
    lo, hi = 10.0 * float(np.median(mu.lengths)), measure_diameter(mu) / 10.0
    if r[0] < lo or r[-1] > hi:
        logger.warning("radii outside the reliable range", r_min=float(r[0]), r_max=float(r[-1]), low=lo, high=hi)

    tree = cKDTree(mu.midpoints)
    if centers is None:
        idx = np.flatnonzero(mu.weights > 0)
        c, cw = mu.midpoints[idx], mu.weights[idx]
    else:
        c = np.atleast_2d(np.asarray(centers, dtype=float))
        _, nearest = tree.query(c)
        cw = mu.weights[nearest]
    masses = _ball_masses(tree, mu.weights, c, r)
    keep = masses[:, -1] > 0
    skipped = int((~keep).sum())
    if skipped:
        logger.info("centers with empty largest ball skipped", skipped=skipped)
    c, cw, masses = c[keep], cw[keep], masses[keep]
    with np.errstate(divide="ignore"):
        logm = np.log(masses)
    slopes, r2 = _row_slopes(np.log(r), logm, masses > 0)
    ok = np.isfinite(slopes)
    table = pd.DataFrame({"x": c[:, 0], "y": c[:, 1], "weight": cw, "slope": slopes, "r_squared": r2})

    if not ok.any():
        raise InputError("no center produced a slope")
    wts = cw[ok] if cw[ok].sum() > 0 else np.ones(ok.sum())
    wts = wts / wts.sum()
    mean = float(wts @ slopes[ok])
    n_eff = 1.0 / float(wts @ wts)
    var = float(wts @ (slopes[ok] - mean) ** 2)
    half = float(student_t.ppf(0.5 + confidence / 2, max(n_eff - 1, 1)) * np.sqrt(var / n_eff))
    logger.info("local dimension", value=mean, r_min=float(r[0]), r_max=float(r[-1]), centers=int(ok.sum()))
    return DimensionReport(
        centers=table,
        radii=r,
        local_dimension=mean,
        local_ci=(mean - half, mean + half),
        skipped_centers=skipped,
    )


def information_dimension(
    mu: BoundaryMeasure,
    sizes: Sequence[float] | None = None,
    n_offsets: int = 8,
    seed: int = 0,
) -> ScalingFit:
    """Slope of the box entropy -sum mu_i log mu_i against log(1/size), averaged over grid offsets."""
    if sizes is None:
        sizes = default_radii(mu)
    s = np.sort(np.asarray(sizes, dtype=float))[::-1]
    if len(s) < 3:
        raise InputError("information dimension needs at least three box sizes")
    p = mu.weights / mu.total_mass
    keep = p > 0
    pts, p = mu.midpoints[keep], p[keep]
    offs = grid_offsets(n_offsets, seed)
    entropy = np.empty(len(s))
    for k, size in enumerate(s):
        vals = []
        for o in offs:
            q = box_masses(pts, size, o, p)
            q = q[q > 0]
            vals.append(-float(np.sum(q * np.log(q))))
        entropy[k] = float(np.mean(vals))
    fit = fit_scaling(s, entropy)
    logger.info("information dimension", value=fit.dimension, r_squared=fit.r_squared, sizes=len(s))
    return fit


@dataclass(frozen=True)
class GaugeComparison:
    table: pd.DataFrame  # x, y, weight, slope, trend
    ratios: np.ndarray  # (centers, radii) of mu(B(z, r)) / lambda(r / L)
    radii: np.ndarray
    length_scale: float
    fraction_increasing: float
    fraction_decreasing: float
    fraction_flat: float
    fraction_below_at_r_min: float  # mass with mu(B(z, r_min)) <= lambda(r_min / L)

    def counts(self) -> dict[str, float]:
        return {
            "increasing": self.fraction_increasing,
            "decreasing": self.fraction_decreasing,
            "flat": self.fraction_flat,
        }


def gauge_comparison(
    mu: BoundaryMeasure,
    gauge: GaugeFunction,
    radii: Sequence[float] | None = None,
    length_scale: float | None = None,
    tolerance: float = TREND_TOLERANCE,
) -> GaugeComparison:
    """mu(B(z, r)) / lambda(r/L) at every arc midpoint; trend of log ratio as r decreases.

    "increasing" means the ratio grows as r shrinks (the limsup = infinity side); the
    summary fractions are mass weighted. Finite-scale proxy only.
    """
    L = measure_diameter(mu) if length_scale is None else float(length_scale)
    r = np.sort(np.asarray(default_radii(mu) if radii is None else radii, dtype=float))
    admissible = r / L < gauge.upper_limit
    if not admissible.all():
        logger.info("radii beyond the gauge domain skipped", skipped=int((~admissible).sum()), length_scale=L)
    r = r[admissible]
    if len(r) < 2:
        raise InputError("fewer than two radii inside the gauge domain")
    lam = np.asarray(gauge_value(gauge, r / L))
    idx = np.flatnonzero(mu.weights > 0)
    c, cw = mu.midpoints[idx], mu.weights[idx]
    masses = _ball_masses(cKDTree(mu.midpoints), mu.weights, c, r)
    ratios = masses / lam[None, :]
    with np.errstate(divide="ignore"):
        logratio = np.log(ratios)
    slopes, _ = _row_slopes(np.log(r), logratio, ratios > 0)
    trend = np.where(slopes < -tolerance, "increasing", np.where(slopes > tolerance, "decreasing", "flat"))
    trend = np.where(np.isfinite(slopes), trend, "undetermined")
    w = cw / cw.sum()
    frac = {k: float(w[trend == k].sum()) for k in ("increasing", "decreasing", "flat")}
    table = pd.DataFrame({"x": c[:, 0], "y": c[:, 1], "weight": cw, "slope": slopes, "trend": trend})
    return GaugeComparison(
        table=table,
        ratios=ratios,
        radii=r,
        length_scale=L,
        fraction_increasing=frac["increasing"],
        fraction_decreasing=frac["decreasing"],
        fraction_flat=frac["flat"],
        fraction_below_at_r_min=float(w[ratios[:, 0] <= 1.0].sum()),
    )


def dimension_report(
    mu: BoundaryMeasure,
    gauge: GaugeFunction | None = None,
    centers: np.ndarray | None = None,
    radii: Sequence[float] | None = None,
    n_offsets: int = 8,
    seed: int = 0,
) -> DimensionReport:
    """local_dimension plus the information dimension.

    Given a gauge, also the trend fractions and the mass fraction lying below the gauge at
    the finest radius.
    """
    report = local_dimension(mu, centers, radii)
    report.information = information_dimension(mu, report.radii, n_offsets=n_offsets, seed=seed)
    if gauge is not None:
        cmp = gauge_comparison(mu, gauge, report.radii)
        report.gauge_counts = cmp.counts()
        report.below_gauge_at_r_min = cmp.fraction_below_at_r_min
    return report


P2_WINDOW = (0.9, 1.1)
ORDERED, VIOLATED, INCONCLUSIVE = "ordered", "violated", "inconclusive"


@dataclass(frozen=True)
class DimensionTrend:
    table: pd.DataFrame  # p, value, ci_low, ci_high, sorted by p
    pairs: pd.DataFrame  # p_low, p_high, verdict for neighbouring exponents
    status: str
    p2_value: float | None

    @property
    def p2_in_window(self) -> bool | None:
        if self.p2_value is None:
            return None
        return bool(P2_WINDOW[0] <= self.p2_value <= P2_WINDOW[1])

    @property
    def passed(self) -> bool:
        """Ordered with p = 2 in its window; overlapping intervals fall back on the window alone."""
        return self.status != VIOLATED and self.p2_in_window is not False

    def summary(self) -> dict[str, object]:
        return {"status": self.status, "p2_value": self.p2_value, "p2_in_window": self.p2_in_window, "passed": self.passed}


def _estimate(est: DimensionReport | ScalingFit) -> tuple[float, float, float]:
    if isinstance(est, DimensionReport):
        if est.information is None:
            raise InputError("dimension report carries no information dimension")
        est = est.information
    return est.dimension, est.ci_low, est.ci_high


def dimension_trend(estimates: Mapping[float, DimensionReport | ScalingFit]) -> DimensionTrend:
    """Check that the information dimension does not increase with p.

    Neighbouring exponents p < q are ordered when ci_low(p) > ci_high(q), violated when
    ci_high(p) < ci_low(q) and inconclusive when the intervals overlap.
    """
    if len(estimates) < 2:
        raise InputError(f"a trend needs estimates for at least two exponents, got {len(estimates)}")
    rows = [{"p": float(p), **dict(zip(("value", "ci_low", "ci_high"), _estimate(e)))} for p, e in estimates.items()]
    table = pd.DataFrame(rows).sort_values("p", ignore_index=True)
    verdicts = []
    for lo, hi in zip(table.itertuples(), table.iloc[1:].itertuples()):
        if lo.ci_low > hi.ci_high:
            v = ORDERED
        elif lo.ci_high < hi.ci_low:
            v = VIOLATED
        else:
            v = INCONCLUSIVE
        verdicts.append({"p_low": lo.p, "p_high": hi.p, "verdict": v})
    pairs = pd.DataFrame(verdicts)
    if (pairs["verdict"] == VIOLATED).any():
        status = VIOLATED
    elif (pairs["verdict"] == ORDERED).all():
        status = ORDERED
    else:
        status = INCONCLUSIVE
    at2 = table.loc[np.isclose(table["p"], 2.0), "value"]
    trend = DimensionTrend(table=table, pairs=pairs, status=status, p2_value=float(at2.iloc[0]) if len(at2) else None)
    logger.info("dimension trend in p", **trend.summary())
    return trend
