"""Moments I_m(t) of w along level curves, the fitted constant c_* and the exceptional flux."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
import pandas as pd
from scipy.special import gammaln, logsumexp
from scipy.stats import linregress

from fhm_lab.analysis.gauge import LOGLOG_LIMIT, GaugeFunction, frak_d
from fhm_lab.analysis.log_density import LogDensityField
from fhm_lab.errors import InputError
from fhm_lab.geometry.contours import LevelCurve, extract_level_curve
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.solver.fields import ScalarField
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

DEGENERATE_GRADIENT = 1e-14
MOMENT_T_MAX = 0.5


class _Segments(NamedTuple):
    log_weight: np.ndarray  # log of f(grad u)/|grad u| * length
    triangle: np.ndarray


def _segments(curve: LevelCurve, F: Integrand, ld: LogDensityField) -> _Segments:
    f = F.unregularized()
    logs, tris = [], []
    dropped = 0.0
    for comp in curve.components:
        g = comp.gradients
        n = np.hypot(g[:, 0], g[:, 1])
        L = comp.segment_lengths
        ok = (n >= DEGENERATE_GRADIENT) & (L > 0) & ~ld.excluded[comp.triangles]
        dropped += float(L[~ok].sum())
        if ok.any():
            logs.append(np.log(f.value(g[ok])) - np.log(n[ok]) + np.log(L[ok]))
            tris.append(comp.triangles[ok])
    if dropped > 0:
        logger.debug("moment segments dropped", level=curve.level, dropped_length=dropped)
    if not logs:
        return _Segments(np.empty(0), np.empty(0, dtype=np.int64))
    return _Segments(np.concatenate(logs), np.concatenate(tris))


def _check_level(t: float) -> None:
    if not (0.0 < t < 1.0):
        raise InputError(f"t must lie in (0, 1), got {t}")
    if t >= MOMENT_T_MAX:
        logger.warning("moment level outside (0, 1/2)", t=t)


def _log_moment(seg: _Segments, w: np.ndarray, m: int) -> float:
    if seg.log_weight.size == 0:
        return -np.inf
    if m == 0:
        return float(logsumexp(seg.log_weight))
    wt = w[seg.triangle]
    pos = wt > 0
    if not pos.any():
        return -np.inf
    return float(logsumexp(seg.log_weight[pos] + 2 * m * np.log(wt[pos])))


def log_moment_integral(
    u: ScalarField,
    F: Integrand,
    ld: LogDensityField,
    t: float,
    m: int,
    truncated: bool = False,
    curve: LevelCurve | None = None,
) -> float:
    """log I_m(t); -inf when the integral vanishes."""
    if m < 0:
        raise InputError(f"m must be nonnegative, got {m}")
    _check_level(t)
    curve = curve or extract_level_curve(u, t)
    return _log_moment(_segments(curve, F, ld), ld.g if truncated else ld.w, m)


def moment_integral(
    u: ScalarField,
    F: Integrand,
    ld: LogDensityField,
    t: float,
    m: int,
    truncated: bool = False,
) -> float:
    """I_m(t) = int_{u=t} f(grad u)/|grad u| w^(2m) dH^1 (g in place of w when truncated)."""
    return float(np.exp(log_moment_integral(u, F, ld, t, m, truncated)))


@dataclass(frozen=True)
class MomentTable:
    frame: pd.DataFrame  # columns t, m, log_I_m
    truncated: bool = False

    @property
    def t_grid(self) -> np.ndarray:
        return np.sort(self.frame["t"].unique())

    @property
    def m_max(self) -> int:
        return int(self.frame["m"].max())

    def log_value(self, t: float, m: int) -> float:
        row = self.frame[np.isclose(self.frame["t"], t) & (self.frame["m"] == m)]
        if row.empty:
            raise KeyError((t, m))
        return float(row["log_I_m"].iloc[0])

    def value(self, t: float, m: int) -> float:
        return float(np.exp(self.log_value(t, m)))

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[float, int, float]], truncated: bool = False) -> "MomentTable":
        """Rows of (t, m, I_m) in linear scale."""
        with np.errstate(divide="ignore"):
            data = [(float(t), int(m), float(np.log(v))) for t, m, v in rows]
        return cls(pd.DataFrame(data, columns=["t", "m", "log_I_m"]), truncated)


def moment_table(
    u: ScalarField,
    F: Integrand,
    ld: LogDensityField,
    t_grid: Sequence[float],
    m_max: int,
    truncated: bool = False,
) -> MomentTable:
    """I_m(t) over t_grid x 0..m_max, one level-curve extraction per t."""
    if m_max < 0:
        raise InputError(f"m_max must be nonnegative, got {m_max}")
    w = ld.g if truncated else ld.w
    rows = []
    for t in t_grid:
        _check_level(t)
        seg = _segments(extract_level_curve(u, t), F, ld)
        rows.extend((float(t), m, _log_moment(seg, w, m)) for m in range(m_max + 1))
    table = MomentTable(pd.DataFrame(rows, columns=["t", "m", "log_I_m"]), truncated)
    logger.info("moment table built", levels=len(t_grid), m_max=m_max, truncated=truncated)
    return table


class MomentFit(NamedTuple):
    c_star_hat: float
    max_violation: float
    slope: float  # of max_t bracket against m
    brackets: pd.DataFrame  # t, m, bracket


def moment_bound_fit(table: MomentTable) -> MomentFit:
    """c_* = exp(max over rows of [log I_m - log m! - m loglog(1/t)]/(m+1)); vanishing rows skipped."""
    df = table.frame
    finite = df[np.isfinite(df["log_I_m"])].copy()
    if finite.empty:
        raise InputError("moment table has no nonzero rows")
    t = finite["t"].to_numpy()
    m = finite["m"].to_numpy()
    loglog = np.log(np.log(1.0 / t))
    finite["bracket"] = (finite["log_I_m"].to_numpy() - gammaln(m + 1) - m * loglog) / (m + 1)
    log_c = float(finite["bracket"].max())
    bound = (m + 1) * log_c + gammaln(m + 1) + m * loglog
    violation = max(0.0, float(np.max(finite["log_I_m"].to_numpy() - bound)))
    per_m = finite.groupby("m")["bracket"].max()
    slope = float(linregress(per_m.index.to_numpy(float), per_m.to_numpy()).slope) if len(per_m) >= 2 else 0.0
    return MomentFit(
        c_star_hat=float(np.exp(log_c)),
        max_violation=violation,
        slope=slope,
        brackets=finite[["t", "m", "bracket"]].reset_index(drop=True),
    )


def exceptional_flux(
    u: ScalarField,
    F: Integrand,
    ld: LogDensityField,
    t: float,
    gauge: GaugeFunction,
) -> float:
    """Flux of f(grad u)/|grad u| over level segments where w >= D(t)."""
    if not (0.0 < t < LOGLOG_LIMIT):
        raise InputError(f"exceptional flux needs 0 < t < exp(-2), got {t}")
    seg = _segments(extract_level_curve(u, t), F, ld)
    if seg.log_weight.size == 0:
        return 0.0
    hit = ld.w[seg.triangle] >= frak_d(t, gauge.c_star)
    return float(np.exp(seg.log_weight[hit]).sum()) if hit.any() else 0.0
