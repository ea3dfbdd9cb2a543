"""Flux of f(grad u)/|grad u| through level curves."""

from __future__ import annotations

import numpy as np

from fhm_lab.geometry.contours import LevelCurve, extract_level_curve
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.solver.fields import ScalarField
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

DEGENERATE_GRADIENT = 1e-14


def curve_flux(curve: LevelCurve, F: Integrand) -> tuple[float, float]:
    """Midpoint rule on each segment; returns (flux, dropped length)."""
    f = F.unregularized()
    total, dropped = 0.0, 0.0
    for comp in curve.components:
        g = comp.gradients
        n = np.hypot(g[:, 0], g[:, 1])
        L = comp.segment_lengths
        ok = n >= DEGENERATE_GRADIENT
        dropped += float(L[~ok].sum())
        if ok.any():
            total += float(np.sum(f.value(g[ok]) / n[ok] * L[ok]))
    return total, dropped


def level_flux(u: ScalarField, F: Integrand, t: float) -> float:
    """I_0(t): integral of f(grad u)/|grad u| over {u = t}."""
    curve = extract_level_curve(u, t)
    flux, dropped = curve_flux(curve, F)
    if dropped > 0:
        logger.info("degenerate level segments dropped", level=curve.level, dropped_length=dropped)
    return flux
