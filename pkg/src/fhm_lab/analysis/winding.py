"""Argument principle for u_z = u_x - i u_y along level curves."""

from __future__ import annotations

import numpy as np

from fhm_lab.errors import InputError, WindingError
from fhm_lab.geometry.contours import LevelComponent, LevelCurve, extract_level_curve
from fhm_lab.solver.fields import ScalarField

VANISHING_GRADIENT = 1e-12


def component_winding(comp: LevelComponent, index: int = 0) -> int:
    if not comp.closed:
        raise InputError(f"component {index} is not closed")
    seg = comp.gradients
    vert = comp.vertex_gradients
    for label, g in (("vertex", vert), ("segment", seg)):
        n = np.hypot(g[:, 0], g[:, 1])
        bad = np.flatnonzero(n <= VANISHING_GRADIENT)
        if bad.size:
            k = int(bad[0])
            raise WindingError(
                f"|grad u| = {n[k]:.3g} at {label} {k} of component {index}, point {tuple(comp.points[k])}",
                vertex=(index, k, tuple(comp.points[k])),
            )
    arg = np.angle(seg[:, 0] - 1j * seg[:, 1])
    d = np.diff(np.append(arg, arg[0]))
    d = (d + np.pi) % (2 * np.pi) - np.pi
    return int(np.rint(d.sum() / (2 * np.pi)))


def winding_number(u: ScalarField, curve: LevelCurve) -> int:
    """Total change of arg(u_z) / 2pi over the counterclockwise components."""
    if not curve.components:
        raise InputError(f"level curve at t={curve.level} is empty")
    return sum(component_winding(c, i) for i, c in enumerate(curve.components))


def zero_count_between(u: ScalarField, t0: float, t1: float) -> int:
    """Zeros of u_z in {t0 < u < t1}: winding(t0) - winding(t1)."""
    if not t0 < t1:
        raise InputError(f"need t0 < t1, got {t0}, {t1}")
    return winding_number(u, extract_level_curve(u, t0)) - winding_number(u, extract_level_curve(u, t1))
