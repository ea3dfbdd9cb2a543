"""Closed-form radial capacitary solutions on the ring 1 < |z| < R for f = |eta|^p."""

from __future__ import annotations

import numpy as np

from fhm_lab.errors import InputError


def _exponent(p: float) -> float:
    if p <= 1:
        raise InputError(f"p must exceed 1, got {p}")
    return (p - 2.0) / (p - 1.0)


def radial_capacitary(r: np.ndarray | float, R: float, p: float = 2.0) -> np.ndarray:
    """u(r) = (R^k - r^k)/(R^k - 1), k = (p-2)/(p-1); log(R/r)/log R at p = 2."""
    r = np.asarray(r, dtype=float)
    if p == 2.0:
        return np.log(R / r) / np.log(R)
    k = _exponent(p)
    return (R**k - r**k) / (R**k - 1.0)


def radial_gradient_norm(r: np.ndarray | float, R: float, p: float = 2.0) -> np.ndarray:
    r = np.asarray(r, dtype=float)
    if p == 2.0:
        return 1.0 / (r * np.log(R))
    k = _exponent(p)
    return np.abs(k * r ** (k - 1.0) / (R**k - 1.0))


def radial_flux(R: float, p: float = 2.0) -> float:
    """Capacity of the ring, i.e. the energy of the radial solution: 2*pi*|k/(R^k - 1)|^(p-1)."""
    if p == 2.0:
        return float(2.0 * np.pi / np.log(R))
    k = _exponent(p)
    return float(2.0 * np.pi * abs(k / (R**k - 1.0)) ** (p - 1.0))


def radial_level_radius(t: float, R: float, p: float = 2.0) -> float:
    """Radius of the level circle {u = t}."""
    if p == 2.0:
        return float(R ** (1.0 - t))
    k = _exponent(p)
    return float((R**k - t * (R**k - 1.0)) ** (1.0 / k))
