"""Gauge functions lambda(r) = r exp(+-A D(r)) and their iterated-log companion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fhm_lab.errors import InputError
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

LOGLOG_LIMIT = float(np.exp(-2.0))
ITERATED_LIMIT = float(np.exp(-np.e))
ASYMPTOTIC_SCALE = 1e-6
VARIANTS = ("loglog", "iterated")


def frak_d(t: np.ndarray | float, c_star: float) -> np.ndarray:
    """D(t) = sqrt(4 c_* log(1/t) loglog(1/t))."""
    t = np.asarray(t, dtype=float)
    L = np.log(1.0 / t)
    return np.sqrt(4.0 * c_star * L * np.log(L))


@dataclass(frozen=True)
class GaugeFunction:
    A: float
    sign: int = 1  # +1 for 1 < p <= 2, -1 for 2 <= p < inf
    c_star: float = 1.0
    variant: str = "loglog"

    def __post_init__(self) -> None:
        if self.sign not in (1, -1):
            raise InputError(f"sign must be +1 or -1, got {self.sign}")
        if self.c_star < 1.0:
            raise InputError(f"c_star must be at least 1, got {self.c_star}")
        if self.A < 0:
            raise InputError(f"A is a magnitude; pass the regime through sign, got A={self.A}")
        if self.variant not in VARIANTS:
            raise InputError(f"variant must be one of {VARIANTS}, got {self.variant!r}")

    @classmethod
    def for_regime(cls, p: float, A: float, c_star: float = 1.0, sign: int | None = None, **kwargs) -> "GaugeFunction":
        if sign is None:
            sign = 1 if p <= 2.0 else -1
        elif (p < 2.0 and sign < 0) or (p > 2.0 and sign > 0):
            raise InputError(f"sign {sign:+d} does not match p = {p}")
        return cls(A=float(A), sign=sign, c_star=max(float(c_star), 1.0), **kwargs)

    @property
    def upper_limit(self) -> float:
        return LOGLOG_LIMIT if self.variant == "loglog" else ITERATED_LIMIT

    def exponent(self, r: np.ndarray) -> np.ndarray:
        if self.variant == "loglog":
            return frak_d(r, self.c_star)
        L = np.log(1.0 / r)
        return np.sqrt(L * np.log(np.log(L)))

    def __call__(self, r: np.ndarray | float) -> np.ndarray | float:
        return gauge_value(self, r)


def gauge_value(gauge: GaugeFunction, r: np.ndarray | float) -> np.ndarray | float:
    """r * exp(sign * A * D(r)) on 0 < r < exp(-2) (exp(-e) for the iterated variant)."""
    arr = np.asarray(r, dtype=float)
    if np.any(~(arr > 0)) or np.any(arr >= gauge.upper_limit):
        raise InputError(f"gauge is defined for 0 < r < {gauge.upper_limit:.6g}")
    if np.any(arr >= ASYMPTOTIC_SCALE):
        logger.debug("gauge evaluated above 1e-6; finite-scale proxy only", r_max=float(arr.max()))
    out = arr * np.exp(gauge.sign * gauge.A * gauge.exponent(arr))
    return float(out) if out.ndim == 0 else out
