"""Polar Gauss rule for the standard mollifier on the unit disk."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss

from fhm_lab.errors import NumericalError

DEFAULT_ORDER = 16


def bump(rho: np.ndarray) -> np.ndarray:
    """Unnormalized mollifier exp(1/(rho^2 - 1)) on [0, 1), zero outside."""
    rho = np.asarray(rho, dtype=float)
    out = np.zeros_like(rho)
    inside = rho < 1.0
    out[inside] = np.exp(1.0 / (rho[inside] ** 2 - 1.0))
    return out


@dataclass(frozen=True)
class MollifierRule:
    nodes: np.ndarray  # (k, 2) points in the unit disk
    weights: np.ndarray  # (k,) theta(y_k) * dA, sums to 1
    normalization: float  # the constant c making theta integrate to one
    order: int

    @property
    def second_moment(self) -> float:
        """c2 = integral of theta(w) |w|^2 over the unit disk."""
        return float(np.sum(self.weights * np.sum(self.nodes**2, axis=1)))


def _raw_rule(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(order)
    rho = 0.5 * (x + 1.0)
    wr = 0.5 * w
    n_ang = 2 * order
    ang = 2 * np.pi * (np.arange(n_ang) + 0.5) / n_ang
    R, A = np.meshgrid(rho, ang, indexing="ij")
    W = (bump(rho) * rho * wr)[:, None] * np.full(n_ang, 2 * np.pi / n_ang)[None, :]
    nodes = np.column_stack([(R * np.cos(A)).ravel(), (R * np.sin(A)).ravel()])
    return nodes, W.ravel()


@lru_cache(maxsize=8)
def mollifier_rule(order: int = DEFAULT_ORDER) -> MollifierRule:
    nodes, raw = _raw_rule(order)
    mass = raw.sum()
    # compare against a rule of twice the order; smooth bump => tiny gap
    _, raw_fine = _raw_rule(2 * order)
    resid = abs(mass - raw_fine.sum()) / raw_fine.sum()
    if resid > 1e-6:
        raise NumericalError(
            f"mollifier quadrature of order {order} not converged", residual=float(resid)
        )
    return MollifierRule(nodes=nodes, weights=raw / mass, normalization=float(1.0 / mass), order=order)
