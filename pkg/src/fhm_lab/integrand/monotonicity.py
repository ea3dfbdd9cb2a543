"""Monotonicity and structure constants of grad f."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.stats import qmc

from fhm_lab.errors import InputError
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.utils.logging import get_logger

logger = get_logger(__name__)

NEAR_OFFSET = 1e-4


class DeltaEstimate(NamedTuple):
    delta: float
    monotone: bool
    worst_pair: tuple[tuple[float, float], tuple[float, float]]
    n_pairs: int


@dataclass(frozen=True)
class StructureConstants:
    M: float
    M_prime: float
    c_star_mono: float
    K: float | None = None
    c_f: float = 1.0
    c_grad: float = 1.0
    c_hess: float = 1.0


def _log_uniform(u: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return np.exp(np.log(lo) + u * (np.log(hi) - np.log(lo)))


def _sample_pairs(
    n: int, radius_range: tuple[float, float], seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Sobol pairs with both radii log-uniform in radius_range, plus near pairs."""
    lo, hi = radius_range
    if not (0 < lo <= hi):
        raise InputError(f"radius_range must satisfy 0 < a <= b, got {radius_range}")
    n_near = max(n // 10, 100)
    n_far = n - n_near
    sob = qmc.Sobol(d=5, scramble=True, seed=seed)
    u = sob.random_base2(m=int(np.ceil(np.log2(max(n, 2)))))[:n]
    r1 = _log_uniform(u[:, 0], lo, hi)
    a1 = 2 * np.pi * u[:, 1]
    eta = np.column_stack([r1 * np.cos(a1), r1 * np.sin(a1)])
    r2 = _log_uniform(u[:n_far, 2], lo, hi)
    a2 = 2 * np.pi * u[:n_far, 3]
    far = np.column_stack([r2 * np.cos(a2), r2 * np.sin(a2)])
    g = 2 * np.pi * u[n_far:, 4]
    near = eta[n_far:] + NEAR_OFFSET * r1[n_far:, None] * np.column_stack([np.cos(g), np.sin(g)])
    return eta, np.vstack([far, near])


def _pair_terms(F: Integrand, eta: np.ndarray, eta2: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    # the ratios are jointly scale invariant, so work with |eta| = 1
    scale = np.hypot(eta[:, 0], eta[:, 1])[:, None]
    e1, e2 = eta / scale, eta2 / scale
    dG = F.gradient(e1) - F.gradient(e2)
    dE = e1 - e2
    return dG, dE, scale[:, 0]


def verify_delta_monotone(
    F: Integrand,
    n_samples: int = 10_000,
    radius_range: tuple[float, float] = (0.1, 10.0),
    seed: int = 0,
) -> DeltaEstimate:
    """Minimum over sampled pairs of <dG, dE>/(|dG||dE|).

    A nonpositive minimum is returned with ``monotone=False``.
    """
    if n_samples < 1000:
        raise InputError(f"n_samples must be at least 1000, got {n_samples}")
    eta, eta2 = _sample_pairs(n_samples, radius_range, seed)
    dG, dE, _ = _pair_terms(F, eta, eta2)
    nG = np.hypot(dG[:, 0], dG[:, 1])
    nE = np.hypot(dE[:, 0], dE[:, 1])
    ok = (nG > 0) & (nE > 0)
    ratio = np.full(len(eta), np.inf)
    ratio[ok] = np.sum(dG[ok] * dE[ok], axis=1) / (nG[ok] * nE[ok])
    k = int(np.argmin(ratio))
    delta = float(min(ratio[k], 1.0))
    est = DeltaEstimate(
        delta=delta,
        monotone=delta > 0,
        worst_pair=(tuple(eta[k]), tuple(eta2[k])),
        n_pairs=int(ok.sum()),
    )
    if not est.monotone:
        logger.warning("grad f is not monotone on sampled pairs", delta_hat=delta, worst_pair=est.worst_pair)
    return est


def quasiconformal_K(delta: float) -> float:
    """K = (1 + sqrt(1 - delta^2)) / (1 - sqrt(1 - delta^2))."""
    if not (0.0 < delta <= 1.0):
        raise InputError(f"delta must lie in (0, 1], got {delta}")
    if delta == 1.0:
        return 1.0
    s = np.sqrt(1.0 - delta * delta)
    return float((1.0 + s) / (1.0 - s))


def _band(values: np.ndarray) -> float:
    """Smallest c >= 1 with values in [1/c, c]."""
    return float(max(1.0, values.max(), 1.0 / values.min()))


def comparability_constants(F: Integrand, n_theta: int = 4096) -> tuple[float, float, float]:
    """Bands of f/|eta|^p, |grad f|/|eta|^(p-1) and ||D^2 f||/|eta|^(p-2).

    By homogeneity the unit circle suffices. The Hessian band uses the
    extreme eigenvalues.
    """
    th = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    unit = np.column_stack([np.cos(th), np.sin(th)])
    f = F.unregularized().value(unit)
    g = np.linalg.norm(F.unregularized().gradient(unit), axis=1)
    ev = np.linalg.eigvalsh(F.unregularized().hessian(unit))
    return _band(f), _band(g), float(max(1.0, ev.max(), 1.0 / ev.min())) if ev.min() > 0 else float("inf")


def sandwich_constant(
    F: Integrand,
    n_samples: int = 20_000,
    radius_range: tuple[float, float] = (0.1, 10.0),
    seed: int = 0,
) -> float:
    """Tightest sampled c in (1/c)(|eta|+|eta'|)^(p-2)|eta-eta'|^2 <= <dG, dE> <= c(...)."""
    eta, eta2 = _sample_pairs(n_samples, radius_range, seed)
    dG, dE, scale = _pair_terms(F, eta, eta2)
    r1 = np.hypot(*(eta / scale[:, None]).T)
    r2 = np.hypot(*(eta2 / scale[:, None]).T)
    nE2 = np.sum(dE * dE, axis=1)
    ok = nE2 > 0
    ratio = np.sum(dG[ok] * dE[ok], axis=1) / ((r1[ok] + r2[ok]) ** (F.p - 2) * nE2[ok])
    if ratio.min() <= 0:
        return float("inf")
    return _band(ratio)


def structure_constants(F: Integrand, n_theta: int = 4096, seed: int = 0) -> StructureConstants:
    lo, hi = F.profile.bounds(n_theta)
    M = max(hi, 1.0 / lo, 1.0)
    th = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
    unit = np.column_stack([np.cos(th), np.sin(th)])
    base = F.unregularized()
    f = base.value(unit)
    rg = np.linalg.norm(base.gradient(unit), axis=1)
    M_prime = float(max(1.0, f.max(), rg.max(), 1.0 / f.min(), 1.0 / rg.min()))
    c_f, c_grad, c_hess = comparability_constants(F, n_theta)
    K = quasiconformal_K(F.delta_certified) if F.delta_certified is not None else None
    if K is None:
        logger.info("delta_certified not set; K omitted")
    return StructureConstants(
        M=float(M),
        M_prime=M_prime,
        c_star_mono=sandwich_constant(base, seed=seed),
        K=K,
        c_f=c_f,
        c_grad=c_grad,
        c_hess=c_hess,
    )


def certify(F: Integrand, n_samples: int = 10_000, seed: int = 0) -> Integrand:
    """Return F with delta_certified set from verify_delta_monotone."""
    est = verify_delta_monotone(F.unregularized(), n_samples=n_samples, seed=seed)
    if not est.monotone:
        raise InputError(f"integrand is not delta-monotone (delta_hat = {est.delta:.3g})")
    return F.with_delta(est.delta)
