"""Homogeneous degree-p integrands f(eta) = |eta|^p phi(arg eta) and their derivatives."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path
from typing import Callable

import numpy as np

from fhm_lab.errors import InputError, SingularityError
from fhm_lab.integrand.profiles import AngularProfile, load_profile_samples
from fhm_lab.integrand.quadrature import DEFAULT_ORDER, mollifier_rule

# rows of eta per quadrature block, keeps (rows, nodes, 2) arrays near 2e6 entries
_CHUNK_POINTS = 2_000_000


def _as_points(eta: np.ndarray | tuple[float, float]) -> tuple[np.ndarray, tuple[int, ...]]:
    arr = np.asarray(eta, dtype=float)
    if arr.shape[-1] != 2:
        raise InputError(f"eta must have a trailing dimension of 2, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError("eta must be finite")
    return arr.reshape(-1, 2), arr.shape[:-1]


@dataclass(frozen=True)
class Integrand:
    """f homogeneous of degree p, optionally replaced by f_eps = f * theta_eps.

    ``near_field`` restricts the mollifier quadrature to |eta| < near_field*eps;
    elsewhere the unregularized f is used.
    """

    p: float
    profile: AngularProfile
    epsilon: float = 0.0
    delta_certified: float | None = None
    kind: str = "custom"
    near_field: float | None = None
    quadrature_order: int = DEFAULT_ORDER
    params: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        if not (self.p > 1.0 and np.isfinite(self.p)):
            raise InputError(f"p must lie in (1, inf), got {self.p}")
        if self.epsilon < 0:
            raise InputError(f"epsilon must be nonnegative, got {self.epsilon}")
        if self.delta_certified is not None and not (0.0 < self.delta_certified <= 1.0):
            raise InputError(f"delta_certified must lie in (0, 1], got {self.delta_certified}")

    @property
    def is_smooth_at_origin(self) -> bool:
        # quadratic forms are polynomials; everything else has a cone point at 0
        return self.p == 2.0 and self.kind in ("power", "quadratic-form")

    def with_delta(self, delta: float) -> "Integrand":
        return replace(self, delta_certified=float(delta))

    def unregularized(self) -> "Integrand":
        return replace(self, epsilon=0.0, near_field=None)

    # base (epsilon = 0) evaluations

    def _polar(self, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        r = np.hypot(pts[:, 0], pts[:, 1])
        zero = r == 0.0
        rs = np.where(zero, 1.0, r)
        return rs, pts[:, 0] / rs, pts[:, 1] / rs, zero

    def _base_value(self, pts: np.ndarray, strict: bool = True) -> np.ndarray:
        r, c, s, zero = self._polar(pts)
        out = r**self.p * self.profile(np.arctan2(s, c))
        out[zero] = 0.0
        return out

    def _frame(self, c: np.ndarray, s: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        phi, d1, d2 = self.profile.derivatives(np.arctan2(s, c))
        a, b = self.p * phi, d1
        da, db = self.p * d1, d2
        V = np.stack([a * c - b * s, a * s + b * c], axis=-1)
        dV = np.stack([da * c - a * s - db * s - b * c, da * s + a * c + db * c - b * s], axis=-1)
        return V, dV, np.stack([c, s], axis=-1), np.stack([-s, c], axis=-1)

    def _base_gradient(self, pts: np.ndarray, strict: bool = True) -> np.ndarray:
        r, c, s, zero = self._polar(pts)
        if strict and zero.any() and self.p < 2.0:
            raise SingularityError(f"grad f is singular at eta = 0 for p = {self.p} < 2 without mollification")
        V, _, _, _ = self._frame(c, s)
        out = (r ** (self.p - 1))[:, None] * V
        out[zero] = 0.0
        return out

    def _base_hessian(self, pts: np.ndarray, strict: bool = True) -> np.ndarray:
        r, c, s, zero = self._polar(pts)
        if strict and zero.any() and self.p < 2.0:
            raise SingularityError(f"D^2 f is singular at eta = 0 for p = {self.p} < 2 without mollification")
        V, dV, er, et = self._frame(c, s)
        H = (self.p - 1) * V[:, :, None] * er[:, None, :] + dV[:, :, None] * et[:, None, :]
        H = 0.5 * (H + np.swapaxes(H, 1, 2))
        H *= (r ** (self.p - 2))[:, None, None]
        if zero.any():
            if self.p > 2.0:
                H[zero] = 0.0
            elif self.p == 2.0:
                H[zero] = self._angular_mean_hessian()
        return H

    def _angular_mean_hessian(self, n: int = 64) -> np.ndarray:
        th = 2 * np.pi * np.arange(n) / n
        unit = np.column_stack([np.cos(th), np.sin(th)])
        return self._base_hessian(unit).mean(axis=0)

    # mollified evaluations

    def _quadrature_mask(self, pts: np.ndarray) -> np.ndarray:
        if self.epsilon == 0.0:
            return np.zeros(len(pts), dtype=bool)
        if self.near_field is None:
            return np.ones(len(pts), dtype=bool)
        return np.hypot(pts[:, 0], pts[:, 1]) < self.near_field * self.epsilon

    def _convolve(self, pts: np.ndarray, base: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        rule = mollifier_rule(self.quadrature_order)
        k = len(rule.weights)
        step = max(1, _CHUNK_POINTS // k)
        out: list[np.ndarray] = []
        for start in range(0, len(pts), step):
            block = pts[start : start + step]
            shifted = (block[:, None, :] - self.epsilon * rule.nodes[None, :, :]).reshape(-1, 2)
            vals = base(shifted)
            vals = vals.reshape((len(block), k) + vals.shape[1:])
            out.append(np.tensordot(rule.weights, vals, axes=([0], [1])))
        return np.concatenate(out, axis=0)

    def _evaluate(self, pts: np.ndarray, base: Callable[..., np.ndarray]) -> np.ndarray:
        mask = self._quadrature_mask(pts)
        if not mask.any():
            return base(pts)
        out = np.empty((len(pts),) + base(np.ones((1, 2))).shape[1:])
        if (~mask).any():
            out[~mask] = base(pts[~mask])
        out[mask] = self._convolve(pts[mask], partial(base, strict=False))
        return out

    def value(self, eta: np.ndarray) -> np.ndarray:
        pts, shape = _as_points(eta)
        return self._evaluate(pts, self._base_value).reshape(shape)

    def gradient(self, eta: np.ndarray) -> np.ndarray:
        pts, shape = _as_points(eta)
        return self._evaluate(pts, self._base_gradient).reshape(shape + (2,))

    def hessian(self, eta: np.ndarray) -> np.ndarray:
        pts, shape = _as_points(eta)
        return self._evaluate(pts, self._base_hessian).reshape(shape + (2, 2))


# functional interface


def eval_f(F: Integrand, eta: np.ndarray | tuple[float, float]) -> np.ndarray | float:
    out = F.value(eta)
    return float(out) if np.ndim(out) == 0 else out


def grad_f(F: Integrand, eta: np.ndarray | tuple[float, float]) -> np.ndarray:
    return F.gradient(eta)


def hessian_f(F: Integrand, eta: np.ndarray | tuple[float, float]) -> np.ndarray:
    return F.hessian(eta)


# factories


def power_integrand(p: float, delta_certified: float | None = None) -> Integrand:
    """f(eta) = |eta|^p."""
    return Integrand(
        p=float(p),
        profile=AngularProfile.constant(1.0),
        delta_certified=delta_certified,
        kind="power",
    )


def quadratic_form_integrand(
    matrix: np.ndarray | list[list[float]], p: float = 2.0, delta_certified: float | None = None
) -> Integrand:
    """f(eta) = (eta^T A eta)^(p/2); the plain quadratic form when p = 2."""
    A = np.asarray(matrix, dtype=float)
    return Integrand(
        p=float(p),
        profile=AngularProfile.quadratic_form(A, p),
        delta_certified=delta_certified,
        kind="quadratic-form",
        params={"matrix": A.tolist()},
    )


def sampled_integrand(
    p: float,
    samples: np.ndarray | str | Path,
    delta_certified: float | None = None,
) -> Integrand:
    if isinstance(samples, (str, Path)):
        profile = load_profile_samples(samples)
    else:
        profile = AngularProfile.from_samples(np.asarray(samples, dtype=float))
    return Integrand(
        p=float(p),
        profile=profile,
        delta_certified=delta_certified,
        kind="sampled-profile",
    )
