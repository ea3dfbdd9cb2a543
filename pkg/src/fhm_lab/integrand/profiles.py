"""Angular profiles: the values of a homogeneous integrand on the unit circle."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline

from fhm_lab.errors import InputError

DEFAULT_N_THETA = 1024

ThetaFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class AngularProfile:
    """phi(theta) = f(cos theta, sin theta) with its first two derivatives.

    Either a closed-form triple of callables or a uniformly sampled table
    interpolated by a periodic cubic spline.
    """

    value_fn: ThetaFn
    d1_fn: ThetaFn
    d2_fn: ThetaFn
    representation: str = "closed-form"
    samples: np.ndarray | None = field(default=None, repr=False)

    def __call__(self, theta: np.ndarray | float) -> np.ndarray:
        return self.value_fn(np.asarray(theta, dtype=float))

    def derivatives(self, theta: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        th = np.asarray(theta, dtype=float)
        return self.value_fn(th), self.d1_fn(th), self.d2_fn(th)

    def bounds(self, n: int = 4096) -> tuple[float, float]:
        th = np.linspace(0.0, 2 * np.pi, n, endpoint=False)
        vals = self(th)
        return float(vals.min()), float(vals.max())

    @property
    def is_sampled(self) -> bool:
        return self.representation == "sampled"

    # constructors

    @classmethod
    def constant(cls, c: float = 1.0) -> "AngularProfile":
        if c <= 0:
            raise InputError(f"profile constant must be positive, got {c}")
        return cls(
            value_fn=lambda th: np.full_like(th, c, dtype=float),
            d1_fn=lambda th: np.zeros_like(th, dtype=float),
            d2_fn=lambda th: np.zeros_like(th, dtype=float),
        )

    @classmethod
    def from_callable(cls, value: ThetaFn, d1: ThetaFn, d2: ThetaFn) -> "AngularProfile":
        prof = cls(value_fn=value, d1_fn=d1, d2_fn=d2)
        lo, _ = prof.bounds()
        if not np.isfinite(lo) or lo <= 0:
            raise InputError("profile values must be strictly positive on the unit circle")
        return prof

    @classmethod
    def quadratic_form(cls, matrix: np.ndarray, p: float = 2.0) -> "AngularProfile":
        """Profile of (eta^T A eta)^(p/2) for a symmetric positive-definite A."""
        A = np.asarray(matrix, dtype=float)
        if A.shape != (2, 2) or not np.allclose(A, A.T):
            raise InputError("quadratic form needs a symmetric 2x2 matrix")
        if np.linalg.eigvalsh(A).min() <= 0:
            raise InputError("quadratic form matrix must be positive definite")
        a, b, d = A[0, 0], A[0, 1], A[1, 1]
        k = p / 2.0

        def q(th: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
            c2, s2 = np.cos(2 * th), np.sin(2 * th)
            q0 = 0.5 * (a + d) + 0.5 * (a - d) * c2 + b * s2
            q1 = (d - a) * s2 + 2 * b * c2
            q2 = 2 * (d - a) * c2 - 4 * b * s2
            return q0, q1, q2

        def value(th: np.ndarray) -> np.ndarray:
            return q(th)[0] ** k

        def d1(th: np.ndarray) -> np.ndarray:
            q0, q1, _ = q(th)
            return k * q0 ** (k - 1) * q1

        def d2(th: np.ndarray) -> np.ndarray:
            q0, q1, q2 = q(th)
            return k * ((k - 1) * q0 ** (k - 2) * q1**2 + q0 ** (k - 1) * q2)

        return cls(value_fn=value, d1_fn=d1, d2_fn=d2)

    @classmethod
    def from_samples(cls, values: np.ndarray) -> "AngularProfile":
        """Uniform samples at theta_k = 2*pi*k/n, k = 0..n-1."""
        vals = np.asarray(values, dtype=float).ravel()
        if vals.size < 8:
            raise InputError(f"sampled profile needs at least 8 values, got {vals.size}")
        if not np.all(np.isfinite(vals)) or vals.min() <= 0:
            raise InputError("sampled profile values must be finite and strictly positive")
        n = vals.size
        grid = np.linspace(0.0, 2 * np.pi, n + 1)
        spline = CubicSpline(grid, np.append(vals, vals[0]), bc_type="periodic")
        d1s, d2s = spline.derivative(1), spline.derivative(2)

        def wrap(fn: Callable[[np.ndarray], np.ndarray]) -> ThetaFn:
            return lambda th: fn(np.mod(th, 2 * np.pi))

        return cls(
            value_fn=wrap(spline),
            d1_fn=wrap(d1s),
            d2_fn=wrap(d2s),
            representation="sampled",
            samples=vals,
        )

    @classmethod
    def sample(cls, fn: ThetaFn, n_theta: int = DEFAULT_N_THETA) -> "AngularProfile":
        th = np.linspace(0.0, 2 * np.pi, n_theta, endpoint=False)
        return cls.from_samples(fn(th))


def load_profile_samples(path: str | Path) -> AngularProfile:
    """Read a profile file: plain text, one value per line, n_theta lines."""
    p = Path(path)
    if not p.exists():
        raise InputError(f"profile file not found: {p}")
    vals = np.loadtxt(p, dtype=float, ndmin=1)
    return AngularProfile.from_samples(vals)
