"""Damped Newton with Armijo backtracking over a decreasing regularization schedule."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, replace
from typing import Any, Callable

import numpy as np
import pandas as pd
import scipy.sparse as sp
from scipy.sparse.linalg import cg, spsolve

from fhm_lab.errors import InputError, NewtonDivergenceError, NumericalError, SingularityError
from fhm_lab.geometry.mesher import Mesh
from fhm_lab.integrand.integrand import Integrand, power_integrand
from fhm_lab.integrand.mollify import mollify
from fhm_lab.solver.assembly import discrete_energy, tangent_matrix, weak_gradient
from fhm_lab.solver.fields import ScalarField, triangle_gradients
from fhm_lab.utils.logging import get_logger, log_newton_step, log_stage

logger = get_logger(__name__)

EPS_FINAL_SUBQUADRATIC = 1e-6
EPS_FINAL_SUPERQUADRATIC = 1e-8
ENERGY_SLACK = 1e-12
HISTORY_COLUMNS = ["stage", "iteration", "epsilon", "energy", "residual", "step"]


def geometric_schedule(eps_final: float, eps0: float = 1.0) -> tuple[float, ...]:
    """eps_k = 2^-k * eps0 while above eps_final, then eps_final."""
    if eps_final <= 0:
        return (0.0,)
    n = int(math.floor(math.log2(eps0 / eps_final)))
    sched = [eps0 * 2.0**-k for k in range(n + 1) if eps0 * 2.0**-k > eps_final]
    return tuple(sched) + (eps_final,)


@dataclass(frozen=True)
class SolveOptions:
    epsilon_schedule: tuple[float, ...] | None = None  # None: chosen from p
    max_newton: int = 50
    tolerance: float = 1e-9
    stage_tolerance: float = 1e-6
    energy_tolerance: float = 1e-14
    armijo: float = 1e-4
    backtrack: float = 0.5
    min_step: float = 1e-10
    damping: tuple[float, ...] = (1.0, 0.5, 0.25)
    linear_rtol: float = 1e-10
    linear_maxiter: int | None = None
    near_field: float | None = 8.0
    degenerate_gradient: float = 1e-10

    def __post_init__(self) -> None:
        if self.epsilon_schedule is not None:
            s = tuple(float(e) for e in self.epsilon_schedule)
            if not s:
                raise InputError("epsilon_schedule must not be empty")
            if any(e < 0 for e in s):
                raise InputError("epsilon_schedule entries must be nonnegative")
            if any(b >= a for a, b in zip(s, s[1:])):
                raise InputError(f"epsilon_schedule must be strictly decreasing, got {s}")
            object.__setattr__(self, "epsilon_schedule", s)
        if self.tolerance <= 0 or self.stage_tolerance <= 0:
            raise InputError("tolerances must be positive")
        if not (0 < self.armijo < 0.5) or not (0 < self.backtrack < 1):
            raise InputError("line search needs 0 < armijo < 0.5 and 0 < backtrack < 1")
        if not self.damping or any(not (0 < d <= 1) for d in self.damping):
            raise InputError("damping factors must lie in (0, 1]")

    @property
    def epsilon_final(self) -> float | None:
        return None if self.epsilon_schedule is None else self.epsilon_schedule[-1]

    def schedule_for(self, F: Integrand, degenerate: bool = False) -> tuple[float, ...]:
        if self.epsilon_schedule is not None:
            return self.epsilon_schedule
        if F.p < 2.0:
            return geometric_schedule(EPS_FINAL_SUBQUADRATIC)
        if degenerate and not F.is_smooth_at_origin:
            return geometric_schedule(EPS_FINAL_SUPERQUADRATIC)
        return (0.0,)


@dataclass
class _Stage:
    index: int
    epsilon: float
    F: Integrand
    tolerance: float
    final: bool
    rows: list[dict[str, Any]] = field(default_factory=list)


def _dirichlet(m: Mesh) -> tuple[np.ndarray, np.ndarray]:
    values = np.zeros(m.n_vertices)
    values[m.inner_nodes] = 1.0
    values[m.outer_nodes] = 0.0
    return values, m.interior_nodes


def _linear_solve(K: sp.csr_matrix, rhs: np.ndarray, opts: SolveOptions) -> np.ndarray:
    diag = K.diagonal()
    if np.all(diag > 0):
        M = sp.diags(1.0 / diag)
        x, info = cg(K, rhs, rtol=opts.linear_rtol, atol=0.0, maxiter=opts.linear_maxiter, M=M)
        if info == 0:
            return x
        logger.debug("cg did not converge, falling back to a direct solve", info=info)
    x = spsolve(K.tocsc(), rhs)
    if not np.all(np.isfinite(x)):
        raise NumericalError("tangent system is singular")
    return x


def harmonic_initial(m: Mesh, opts: SolveOptions | None = None) -> np.ndarray:
    """Discrete harmonic function with the capacitary boundary values."""
    opts = opts or SolveOptions()
    values, free = _dirichlet(m)
    K = tangent_matrix(m, values, power_integrand(2.0))
    rhs = -(K @ values)[free]
    values[free] = _linear_solve(K[free][:, free], rhs, opts)
    return values


def _has_degenerate(m: Mesh, values: np.ndarray, threshold: float) -> bool:
    g = triangle_gradients(m, values)
    return bool(np.any(np.hypot(g[:, 0], g[:, 1]) < threshold))


def _newton_stage(
    m: Mesh,
    values: np.ndarray,
    free: np.ndarray,
    stage: _Stage,
    opts: SolveOptions,
    damping: float,
) -> tuple[np.ndarray, bool]:
    F = stage.F
    u = values.copy()
    E = discrete_energy(m, u, F)
    for it in range(opts.max_newton + 1):
        g = weak_gradient(m, u, F)[free]
        res = float(np.linalg.norm(g))
        if it == 0:
            stage.rows.append(
                {"stage": stage.index, "iteration": it, "epsilon": stage.epsilon, "energy": E, "residual": res, "step": 0.0}
            )
        if res <= stage.tolerance:
            return u, True
        if it == opts.max_newton:
            return u, False

        K = tangent_matrix(m, u, F)[free][:, free]
        d = _linear_solve(K, -g, opts)
        slope = float(g @ d)
        if not slope < 0:
            d, slope = -g, -float(g @ g)

        step = damping
        accepted = False
        while step >= opts.min_step:
            trial = u.copy()
            trial[free] += step * d
            E_new = discrete_energy(m, trial, F)
            if E_new <= E + opts.armijo * step * slope:
                accepted = True
                break
            if E_new <= E + ENERGY_SLACK and step == damping:
                # change within absolute round-off: take the Newton step
                accepted = True
                break
            step *= opts.backtrack
        if not accepted:
            logger.debug("line search stalled", stage=stage.index, iteration=it, residual=res)
            return u, False

        u = trial
        dE = E - E_new
        E = E_new
        res_new = float(np.linalg.norm(weak_gradient(m, u, F)[free]))
        stage.rows.append(
            {"stage": stage.index, "iteration": it + 1, "epsilon": stage.epsilon, "energy": E, "residual": res_new, "step": step}
        )
        logger.debug("newton step", **log_newton_step(stage.index, it + 1, stage.epsilon, E, res_new, step))
        if res_new <= stage.tolerance:
            return u, True
        if 0 <= dE <= opts.energy_tolerance * max(1.0, abs(E)) and res_new <= 100 * stage.tolerance:
            return u, True
    return u, False


def _stage_integrand(F: Integrand, eps: float, opts: SolveOptions) -> Integrand:
    base = F.unregularized()
    return base if eps == 0.0 else mollify(base, eps, near_field=opts.near_field)


def _run_schedule(
    m: Mesh,
    F: Integrand,
    schedule: tuple[float, ...],
    values: np.ndarray,
    free: np.ndarray,
    opts: SolveOptions,
    on_stage: Callable[[int, float, np.ndarray], None] | None = None,
) -> tuple[np.ndarray, list[dict[str, Any]]]:
    rows: list[dict[str, Any]] = []
    for k, eps in enumerate(schedule):
        final = k == len(schedule) - 1
        stage = _Stage(
            index=k,
            epsilon=eps,
            F=_stage_integrand(F, eps, opts),
            tolerance=opts.tolerance if final else opts.stage_tolerance,
            final=final,
        )
        t0 = time.perf_counter()
        ok = False
        for damping in opts.damping:
            stage.rows.clear()
            new_values, ok = _newton_stage(m, values, free, stage, opts, damping)
            if ok:
                break
            logger.info("stage retry with smaller damping", stage=k, epsilon=eps, damping=damping)
        rows.extend(stage.rows)
        if not ok:
            if final:
                history = [r["residual"] for r in rows]
                raise NewtonDivergenceError(
                    f"Newton failed at epsilon={eps:g} after damping {opts.damping}", new_values, history
                )
            logger.warning("intermediate stage not converged, continuing", stage=k, epsilon=eps)
        values = new_values
        if on_stage is not None:
            on_stage(k, eps, values)
        logger.info(
            "epsilon stage done",
            **log_stage(f"eps[{k}]", time.perf_counter() - t0, epsilon=eps, iterations=len(stage.rows) - 1),
        )
    return values, rows


def _clip_unit(values: np.ndarray, history: pd.DataFrame) -> np.ndarray:
    """Clip to [0, 1]; the overshoot is stored in the last history row."""
    below = float(max(-values.min(), 0.0))
    above = float(max(values.max() - 1.0, 0.0))
    history["clipped"] = 0.0
    if below == 0.0 and above == 0.0:
        return values
    logger.warning("iterate left [0, 1], clipping", below=below, above=above)
    if len(history):
        history.loc[history.index[-1], "clipped"] = max(below, above)
    return np.clip(values, 0.0, 1.0)


def solve_capacitary(m: Mesh, F: Integrand, opts: SolveOptions | None = None) -> ScalarField:
    """Capacitary function: u = 0 on the outer loop, 1 on the inner circle, weak f-harmonic inside."""
    opts = opts or SolveOptions()
    if F.delta_certified is None:
        logger.warning("integrand has no certified delta; solving anyway", kind=F.kind, p=F.p)
    t0 = time.perf_counter()
    values = harmonic_initial(m, opts)
    free = m.interior_nodes

    schedule = opts.schedule_for(F)
    try:
        values_out, rows = _run_schedule(m, F, schedule, values, free, opts)
        degenerate = schedule[-1] == 0.0 and _has_degenerate(m, values_out, opts.degenerate_gradient)
    except (SingularityError, NumericalError) as exc:
        if schedule != (0.0,) or opts.epsilon_schedule is not None or F.is_smooth_at_origin:
            raise
        logger.info("unregularized solve failed, switching to the epsilon schedule", error=str(exc))
        degenerate = True
    if degenerate and opts.epsilon_schedule is None:
        schedule = opts.schedule_for(F, degenerate=True)
        if schedule != (0.0,):
            values_out, rows = _run_schedule(m, F, schedule, values, free, opts)

    history = pd.DataFrame(rows, columns=HISTORY_COLUMNS)
    values_out = _clip_unit(values_out, history)
    logger.info(
        "capacitary solve done",
        **log_stage(
            "solve",
            time.perf_counter() - t0,
            p=F.p,
            kind=F.kind,
            stages=len(schedule),
            final_residual=float(history["residual"].iloc[-1]) if len(history) else None,
        ),
    )
    return ScalarField(mesh=m, values=values_out, history=history)


def continuation(
    m: Mesh,
    F: Integrand,
    schedule: tuple[float, ...],
    opts: SolveOptions | None = None,
    on_stage: Callable[[int, float, np.ndarray], None] | None = None,
) -> ScalarField:
    """Run an explicit epsilon schedule from the harmonic start, reporting each stage result."""
    opts = replace(opts or SolveOptions(), epsilon_schedule=tuple(schedule))
    values = harmonic_initial(m, opts)
    out, rows = _run_schedule(m, F, opts.epsilon_schedule, values, m.interior_nodes, opts, on_stage)
    history = pd.DataFrame(rows, columns=HISTORY_COLUMNS)
    return ScalarField(mesh=m, values=_clip_unit(out, history), history=history)
