"""Mollified integrands f_eps = f * theta_eps."""

from __future__ import annotations

from dataclasses import replace

from fhm_lab.errors import InputError
from fhm_lab.integrand.integrand import Integrand
from fhm_lab.integrand.quadrature import DEFAULT_ORDER, mollifier_rule


def mollify(
    F: Integrand,
    epsilon: float,
    near_field: float | None = None,
    order: int = DEFAULT_ORDER,
) -> Integrand:
    """Return f_eps evaluated by polar Gauss quadrature over B(0, eps).

    epsilon = 0 returns F unchanged. ``near_field`` (a multiple of epsilon)
    limits the quadrature to small arguments; the solver uses it because far
    from the origin f_eps - f is O(eps^2 |eta|^(p-2)).
    """
    if epsilon < 0:
        raise InputError(f"epsilon must be nonnegative, got {epsilon}")
    if epsilon == 0:
        return F
    mollifier_rule(order)  # raises NumericalError if the rule is not converged
    return replace(F, epsilon=float(epsilon), near_field=near_field, quadrature_order=order)
