"""Homogeneous integrands, their derivatives, regularizations and constants."""

from .profiles import AngularProfile, load_profile_samples
from .integrand import (
    Integrand,
    eval_f,
    grad_f,
    hessian_f,
    power_integrand,
    quadratic_form_integrand,
    sampled_integrand,
)
from .mollify import mollify
from .monotonicity import (
    DeltaEstimate,
    StructureConstants,
    certify,
    comparability_constants,
    quasiconformal_K,
    sandwich_constant,
    structure_constants,
    verify_delta_monotone,
)

__all__ = [
    "AngularProfile",
    "load_profile_samples",
    "Integrand",
    "eval_f",
    "grad_f",
    "hessian_f",
    "power_integrand",
    "quadratic_form_integrand",
    "sampled_integrand",
    "mollify",
    "DeltaEstimate",
    "StructureConstants",
    "certify",
    "comparability_constants",
    "quasiconformal_K",
    "sandwich_constant",
    "structure_constants",
    "verify_delta_monotone",
]
