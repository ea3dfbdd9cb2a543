"""Capacitary solver: P1 energy minimization, oracles and diagnostics."""

from fhm_lab.solver.assembly import energy, residual, tangent_matrix, weak_gradient
from fhm_lab.solver.diagnostics import (
    CaccioppoliReport,
    ConvergenceFit,
    FundamentalInequalityReport,
    HarnackReport,
    HolderFit,
    boundary_holder_diagnostic,
    caccioppoli_diagnostic,
    convergence_order,
    fundamental_inequality,
    harnack_diagnostic,
    interior_balls,
    regularization_study,
)
from fhm_lab.solver.fields import ScalarField, gradient_field, read_field, write_field
from fhm_lab.solver.newton import SolveOptions, continuation, geometric_schedule, harmonic_initial, solve_capacitary
from fhm_lab.solver.oracles import radial_capacitary, radial_flux, radial_gradient_norm, radial_level_radius

__all__ = [
    "CaccioppoliReport",
    "ConvergenceFit",
    "FundamentalInequalityReport",
    "HarnackReport",
    "HolderFit",
    "ScalarField",
    "SolveOptions",
    "boundary_holder_diagnostic",
    "caccioppoli_diagnostic",
    "continuation",
    "convergence_order",
    "energy",
    "fundamental_inequality",
    "geometric_schedule",
    "gradient_field",
    "harmonic_initial",
    "harnack_diagnostic",
    "interior_balls",
    "radial_capacitary",
    "radial_flux",
    "radial_gradient_norm",
    "radial_level_radius",
    "read_field",
    "regularization_study",
    "residual",
    "solve_capacitary",
    "tangent_matrix",
    "weak_gradient",
    "write_field",
]
