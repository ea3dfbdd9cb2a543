"""Boundary measure extraction, level fluxes and comparability checks."""

from fhm_lab.measure.boundary import (
    LEVEL_LIMIT,
    SYNTHETIC,
    WEAK_IDENTITY,
    BoundaryMeasure,
    MeasureComparison,
    boundary_measure,
    compare_measures,
    level_limit_measure,
    measure_ball,
    measure_balls,
    read_measure_csv,
    rescale_measure,
    write_measure_csv,
)
from fhm_lab.measure.comparability import (
    ComparabilityReport,
    check_measure_solution_comparability,
    comparability_sweep,
    outer_boundary_points,
)
from fhm_lab.measure.flux import curve_flux, level_flux

__all__ = [
    "LEVEL_LIMIT",
    "SYNTHETIC",
    "WEAK_IDENTITY",
    "BoundaryMeasure",
    "ComparabilityReport",
    "MeasureComparison",
    "boundary_measure",
    "check_measure_solution_comparability",
    "comparability_sweep",
    "compare_measures",
    "curve_flux",
    "level_flux",
    "level_limit_measure",
    "measure_ball",
    "measure_balls",
    "outer_boundary_points",
    "read_measure_csv",
    "rescale_measure",
    "write_measure_csv",
]
