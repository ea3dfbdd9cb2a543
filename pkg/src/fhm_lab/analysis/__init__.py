"""Log-density moments, gauges, winding numbers and dimension estimates."""

from fhm_lab.analysis.dimension import (
    DimensionReport,
    DimensionTrend,
    GaugeComparison,
    default_radii,
    dimension_report,
    dimension_trend,
    gauge_comparison,
    geometric_radii,
    information_dimension,
    local_dimension,
    measure_diameter,
)
from fhm_lab.analysis.gauge import GaugeFunction, frak_d, gauge_value
from fhm_lab.analysis.log_density import LogDensityField, log_density, regime_of
from fhm_lab.analysis.moments import (
    MomentFit,
    MomentTable,
    exceptional_flux,
    log_moment_integral,
    moment_bound_fit,
    moment_integral,
    moment_table,
)
from fhm_lab.analysis.synthetic import contraction_ratio, point_mass_measure, self_similar_radii, synthetic_measure
from fhm_lab.analysis.winding import component_winding, winding_number, zero_count_between

__all__ = [
    "DimensionReport",
    "DimensionTrend",
    "GaugeComparison",
    "GaugeFunction",
    "LogDensityField",
    "MomentFit",
    "MomentTable",
    "component_winding",
    "contraction_ratio",
    "default_radii",
    "dimension_report",
    "dimension_trend",
    "exceptional_flux",
    "frak_d",
    "gauge_comparison",
    "gauge_value",
    "geometric_radii",
    "information_dimension",
    "local_dimension",
    "log_density",
    "log_moment_integral",
    "measure_diameter",
    "moment_bound_fit",
    "moment_integral",
    "moment_table",
    "point_mass_measure",
    "regime_of",
    "self_similar_radii",
    "synthetic_measure",
    "winding_number",
    "zero_count_between",
]
