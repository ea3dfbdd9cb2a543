"""Test domains, meshes and level curves."""

from fhm_lab.geometry.contours import LevelComponent, LevelCurve, extract_level_curve
from fhm_lab.geometry.domains import (
    KOCH_MAX_LEVEL,
    Domain,
    Normalization,
    koch_boundary_length,
    koch_polygon,
    make_domain,
    normalize_domain,
)
from fhm_lab.geometry.fractal import ScalingFit, box_counting_dimension, densify_polyline
from fhm_lab.geometry.mesher import Mesh, mesh, read_mesh, write_mesh

__all__ = [
    "KOCH_MAX_LEVEL",
    "Domain",
    "LevelComponent",
    "LevelCurve",
    "Mesh",
    "Normalization",
    "ScalingFit",
    "box_counting_dimension",
    "densify_polyline",
    "extract_level_curve",
    "koch_boundary_length",
    "koch_polygon",
    "make_domain",
    "mesh",
    "normalize_domain",
    "read_mesh",
    "write_mesh",
]
