"""Shared coarse meshes and solved fields; session scoped because solves dominate test time."""

import numpy as np
import pytest

from fhm_lab.geometry import make_domain, mesh
from fhm_lab.integrand import power_integrand
from fhm_lab.solver import ScalarField, radial_capacitary, solve_capacitary

R_DISK = 5.0
H_COARSE = 0.2


@pytest.fixture(scope="session")
def disk_domain():
    return make_domain("disk", {"radius": R_DISK})


@pytest.fixture(scope="session")
def disk_mesh(disk_domain):
    return mesh(disk_domain, H_COARSE)


@pytest.fixture(scope="session")
def square_mesh():
    return mesh(make_domain("square"), H_COARSE)


@pytest.fixture(scope="session")
def koch_domain():
    return make_domain("koch", {"level": 3})


@pytest.fixture(scope="session")
def quadratic():
    return power_integrand(2.0, delta_certified=1.0)


@pytest.fixture(scope="session")
def radial_field(disk_mesh):
    """Nodal interpolant of log(R/r)/log R."""
    return ScalarField.from_function(
        disk_mesh, lambda z: np.clip(radial_capacitary(np.hypot(z[:, 0], z[:, 1]), R_DISK), 0.0, 1.0)
    )


@pytest.fixture(scope="session")
def solved_p2(disk_mesh, quadratic):
    return solve_capacitary(disk_mesh, quadratic)


@pytest.fixture(scope="session")
def solved_p3():
    m = mesh(make_domain("disk", {"radius": 4.0}), H_COARSE)
    return solve_capacitary(m, power_integrand(3.0, delta_certified=0.5))


@pytest.fixture(scope="session")
def solved_square(square_mesh, quadratic):
    return solve_capacitary(square_mesh, quadratic)


@pytest.fixture(scope="session")
def koch_mesh(koch_domain):
    return mesh(koch_domain, H_COARSE)


@pytest.fixture(scope="session")
def solved_koch3(koch_mesh):
    """p = 3 capacitary function on the level-3 Koch domain."""
    return solve_capacitary(koch_mesh, power_integrand(3.0, delta_certified=0.5))
