import numpy as np
import pytest

from fhm_lab.errors import InputError, MeasureExtractionError
from fhm_lab.integrand import power_integrand
from fhm_lab.measure import (
    LEVEL_LIMIT,
    WEAK_IDENTITY,
    boundary_measure,
    check_measure_solution_comparability,
    comparability_sweep,
    compare_measures,
    level_flux,
    level_limit_measure,
    measure_ball,
    measure_balls,
    read_measure_csv,
    rescale_measure,
    write_measure_csv,
)
from fhm_lab.solver import energy, radial_flux, solve_capacitary

from .conftest import R_DISK

CAPACITY = 2 * np.pi / np.log(R_DISK)


@pytest.fixture(scope="module")
def mu_p2(solved_p2, quadratic):
    return boundary_measure(solved_p2, quadratic)


def test_total_mass_is_ring_capacity(mu_p2, solved_p2, quadratic):
    assert mu_p2.method == WEAK_IDENTITY
    assert mu_p2.total_mass == pytest.approx(CAPACITY, rel=0.02)
    assert mu_p2.total_mass == pytest.approx(energy(solved_p2, quadratic), rel=1e-5)
    assert mu_p2.field_checksum == solved_p2.mesh.checksum


def test_disk_measure_is_uniform(mu_p2):
    expected = mu_p2.total_mass * mu_p2.lengths / mu_p2.lengths.sum()
    np.testing.assert_allclose(mu_p2.weights, expected, rtol=0.1)
    assert mu_p2.normalized().total_mass == pytest.approx(1.0)


def test_level_limit_measure_agrees(mu_p2, solved_p2, quadratic):
    limit = level_limit_measure(solved_p2, quadratic)
    assert limit.method == LEVEL_LIMIT
    cmp = compare_measures(mu_p2, limit)
    assert cmp.n_compared == mu_p2.n_arcs
    assert 0.75 < cmp.ratio_min <= cmp.ratio_median <= cmp.ratio_max < 1.25


def test_level_flux_is_conserved(solved_p2, quadratic, mu_p2):
    i2, i8 = level_flux(solved_p2, quadratic, 0.2), level_flux(solved_p2, quadratic, 0.8)
    assert i2 == pytest.approx(i8, rel=0.02)
    assert i2 == pytest.approx(CAPACITY, rel=0.02)
    assert level_flux(solved_p2, quadratic, 0.02) == pytest.approx(mu_p2.total_mass, rel=0.03)


def test_p3_mass_matches_radial_flux(solved_p3):
    mu = boundary_measure(solved_p3, power_integrand(3.0))
    assert mu.total_mass == pytest.approx(radial_flux(4.0, 3.0), rel=0.03)
    assert mu.p == 3.0


def test_ball_mass_of_uniform_measure(mu_p2):
    r = 1.0
    expected = 2 * r / (2 * np.pi * R_DISK) * mu_p2.total_mass
    assert measure_ball(mu_p2, (R_DISK, 0.0), r) == pytest.approx(expected, rel=0.15)
    assert measure_ball(mu_p2, (0.0, 0.0), 1.0) == 0.0
    balls = measure_balls(mu_p2, np.array([[R_DISK, 0.0], [0.0, R_DISK]]), r)
    np.testing.assert_allclose(balls, expected, rtol=0.15)
    with pytest.raises(InputError):
        measure_ball(mu_p2, (R_DISK, 0.0), -1.0)
    with pytest.raises(InputError):
        measure_ball(mu_p2, (R_DISK, 0.0), 0.0)


def test_comparability_ratios_stable(solved_p2, mu_p2):
    df = comparability_sweep(solved_p2, mu_p2, np.array([[R_DISK, 0.0], [0.0, -R_DISK]]), [0.8, 1.6, 3.2])
    assert not df["degenerate"].any()
    for col in ("ratio_half", "ratio_double"):
        assert df[col].max() / df[col].min() < 3.0
    with pytest.raises(InputError):
        check_measure_solution_comparability(solved_p2, mu_p2, (0.0, 0.0), 0.1)
    # a point on the inner circle is far from the outer boundary
    with pytest.raises(InputError):
        check_measure_solution_comparability(solved_p2, mu_p2, (1.0, 0.0), 0.5)


@pytest.mark.parametrize("p", [pytest.param(1.5, marks=pytest.mark.slow), 2.0, 3.0])
def test_dilation_covariance(disk_mesh, p):
    F = power_integrand(p, delta_certified=0.5)
    s = 2.0
    small = solve_capacitary(disk_mesh, F)
    big = solve_capacitary(disk_mesh.transformed(s * np.eye(2)), F)
    mu = boundary_measure(small, F)
    pulled = rescale_measure(boundary_measure(big, F), s_hat=s)
    np.testing.assert_allclose(pulled.midpoints, mu.midpoints, atol=1e-12)
    np.testing.assert_allclose(pulled.weights, mu.weights, rtol=1e-4, atol=1e-8 * mu.total_mass)


def test_wrong_orientation_field_is_rejected(radial_field, quadratic):
    flipped = radial_field.with_values(1.0 - radial_field.values)
    with pytest.raises(MeasureExtractionError):
        boundary_measure(flipped, quadratic)


def test_measure_csv(tmp_path, mu_p2):
    path = tmp_path / "measure.csv"
    write_measure_csv(mu_p2, path)
    header = path.read_text().splitlines()[0]
    assert header.startswith("# total_mass=")
    assert f"field_sha256={mu_p2.field_checksum}" in header
    back = read_measure_csv(path)
    np.testing.assert_array_equal(back.weights, mu_p2.weights)
    assert back.method == mu_p2.method

    lines = path.read_text().splitlines()
    lines[0] = lines[0].replace("total_mass=", "total_mass=9")
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(InputError):
        read_measure_csv(path)


def test_compare_requires_same_arcs(mu_p2, solved_p3):
    other = boundary_measure(solved_p3, power_integrand(3.0))
    with pytest.raises(InputError):
        compare_measures(mu_p2, other)
