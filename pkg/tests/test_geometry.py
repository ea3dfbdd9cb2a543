import numpy as np
import pytest
from scipy.spatial import cKDTree

from fhm_lab.errors import InputError
from fhm_lab.geometry import (
    box_counting_dimension,
    densify_polyline,
    extract_level_curve,
    koch_boundary_length,
    koch_polygon,
    make_domain,
    mesh,
    normalize_domain,
    read_mesh,
    write_mesh,
)
from fhm_lab.geometry.fractal import fit_scaling
from fhm_lab.solver import radial_level_radius

from .conftest import R_DISK


def _area(poly):
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)


def test_disk_boundary_vertices_on_circles(disk_mesh):
    r = np.hypot(*disk_mesh.vertices.T)
    np.testing.assert_allclose(r[disk_mesh.outer_nodes], R_DISK, atol=1e-12)
    np.testing.assert_allclose(r[disk_mesh.inner_nodes], 1.0, atol=1e-12)
    assert disk_mesh.min_angle() >= 19.0
    assert _area(disk_mesh.vertices[disk_mesh.outer_loop]) > 0


def test_triangle_count_scales_with_h(disk_domain, disk_mesh):
    fine = mesh(disk_domain, 0.1)
    assert 2.0 < fine.n_triangles / disk_mesh.n_triangles < 8.0


def test_mesh_rejects_coarse_h(disk_domain):
    with pytest.raises(InputError):
        mesh(disk_domain, 0.5)
    with pytest.raises(InputError):
        mesh(disk_domain, 0.1, grading=0.0)


def test_graded_mesh_refines_outer_boundary(disk_domain, disk_mesh):
    graded = mesh(disk_domain, 0.2, grading=0.5)
    assert len(graded.outer_loop) >= 2 * len(disk_mesh.outer_loop) - 1


def test_mesh_file_round_trip(tmp_path, square_mesh):
    digest = write_mesh(square_mesh, tmp_path / "mesh.txt")
    back = read_mesh(tmp_path / "mesh.txt")
    assert back.checksum == square_mesh.checksum
    assert len(digest) == 64
    np.testing.assert_array_equal(back.outer_loop, square_mesh.outer_loop)
    assert back.h_max == square_mesh.h_max and back.grading == square_mesh.grading


def test_mesh_file_layout(tmp_path, square_mesh):
    path = tmp_path / "mesh.txt"
    write_mesh(square_mesh, path)
    lines = path.read_text().splitlines()
    assert lines[0] == f"nodes {square_mesh.n_vertices} / triangles {square_mesh.n_triangles}"
    assert lines[1].startswith("# h_max ")
    assert len(lines[2].split()) == 2
    assert lines[2 + square_mesh.n_vertices + square_mesh.n_triangles] == f"boundary {len(square_mesh.boundary_edges)}"
    # metadata comment is optional on input
    bare = tmp_path / "bare.txt"
    bare.write_text("\n".join([lines[0]] + lines[2:]) + "\n")
    back = read_mesh(bare)
    assert back.checksum == square_mesh.checksum
    assert back.grading == 1.0 and back.h_max > 0


def test_koch_prefractal():
    poly = koch_polygon(3)
    assert len(poly) == 192
    assert _area(poly) > 0
    per = np.hypot(*np.diff(np.vstack([poly, poly[:1]]), axis=0).T).sum()
    assert per == pytest.approx(koch_boundary_length(3), rel=1e-12)
    with pytest.raises(InputError):
        koch_polygon(6)


def test_normalization_puts_boundary_at_distance_four(koch_domain):
    assert koch_domain.n_edges == 192
    assert koch_domain.boundary_distance(np.zeros((1, 2)))[0] == pytest.approx(4.0, rel=1e-12)
    assert koch_domain.inner_radius == 1.0


def test_normalization_is_idempotent(koch_domain):
    again = normalize_domain(koch_domain)
    np.testing.assert_allclose(again.outer, koch_domain.outer, atol=1e-12)
    assert again.inner_radius == koch_domain.inner_radius
    assert again.inner_center == koch_domain.inner_center
    assert again.normalization.scale == pytest.approx(koch_domain.normalization.scale, rel=1e-12)
    custom = make_domain("custom", {"vertices": [[0, 0], [3, 0], [3, 2], [0, 2]], "z0": (1.0, 1.0)})
    np.testing.assert_allclose(normalize_domain(custom).outer, custom.outer, atol=1e-12)


@pytest.mark.slow
def test_fine_koch_mesh_keeps_every_corner(koch_domain):
    m = mesh(koch_domain, 0.05, grading=0.25)
    tree = cKDTree(m.vertices)
    dist, _ = tree.query(koch_domain.outer)
    assert dist.max() < 1e-12
    edges = np.hypot(*(m.vertices[m.outer_edges[:, 0]] - m.vertices[m.outer_edges[:, 1]]).T)
    assert edges.max() <= 0.25 * 0.05 * (1 + 1e-9)


def test_coarse_koch_mesh_keeps_every_corner(koch_domain, koch_mesh):
    dist, _ = cKDTree(koch_mesh.vertices).query(koch_domain.outer)
    assert dist.max() < 1e-12


def test_level_curves_are_nested(solved_koch3):
    levels = [0.2, 0.5, 0.8]
    curves = [extract_level_curve(solved_koch3, t) for t in levels]
    for outer, inner in zip(curves, curves[1:]):
        pts = np.vstack([c.points for c in inner.components])
        assert outer.inside(pts).all()
        back = np.vstack([c.points for c in outer.components])
        assert not inner.inside(back).any()
    # the hole sits inside every level curve
    assert all(c.inside(np.zeros((1, 2)))[0] for c in curves)


def test_custom_domain_orientation_and_raw_coordinates():
    raw = np.array([[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]])  # clockwise
    dom = make_domain("custom", {"vertices": raw.tolist(), "z0": (0.5, 0.5)})
    assert _area(dom.outer) > 0
    assert dom.normalization.scale == pytest.approx(8.0)
    back = dom.normalization.to_raw(dom.outer)
    assert {tuple(np.round(p, 12)) for p in back} == {tuple(p) for p in raw}


def test_custom_domain_errors():
    bowtie = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]]
    with pytest.raises(InputError):
        make_domain("custom", {"vertices": bowtie, "z0": (0.5, 0.25)})
    square = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    with pytest.raises(InputError):
        make_domain("custom", {"vertices": square, "z0": (2.0, 2.0)})
    with pytest.raises(InputError):
        make_domain("disk", {"radius": 0.5})
    with pytest.raises(InputError):
        make_domain("triangle")


def test_radial_level_curve_is_a_circle(radial_field):
    curve = extract_level_curve(radial_field, 0.5)
    assert curve.n_components == 1
    comp = curve.components[0]
    assert comp.closed
    assert comp.signed_area > 0
    np.testing.assert_allclose(np.hypot(*comp.points.T), np.sqrt(R_DISK), rtol=1e-2)
    assert curve.inside(np.zeros((1, 2)))[0]
    assert len(comp.triangles) == len(comp.points)


def test_level_curve_near_outer_boundary(radial_field):
    curve = extract_level_curve(radial_field, 0.02)
    r = radial_level_radius(0.02, R_DISK)
    assert curve.total_length == pytest.approx(2 * np.pi * r, rel=0.01)
    assert curve.total_length == pytest.approx(2 * np.pi * R_DISK, rel=0.05)


def test_level_on_a_nodal_value_is_perturbed(radial_field):
    t = float(radial_field.values[radial_field.mesh.interior_nodes[0]])
    curve = extract_level_curve(radial_field, t)
    assert curve.requested == t
    assert 0.0 < curve.level - t <= 64e-12
    assert curve.n_components >= 1


def test_level_outside_unit_interval(radial_field):
    for t in (0.0, 1.0, 1.5):
        with pytest.raises(InputError):
            extract_level_curve(radial_field, t)


def test_box_counting_of_segment_and_snowflake():
    seg = densify_polyline(np.array([[0.0, 0.0], [1.0, 0.3]]), 1e-3, closed=False)
    sizes = np.geomspace(0.01, 0.2, 6)
    assert box_counting_dimension(seg, sizes).dimension == pytest.approx(1.0, abs=0.08)
    snow = densify_polyline(koch_polygon(5), 1e-3)
    assert 1.1 < box_counting_dimension(snow, sizes).dimension < 1.45


def test_fit_scaling_recovers_exponent():
    sizes = np.geomspace(0.01, 1.0, 8)
    fit = fit_scaling(sizes, np.log(sizes**-1.5))
    assert fit.dimension == pytest.approx(1.5, rel=1e-12)
    assert fit.r_squared == pytest.approx(1.0)
