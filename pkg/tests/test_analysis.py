import mpmath
import numpy as np
import pytest
from scipy.special import gammaln

from fhm_lab.analysis import (
    GaugeFunction,
    MomentTable,
    contraction_ratio,
    default_radii,
    dimension_report,
    dimension_trend,
    exceptional_flux,
    frak_d,
    gauge_comparison,
    gauge_value,
    information_dimension,
    local_dimension,
    log_density,
    measure_diameter,
    moment_bound_fit,
    moment_integral,
    moment_table,
    point_mass_measure,
    regime_of,
    self_similar_radii,
    synthetic_measure,
    winding_number,
    zero_count_between,
)
from fhm_lab.errors import InputError, WindingError
from fhm_lab.geometry import LevelComponent, LevelCurve, ScalingFit, extract_level_curve
from fhm_lab.integrand import power_integrand
from fhm_lab.measure import BoundaryMeasure
from fhm_lab.solver import solve_capacitary

from .conftest import R_DISK

CAPACITY = 2 * np.pi / np.log(R_DISK)


def _uniform_circle(radius=R_DISK, n=4096, mass=1.0):
    th = 2 * np.pi * (np.arange(n) + 0.5) / n
    mid = radius * np.column_stack([np.cos(th), np.sin(th)])
    return BoundaryMeasure(
        midpoints=mid,
        lengths=np.full(n, 2 * np.pi * radius / n),
        weights=np.full(n, mass / n),
        method="synthetic",
    )


# log density and moments


def test_regimes(radial_field, quadratic):
    assert [regime_of(p) for p in (1.5, 2.0, 3.0)] == ["p<2", "p=2", "p>2"]
    ld = log_density(radial_field, quadratic)
    assert ld.regime == "p=2" and ld.branch == "pos"
    assert ld.excluded_area == 0.0
    # |grad u| < 1 on the whole ring, so the positive part vanishes
    assert np.all(ld.w == 0.0)
    with pytest.raises(InputError):
        log_density(radial_field, quadratic, p_regime="p<<2")


def test_zeroth_moment_is_capacity(radial_field, quadratic):
    ld = log_density(radial_field, quadratic)
    table = moment_table(radial_field, quadratic, ld, [0.4, 0.1, 0.02], m_max=2)
    assert list(table.frame.columns) == ["t", "m", "log_I_m"]
    for t in (0.4, 0.1, 0.02):
        assert table.value(t, 0) == pytest.approx(CAPACITY, rel=0.02)
        assert table.log_value(t, 1) == -np.inf
    with pytest.raises(KeyError):
        table.log_value(0.3, 0)


def test_negative_branch_moment_on_level_circle(radial_field, quadratic):
    ld = log_density(radial_field, quadratic).for_branch("neg")
    t = 0.3
    r = R_DISK ** (1 - t)
    w = -2 * np.log(1 / (r * np.log(R_DISK)))
    assert moment_integral(radial_field, quadratic, ld, t, 1) == pytest.approx(CAPACITY * w**2, rel=0.08)
    assert moment_integral(radial_field, quadratic, ld, t, 1, truncated=True) <= moment_integral(
        radial_field, quadratic, ld, t, 1
    )
    assert ld.c_prime > 0


def test_moment_levels_validated(radial_field, quadratic):
    ld = log_density(radial_field, quadratic)
    with pytest.raises(InputError):
        moment_integral(radial_field, quadratic, ld, 1.2, 0)
    with pytest.raises(InputError):
        moment_integral(radial_field, quadratic, ld, 0.2, -1)
    # above 1/2 is allowed with a warning
    assert moment_integral(radial_field, quadratic, ld, 0.7, 0) > 0


def test_moment_bound_fit_closed_form():
    rows = [(0.1, 0, 3.0), (0.1, 1, 5.0), (0.01, 0, 3.0), (0.01, 1, 9.0), (0.01, 2, 0.0)]
    fit = moment_bound_fit(MomentTable.from_rows(rows))
    brackets = []
    for t, m, v in rows[:-1]:
        brackets.append((np.log(v) - gammaln(m + 1) - m * np.log(np.log(1 / t))) / (m + 1))
    assert fit.c_star_hat == pytest.approx(np.exp(max(brackets)), rel=1e-9)
    assert fit.max_violation == pytest.approx(0.0, abs=1e-12)
    assert len(fit.brackets) == 4
    with pytest.raises(InputError):
        moment_bound_fit(MomentTable.from_rows([(0.1, 1, 0.0)]))


def test_exceptional_flux(radial_field, quadratic):
    ld = log_density(radial_field, quadratic).for_branch("neg")
    # w is about 4.0 on the level circle {u = 0.05}: D(0.05) is 3.6 for c_* = 1 and 7.3 for c_* = 4
    assert frak_d(0.05, 1.0) < 3.9 < 4.1 < frak_d(0.05, 4.0)
    everything = exceptional_flux(radial_field, quadratic, ld, 0.05, GaugeFunction(A=1.0))
    assert everything == pytest.approx(CAPACITY, rel=0.05)
    assert exceptional_flux(radial_field, quadratic, ld, 0.05, GaugeFunction(A=1.0, c_star=4.0)) == 0.0
    with pytest.raises(InputError):
        exceptional_flux(radial_field, quadratic, ld, 0.2, GaugeFunction(A=1.0))


# gauges


def test_gauge_matches_high_precision():
    r = 1e-8
    mpmath.mp.dps = 40
    L = mpmath.log(1 / mpmath.mpf(r))
    for sign in (1, -1):
        exact = mpmath.mpf(r) * mpmath.exp(sign * mpmath.sqrt(4 * L * mpmath.log(L)))
        assert gauge_value(GaugeFunction(A=1.0, sign=sign), r) == pytest.approx(float(exact), rel=1e-12)


def test_gauge_monotonicity():
    r = np.geomspace(1e-12, 0.1, 200)
    up = gauge_value(GaugeFunction(A=0.5, sign=1), r) / r
    down = gauge_value(GaugeFunction(A=0.5, sign=-1), r) / r
    assert np.all(np.diff(up) < 0)  # lambda/r grows as r decreases
    assert np.all(np.diff(down) > 0)
    np.testing.assert_allclose(gauge_value(GaugeFunction(A=0.0), r), r)


def test_gauge_validation():
    assert GaugeFunction.for_regime(3.0, 1.0).sign == -1
    assert GaugeFunction.for_regime(1.5, 1.0).sign == 1
    assert GaugeFunction.for_regime(2.0, 1.0, sign=-1).sign == -1
    assert GaugeFunction.for_regime(1.5, 1.0, c_star=0.3).c_star == 1.0
    with pytest.raises(InputError):
        GaugeFunction.for_regime(1.5, 1.0, sign=-1)
    with pytest.raises(InputError):
        GaugeFunction(A=-1.0)
    with pytest.raises(InputError):
        GaugeFunction(A=1.0, c_star=0.5)
    with pytest.raises(InputError):
        gauge_value(GaugeFunction(A=1.0), 0.2)
    g = GaugeFunction(A=1.0, variant="iterated")
    assert g.upper_limit == pytest.approx(np.exp(-np.e))
    assert gauge_value(g, 1e-3) > 1e-3


# winding numbers


def test_radial_winding_is_minus_one(radial_field):
    for t in (0.2, 0.5, 0.8):
        assert winding_number(radial_field, extract_level_curve(radial_field, t)) == -1
    assert zero_count_between(radial_field, 0.2, 0.8) == 0
    with pytest.raises(InputError):
        zero_count_between(radial_field, 0.8, 0.2)


def test_square_winding(solved_square):
    windings = [winding_number(solved_square, extract_level_curve(solved_square, t)) for t in (0.2, 0.5, 0.8)]
    assert windings == [-1, -1, -1]


def test_vanishing_gradient_is_reported(radial_field):
    square = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0], [0.0, -1.0]])
    grads = -square.copy()
    grads[2] = 0.0
    comp = LevelComponent(points=square, triangles=np.zeros(4, dtype=np.int64), gradients=grads)
    with pytest.raises(WindingError) as info:
        winding_number(radial_field, LevelCurve(level=0.5, requested=0.5, components=[comp]))
    assert info.value.vertex[0] == 0


# dimensions


def test_uniform_circle_dimension():
    mu = _uniform_circle()
    assert measure_diameter(mu) == pytest.approx(2 * R_DISK, rel=1e-4)
    rep = local_dimension(mu)
    assert rep.local_dimension == pytest.approx(1.0, abs=0.05)
    assert len(rep.radii) >= 4
    with pytest.raises(InputError):
        local_dimension(mu, radii=[0.1, 0.2])


def test_point_mass_has_dimension_zero():
    rep = local_dimension(point_mass_measure(1024), radii=[0.01, 0.02, 0.04, 0.08])
    assert rep.local_dimension == pytest.approx(0.0, abs=1e-12)
    assert len(rep.centers) == 1


@pytest.mark.parametrize("alpha", [0.8, 1.0, 1.25])
def test_synthetic_measure_calibration(alpha):
    mu = synthetic_measure(alpha)
    assert mu.total_mass == pytest.approx(1.0)
    radii = self_similar_radii(alpha)
    np.testing.assert_allclose(radii[1:] / radii[:-1], contraction_ratio(alpha))
    centers = None
    if alpha >= 1.0:
        # keep balls clear of the curve endpoints
        x = mu.midpoints[:, 0]
        centers = mu.midpoints[(x > 0.25) & (x < 0.75)]
    rep = dimension_report(mu, centers=centers, radii=radii, n_offsets=16)
    assert rep.local_dimension == pytest.approx(alpha, abs=0.05)
    assert rep.information.dimension == pytest.approx(alpha, abs=0.05)


def test_synthetic_measure_bounds():
    with pytest.raises(InputError):
        synthetic_measure(2.5)
    with pytest.raises(InputError):
        synthetic_measure(0.5, level=20)


def test_information_dimension_of_uniform_circle():
    fit = information_dimension(_uniform_circle(), sizes=[0.8, 0.4, 0.2, 0.1, 0.05])
    assert fit.dimension == pytest.approx(1.0, abs=0.05)


def test_gauge_comparison_flat_for_identity_gauge():
    mu = _uniform_circle(mass=CAPACITY)
    cmp = gauge_comparison(mu, GaugeFunction(A=0.0))
    L = measure_diameter(mu)
    expected = CAPACITY * L / (np.pi * R_DISK)
    np.testing.assert_allclose(cmp.ratios, expected, rtol=0.08)
    assert cmp.fraction_flat == pytest.approx(1.0)
    assert sum(cmp.counts().values()) == pytest.approx(1.0)


@pytest.mark.parametrize("mass, below", [(1.0, 1.0), (CAPACITY, 0.0)])
def test_mass_below_identity_gauge_at_finest_radius(mass, below):
    # mu(B(z, r)) / (r / L) = (2 M / pi) arcsin(x) / x with x = r / L, below 1 for small x iff M < pi / 2
    mu = _uniform_circle(mass=mass)
    cmp = gauge_comparison(mu, GaugeFunction(A=0.0))
    x = cmp.radii[0] / cmp.length_scale
    closed = 2 * mass / np.pi * np.arcsin(x) / x
    np.testing.assert_allclose(cmp.ratios[:, 0], closed, rtol=0.08)
    assert cmp.fraction_below_at_r_min == pytest.approx(below)
    rep = dimension_report(mu, GaugeFunction(A=0.0), n_offsets=2)
    assert rep.summary()["below_gauge_at_r_min"] == pytest.approx(below)
    assert set(rep.gauge_counts) == {"increasing", "decreasing", "flat"}


def test_gauge_comparison_trend_follows_sign():
    mu = _uniform_circle()
    radii = default_radii(mu)
    plus = gauge_comparison(mu, GaugeFunction(A=1.0, sign=1), radii)
    minus = gauge_comparison(mu, GaugeFunction(A=1.0, sign=-1), radii)
    # lambda_+ grows faster than r as r shrinks, so mu(B)/lambda_+ decreases
    assert plus.fraction_decreasing > 0.9
    assert minus.fraction_increasing > 0.9


def test_dimension_report_file(tmp_path):
    rep = dimension_report(_uniform_circle(), GaugeFunction(A=0.0), n_offsets=2)
    rep.write_text(tmp_path / "dimension.txt")
    text = (tmp_path / "dimension.txt").read_text()
    assert text.startswith("[dimension]")
    assert "gauge_flat: " in text
    assert set(rep.to_frame()["estimator"]) == {"local", "information"}


def _fit(value, half):
    return ScalingFit(value, value - half, value + half, 1.0, np.empty(0), np.empty(0))


def test_dimension_trend_separated_intervals():
    trend = dimension_trend({3.0: _fit(0.85, 0.03), 1.5: _fit(1.15, 0.03), 2.0: _fit(1.0, 0.03)})
    assert list(trend.table["p"]) == [1.5, 2.0, 3.0]
    assert list(trend.pairs["verdict"]) == ["ordered", "ordered"]
    assert trend.status == "ordered"
    assert trend.p2_in_window and trend.passed

    reversed_ = dimension_trend({1.5: _fit(0.85, 0.03), 2.0: _fit(1.0, 0.03), 3.0: _fit(1.15, 0.03)})
    assert reversed_.status == "violated" and not reversed_.passed


def test_dimension_trend_overlapping_intervals_fall_back_on_p2_window():
    # the point estimates are out of order but every interval overlaps its neighbour
    trend = dimension_trend({1.5: _fit(0.98, 0.1), 2.0: _fit(1.0, 0.1), 3.0: _fit(1.03, 0.1)})
    assert trend.status == "inconclusive"
    assert trend.passed
    outside = dimension_trend({1.5: _fit(1.25, 0.1), 2.0: _fit(1.2, 0.1), 3.0: _fit(1.15, 0.1)})
    assert outside.status == "inconclusive"
    assert outside.p2_in_window is False and not outside.passed
    mixed = dimension_trend({1.5: _fit(1.3, 0.02), 2.0: _fit(1.0, 0.2), 3.0: _fit(0.95, 0.02)})
    assert list(mixed.pairs["verdict"]) == ["ordered", "inconclusive"]
    assert mixed.status == "inconclusive"


def test_dimension_trend_accepts_reports():
    rep = dimension_report(_uniform_circle(), n_offsets=2)
    trend = dimension_trend({2.0: rep, 3.0: _fit(0.5, 0.01)})
    assert trend.p2_value == pytest.approx(rep.information.dimension)
    no_p2 = dimension_trend({1.5: _fit(1.2, 0.01), 3.0: _fit(0.8, 0.01)})
    assert no_p2.p2_in_window is None and no_p2.passed
    with pytest.raises(InputError):
        dimension_trend({2.0: rep})
    rep.information = None
    with pytest.raises(InputError):
        dimension_trend({2.0: rep, 3.0: _fit(0.5, 0.01)})


# koch prefractal

KOCH_LEVELS = [0.4, 0.2, 0.1, 0.05, 0.02, 0.01]
SMALL_LEVELS = [0.1, 0.05, 0.02, 0.01]


def _koch_checks(u, F):
    for t in (0.2, 0.5, 0.8):
        assert winding_number(u, extract_level_curve(u, t)) == -1
    ld = log_density(u, F)
    table = moment_table(u, F, ld, KOCH_LEVELS, m_max=5)
    fit = moment_bound_fit(table)
    assert np.isfinite(fit.c_star_hat) and fit.c_star_hat > 0
    assert fit.max_violation == pytest.approx(0.0, abs=1e-9)
    assert abs(fit.slope) <= 1.0

    flux = max(table.value(t, 0) for t in SMALL_LEVELS)
    gauge = GaugeFunction.for_regime(F.p, 1.0, c_star=max(fit.c_star_hat, 1.0))
    for t in SMALL_LEVELS:
        scaled = exceptional_flux(u, F, ld, t, gauge) * np.log(1.0 / t) ** 2
        assert np.isfinite(scaled)
        assert 0.0 <= scaled <= flux * np.log(10.0) ** 2


def test_koch_cubic_level_curves_and_moments(solved_koch3):
    _koch_checks(solved_koch3, power_integrand(3.0, delta_certified=0.5))


@pytest.mark.slow
def test_koch_subquadratic_level_curves_and_moments(koch_mesh):
    F = power_integrand(1.5, delta_certified=0.5)
    _koch_checks(solve_capacitary(koch_mesh, F), F)
