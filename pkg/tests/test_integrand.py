import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from fhm_lab.errors import InputError, SingularityError
from fhm_lab.integrand import (
    AngularProfile,
    certify,
    comparability_constants,
    eval_f,
    grad_f,
    hessian_f,
    load_profile_samples,
    mollify,
    power_integrand,
    quadratic_form_integrand,
    quasiconformal_K,
    sampled_integrand,
    sandwich_constant,
    structure_constants,
    verify_delta_monotone,
)
from fhm_lab.integrand.quadrature import mollifier_rule

ANISO = [[2.0, 0.5], [0.5, 1.0]]
angles = st.floats(0.0, 2 * np.pi)
radii = st.floats(0.05, 20.0)
exponents = st.floats(1.2, 5.0)


def _eta(r, th):
    return np.array([r * np.cos(th), r * np.sin(th)])


def _fd_gradient(F, eta, h=1e-5):
    e = np.eye(2)
    return np.array([(eval_f(F, eta + h * e[k]) - eval_f(F, eta - h * e[k])) / (2 * h) for k in range(2)])


def test_power_values():
    assert eval_f(power_integrand(3.0), (3.0, 4.0)) == pytest.approx(125.0, rel=1e-12)
    np.testing.assert_allclose(grad_f(power_integrand(2.0), (1.0, 2.0)), [2.0, 4.0], rtol=1e-12)
    np.testing.assert_allclose(hessian_f(power_integrand(2.0), (0.3, -1.0)), 2 * np.eye(2), atol=1e-12)


def test_quadratic_form_matches_matrix():
    F = quadratic_form_integrand(ANISO, 2.0)
    eta = np.array([0.7, -1.3])
    A = np.array(ANISO)
    assert eval_f(F, eta) == pytest.approx(eta @ A @ eta, rel=1e-12)
    np.testing.assert_allclose(grad_f(F, eta), 2 * A @ eta, rtol=1e-10)
    np.testing.assert_allclose(hessian_f(F, eta), 2 * A, rtol=1e-10)


@settings(max_examples=50, deadline=None)
@given(r=radii, th=angles, p=exponents, s=st.sampled_from([0.5, 2.0, 10.0]))
def test_homogeneity_and_euler_identity(r, th, p, s):
    F = quadratic_form_integrand(ANISO, p)
    eta = _eta(r, th)
    f = eval_f(F, eta)
    assert abs(eval_f(F, s * eta) - s**p * f) <= 1e-10 * s**p * f
    g = grad_f(F, eta)
    assert eta @ g == pytest.approx(p * f, rel=1e-10)
    H = hessian_f(F, eta)
    np.testing.assert_allclose(H @ eta, (p - 1) * g, rtol=1e-9, atol=1e-12 * np.abs(g).max())
    np.testing.assert_allclose(H, H.T, atol=1e-12 * np.abs(H).max())


def test_sampled_profile_derivatives_match_finite_differences():
    prof = AngularProfile.sample(lambda th: 1.0 + 0.3 * np.cos(2 * th))
    F = sampled_integrand(3.0, prof.samples)
    eta = np.array([1.0, 2.0])
    np.testing.assert_allclose(grad_f(F, eta), _fd_gradient(F, eta), rtol=1e-5)


def test_sampled_profile_file(tmp_path):
    path = tmp_path / "profile.txt"
    th = np.linspace(0.0, 2 * np.pi, 256, endpoint=False)
    np.savetxt(path, 1.0 + 0.2 * np.sin(th))
    prof = load_profile_samples(path)
    assert prof.is_sampled
    assert prof(0.0) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InputError):
        load_profile_samples(tmp_path / "missing.txt")


def test_profile_rejects_nonpositive_values():
    with pytest.raises(InputError):
        AngularProfile.from_samples(np.r_[np.ones(15), 0.0])
    with pytest.raises(InputError):
        quadratic_form_integrand([[1.0, 2.0], [2.0, 1.0]])


def test_gradient_singular_at_origin_below_two():
    with pytest.raises(SingularityError):
        grad_f(power_integrand(1.5), (0.0, 0.0))
    np.testing.assert_array_equal(grad_f(power_integrand(3.0), (0.0, 0.0)), [0.0, 0.0])


def test_mollified_quadratic_adds_second_moment():
    eps = 0.1
    F = mollify(power_integrand(2.0), eps)
    c2 = mollifier_rule().second_moment
    assert eval_f(F, (1.0, 0.0)) == pytest.approx(1.0 + eps**2 * c2, rel=1e-12)
    base = power_integrand(2.0)
    assert mollify(base, 0.0) is base


def test_mollified_gradient_finite_at_origin():
    F = mollify(power_integrand(1.5), 1e-3)
    g = grad_f(F, (0.0, 0.0))
    assert np.all(np.isfinite(g))
    assert np.hypot(*g) < 1e-12


def test_mollifier_rule_is_normalized():
    rule = mollifier_rule()
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(rule.weights @ rule.nodes, [0.0, 0.0], atol=1e-14)


def test_delta_of_quadratic_is_one():
    est = verify_delta_monotone(power_integrand(2.0), n_samples=2000)
    assert est.monotone
    assert est.delta == pytest.approx(1.0, abs=1e-6)


def test_delta_scale_invariant():
    F = power_integrand(3.0)
    a = verify_delta_monotone(F, n_samples=4000, radius_range=(0.1, 10.0), seed=3)
    b = verify_delta_monotone(F, n_samples=4000, radius_range=(1.0, 100.0), seed=3)
    assert 0.0 < a.delta < 1.0
    assert a.delta == pytest.approx(b.delta, rel=1e-8)


def test_non_convex_profile_fails_certification():
    F = sampled_integrand(2.0, AngularProfile.sample(lambda th: 1.0 + 0.9 * np.cos(4 * th)).samples)
    assert not verify_delta_monotone(F, n_samples=4000).monotone
    with pytest.raises(InputError):
        certify(F, n_samples=4000)


def test_verify_requires_enough_samples():
    with pytest.raises(InputError):
        verify_delta_monotone(power_integrand(2.0), n_samples=10)


def test_quasiconformal_constant():
    assert quasiconformal_K(0.6) == pytest.approx(9.0, rel=1e-12)
    assert quasiconformal_K(1.0) == 1.0
    with pytest.raises(InputError):
        quasiconformal_K(0.0)


def test_structure_constants_of_quadratic():
    F = certify(power_integrand(2.0), n_samples=2000)
    assert F.delta_certified == pytest.approx(1.0, abs=1e-6)
    assert comparability_constants(F) == pytest.approx((1.0, 2.0, 2.0))
    assert sandwich_constant(F) == pytest.approx(2.0, rel=1e-10)
    sc = structure_constants(F)
    assert sc.M == 1.0
    assert sc.K == pytest.approx(1.0, abs=1e-3)


def test_structure_constants_of_diagonal_form():
    sc = structure_constants(quadratic_form_integrand([[2.0, 0.0], [0.0, 1.0]]))
    assert sc.M == pytest.approx(2.0, rel=1e-9)
    assert sc.K is None


def _annulus(n_r=9, n_th=64):
    r, th = np.meshgrid(np.linspace(1.0, 2.0, n_r), np.linspace(0.0, 2 * np.pi, n_th, endpoint=False))
    return np.column_stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()])


def test_mollification_error_shrinks_with_epsilon():
    F = power_integrand(3.0)
    pts = _annulus()
    exact = F.value(pts)
    errors = [np.abs(mollify(F, eps).value(pts) - exact).max() for eps in (0.2, 0.1, 0.05, 0.025)]
    assert all(a > b for a, b in zip(errors, errors[1:]))
    # second order in epsilon away from the origin
    assert errors[0] / errors[-1] > 30


def _cubic_pair_grid(n=1000):
    r, th = np.meshgrid(np.logspace(-2, 2, n), np.linspace(0.0, 2 * np.pi, n, endpoint=False))
    other = np.column_stack([(r * np.cos(th)).ravel(), (r * np.sin(th)).ravel()])
    eta = np.array([1.0, 0.0])
    # grad |eta|^3 = 3 |eta| eta
    dG = 3.0 * (eta - np.hypot(other[:, 0], other[:, 1])[:, None] * other)
    dE = eta - other
    keep = np.hypot(dE[:, 0], dE[:, 1]) > 1e-12
    return dG[keep], dE[keep], np.hypot(other[keep, 0], other[keep, 1])


def test_sampled_delta_of_cubic_matches_dense_grid():
    dG, dE, _ = _cubic_pair_grid()
    cosine = np.sum(dG * dE, axis=1) / (np.linalg.norm(dG, axis=1) * np.linalg.norm(dE, axis=1))
    est = verify_delta_monotone(power_integrand(3.0), radius_range=(0.1, 10.0))
    assert est.monotone
    assert est.delta == pytest.approx(cosine.min(), rel=0.02)


def test_sandwich_constant_of_cubic_matches_dense_grid():
    dG, dE, r = _cubic_pair_grid()
    ratio = np.sum(dG * dE, axis=1) / ((1.0 + r) * np.sum(dE * dE, axis=1))
    oracle = max(1.0, ratio.max(), 1.0 / ratio.min())
    assert oracle == pytest.approx(3.0, rel=0.01)
    c = structure_constants(power_integrand(3.0)).c_star_mono
    assert c == pytest.approx(oracle, rel=0.1)
