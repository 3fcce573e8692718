import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.spatial.transform import Rotation

from lieper.errors import BoundaryMismatch, DimensionMismatch, GridTooCoarse, TwistMismatch
from lieper.lie import LinearMap, SymBilinearForm, killing_form, su2
from lieper.periods import (Quaternion, SphereMap, constant_map, identity_map, left_translate,
                            log_derivative, period_3form, power_map, qexp, qinv, qlog, qmul,
                            rotation_to_quaternion, sample, suspension_family,
                            twisted_loop_period)

EIGHT_PI2 = 8 * math.pi ** 2
QUARTER = LinearMap.from_rows([[0, -1, 0], [1, 0, 0], [0, 0, 1]])

quat = st.lists(st.floats(-2, 2), min_size=4, max_size=4).filter(
    lambda q: np.linalg.norm(q) > 1e-3)


def kappa():
    return killing_form(su2()).scaled(Fraction(-1, 4))


def as_matrix(q):
    a, b, c, d = q
    return np.array([[a + 1j * b, c + 1j * d], [-c + 1j * d, a - 1j * b]])


@given(quat, quat)
def test_qmul_matches_su2_matrices(p, q):
    assert np.allclose(as_matrix(qmul(p, q)), as_matrix(p) @ as_matrix(q), atol=1e-12)


@given(st.lists(st.floats(-3, 3), min_size=3, max_size=3))
def test_exp_log_round_trip(v):
    v = np.array(v)
    if np.linalg.norm(v) >= math.pi - 1e-6:
        return
    assert np.allclose(qlog(qexp(v)), v, atol=1e-9)
    assert abs(np.linalg.norm(qexp(v)) - 1) < 1e-12


def test_quaternion_type():
    I, J = Quaternion(0, 1, 0, 0), Quaternion(0, 0, 1, 0)
    assert I * J == Quaternion(0, 0, 0, 1)
    assert Quaternion(3, 0, 4, 0).normalized().norm() == pytest.approx(1, abs=1e-15)


@given(st.lists(st.floats(-1, 1), min_size=3, max_size=3), st.floats(0.1, 3))
def test_rotation_quaternion_convention(axis, angle):
    axis = np.array(axis)
    if np.linalg.norm(axis) < 1e-3:
        return
    R = Rotation.from_rotvec(angle * axis / np.linalg.norm(axis)).as_matrix()
    u = rotation_to_quaternion(R)
    x = np.array([0.3, -1.2, 0.7])
    img = qmul(qmul(u, np.concatenate([[0], x])), qinv(u))
    assert np.allclose(img[1:], R @ x, atol=1e-12)


def test_log_derivative_constant_and_exponential():
    c = np.array([[0.3, 1.0, 2.0], [1.0, 0.2, 0.1]])
    assert np.allclose(log_derivative(constant_map((1, 2, 3, 4)), c, 1), 0)
    X = np.array([0.4, -0.7, 1.1])
    curve = SphereMap(lambda t: qexp(t[..., :1] * X))
    t = np.linspace(-1, 1, 7)[:, None]
    for h in (1e-2, 5e-3):
        err = np.max(np.abs(log_derivative(curve, t, 0, h=h) - X))
        assert err < 2 * h ** 2 * np.linalg.norm(X) ** 3


@given(quat)
def test_log_derivative_left_invariant(g):
    g = np.array(g) / np.linalg.norm(g)
    sigma = identity_map()
    pts = np.array([[0.4, 1.1, 2.0], [2.5, 0.3, 5.0]])
    for axis in range(3):
        assert np.allclose(log_derivative(left_translate(g, sigma), pts, axis),
                           log_derivative(sigma, pts, axis), atol=1e-9)


def test_sample_unit_norm():
    s = sample(power_map(3), 6)
    assert s.values.shape == (6, 6, 6, 4)
    assert s.max_norm_defect() < 1e-12


def test_identity_period():
    r = period_3form(kappa(), identity_map())
    assert abs(r.value[0] - EIGHT_PI2) / EIGHT_PI2 <= 1e-3
    assert r.value[0] > 0  # (I, J, K) is declared positively oriented
    assert 0 <= r.estimated_error < 1e-6
    assert r.resolutions == (48, 96)


def test_constant_period_zero():
    assert period_3form(kappa(), constant_map(), res=8).value[0] == 0


@pytest.mark.parametrize("k", [2, 3])
def test_degree_naturality(k):
    base = period_3form(kappa(), identity_map()).value[0]
    r = period_3form(kappa(), power_map(k))
    assert abs(r.value[0] - k * base) / (k * base) <= 2e-3


def test_period_linear_in_kappa():
    k1 = killing_form(su2())
    k2 = kappa()
    mix = k1.scaled(3) + k2.scaled(Fraction(-2, 7))
    p = lambda k: period_3form(k, power_map(2), res=10).value  # noqa: E731
    assert np.allclose(p(mix), 3 * p(k1) - 2 / 7 * p(k2), rtol=1e-13, atol=1e-10)
    vec = SymBilinearForm.from_values(3, 2, lambda i, j: (k1.table[i][j][0], k2.table[i][j][0]))
    assert np.allclose(p(vec), np.concatenate([p(k1), p(k2)]), rtol=1e-13)


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        period_3form(kappa(), power_map(3), res=4, rel_tol=1e-6)


def test_period_needs_su2_and_s3():
    with pytest.raises(DimensionMismatch):
        period_3form(SymBilinearForm.zero(2), identity_map(), res=4)
    with pytest.raises(DimensionMismatch):
        period_3form(kappa(), suspension_family(), res=4)


def test_threads_give_identical_result(monkeypatch):
    monkeypatch.setenv("LIEPER_THREADS", "1")
    a = period_3form(kappa(), identity_map(), res=12).value
    monkeypatch.setenv("LIEPER_THREADS", "4")
    b = period_3form(kappa(), identity_map(), res=12).value
    assert np.array_equal(a, b)


def test_loop_period_suspension():
    r = twisted_loop_period(kappa(), suspension_family())
    target = 4 * math.pi ** 2
    assert r.relative_difference <= 1e-2
    assert abs(r.lhs[0] - target) / target <= 2e-2
    assert abs(r.rhs[0] - target) / target <= 2e-2


def test_loop_period_twisted_family():
    r = twisted_loop_period(kappa(), suspension_family(QUARTER), QUARTER, res=(16, 16, 32))
    assert r.relative_difference <= 1e-2
    assert r.rhs[0] == pytest.approx(4 * math.pi ** 2, rel=1e-3)


def test_loop_period_constant_and_scaling():
    r = twisted_loop_period(kappa(), constant_map(domain="S2_family"), res=(6, 6, 8))
    assert np.allclose([r.lhs, r.rhs], 0)
    a = twisted_loop_period(kappa(), suspension_family(), res=(8, 8, 16))
    b = twisted_loop_period(kappa().scaled(5), suspension_family(), res=(8, 8, 16))
    assert np.allclose(b.lhs, 5 * a.lhs, rtol=1e-12)
    assert np.allclose(b.rhs, 5 * a.rhs, rtol=1e-12)


def test_loop_period_converges():
    coarse = twisted_loop_period(kappa(), suspension_family(), res=(8, 8, 16))
    fine = twisted_loop_period(kappa(), suspension_family(), res=(16, 16, 32))
    assert fine.difference < coarse.difference


def test_loop_period_boundary_and_twist_errors():
    with pytest.raises(BoundaryMismatch):
        twisted_loop_period(kappa(), constant_map((0, 0, 1, 0), "S2_family"), QUARTER,
                            res=(4, 4, 8))
    with pytest.raises(TwistMismatch):
        twisted_loop_period(kappa(), suspension_family(), LinearMap.identity(3).scaled(2),
                            res=(4, 4, 8))
    with pytest.raises(GridTooCoarse):
        twisted_loop_period(kappa(), suspension_family(), res=(4, 4, 8), rel_tol=1e-9)
