import json
import math

import numpy as np
import pytest
from scipy.linalg import expm

from lieper.connection import (ConnectionPatch, commutator_curve, commutator_loop_holonomy,
                               coordinate_field, curvature, horizontal_lift, load_patch,
                               patch_from_expressions, verify_second_derivative)
from lieper.errors import StepOutOfPatch
from lieper.periods import qexp, qinv, qmul

X, Y = coordinate_field(0), coordinate_field(1)
PAULI = [np.array([[1j, 0], [0, -1j]]), np.array([[0, 1], [-1, 0]]),
         np.array([[0, 1j], [1j, 0]])]


def circle(center=(0.1, 0.0), r=0.5):
    return lambda s: np.stack([center[0] + r * np.cos(2 * np.pi * s),
                               center[1] + r * np.sin(2 * np.pi * s)], axis=-1)


def test_curvature_examples():
    assert np.allclose(curvature(load_patch("zero-su2"), (0.2, 0.1), (1, 0), (0, 1)), 0)
    assert curvature(load_patch("xdy"), (0.3, -0.2), (1, 0), (0, 1)) == pytest.approx([1.0])
    assert curvature(load_patch("flat-u1"), (0.3, -0.2), (1, 0), (0, 1)) == pytest.approx(
        [0.0], abs=1e-9)
    # A = y J dx + x I dy: dA = I - J and [y J, x I] = -2xy K
    R = curvature(load_patch("su2-test"), (0.3, 0.5), (1, 0), (0, 1))
    assert np.allclose(R, [1, -1, -2 * 0.3 * 0.5], atol=1e-8)


def test_lift_zero_connection():
    c = horizontal_lift(load_patch("zero-su2"), circle())
    assert np.allclose(c.samples, [1, 0, 0, 0])


@pytest.mark.parametrize("a", [[0.3, -0.2, 0.5], [1.0, 0.0, 0.0]])
def test_lift_constant_connection_matches_expm(a):
    P = ConnectionPatch("su2", lambda x, y: np.array(a), lambda x, y: np.zeros(3),
                        normalized=False)
    c = horizontal_lift(P, lambda s: np.stack([-0.5 + s, 0 * s], axis=-1),
                        velocity=lambda s: np.stack([1 + 0 * s, 0 * s], axis=-1))
    oracle = expm(-sum(ai * m for ai, m in zip(a, PAULI)))
    assert np.allclose(c.as_matrices()[-1], oracle, atol=1e-12)


def test_flat_connection_has_trivial_holonomy():
    c = horizontal_lift(load_patch("flat-u1"), circle(), steps=400)
    assert np.allclose(c.end, [1, 0, 0, 0], atol=1e-8)


def test_u1_loop_holonomy_is_exp_of_flux():
    c = horizontal_lift(load_patch("xdy"), circle(r=0.4), steps=400)
    flux = math.pi * 0.4 ** 2  # integral of x dy over the counter-clockwise circle
    assert np.allclose(c.as_matrices()[-1, 0, 0], np.exp(-1j * flux), atol=1e-9)


def test_gauge_change_preserves_trace():
    P = load_patch("su2-test")

    def s(x, y):
        return x * y + 0.3 * x ** 2

    def gauge(Ai, ds):
        def A(x, y):
            g = qexp(s(x, y)[..., None] * np.array([0.0, 0.0, 1.0]))
            a = np.concatenate([np.zeros(np.shape(x) + (1,)), Ai(x, y)], axis=-1)
            conj = qmul(qmul(qinv(g), a), g)[..., 1:]
            return conj - ds(x, y)[..., None] * np.array([0.0, 0.0, 1.0])
        return A

    Q = ConnectionPatch("su2", gauge(P.A_x, lambda x, y: y + 0.6 * x),
                        gauge(P.A_y, lambda x, y: x + 0 * y), normalized=False)
    a = horizontal_lift(P, circle(), steps=400).as_matrices()[-1]
    b = horizontal_lift(Q, circle(), steps=400).as_matrices()[-1]
    assert abs(np.trace(a) - np.trace(b)) < 1e-8
    assert abs(np.trace(a) - 2) > 1e-3  # the loop sees curvature


def test_commutator_loop_trivial_cases():
    P = load_patch("xdy")
    assert np.array_equal(commutator_loop_holonomy(P, X, Y, 0.0), [1, 0, 0, 0])
    assert np.allclose(commutator_loop_holonomy(load_patch("zero-su2"), X, Y, 0.3),
                       [1, 0, 0, 0])
    assert np.allclose(commutator_curve(X, Y, (0, 0), np.linspace(0, 0.5, 5)), 0, atol=1e-14)


@pytest.mark.parametrize("t", [0.05, 0.1, 0.3])
def test_commutator_loop_u1_closed_form(t):
    beta = commutator_loop_holonomy(load_patch("xdy"), X, Y, t)
    assert np.allclose(beta, [math.cos(t * t), -math.sin(t * t), 0, 0], atol=1e-12)


def test_second_derivative_reports():
    zero = verify_second_derivative(load_patch("zero-su2"), X, Y)
    assert np.allclose(zero.beta_second, 0) and zero.first_derivative_norm == 0
    for name in ("xdy", "su2-test"):
        r = verify_second_derivative(load_patch(name), X, Y)
        assert r.passes(1e-3, 1e-6), r.to_json()
        assert r.sign == -1
        assert json.loads(json.dumps(r.to_json()))["matching_ordering"] == "2R(w,v)"


def test_rotated_fields():
    def U(x, y):
        return np.full(np.shape(x), 0.6), np.full(np.shape(x), 0.8)

    def W(x, y):
        return np.full(np.shape(x), -0.8), np.full(np.shape(x), 0.6)

    r = verify_second_derivative(load_patch("su2-test"), U, W)
    assert r.passes(1e-3, 1e-6)


def test_patch_validation():
    with pytest.raises(ValueError):
        patch_from_expressions("u1", ["1"], ["0"])
    with pytest.raises(StepOutOfPatch):
        patch_from_expressions("u1", ["0"], ["x"], base_point=(2, 0))
    with pytest.raises(StepOutOfPatch):
        horizontal_lift(load_patch("xdy"), circle(r=2.0))
    with pytest.raises(ValueError):
        load_patch("xdy", group="su2")


def test_load_patch_inline_and_file(tmp_path):
    data = {"group": "u1", "A_x": ["-y/2"], "A_y": ["x/2"], "name": "sym"}
    P = load_patch(json.dumps(data))
    path = tmp_path / "patch.json"
    path.write_text(json.dumps(data))
    Q = load_patch(str(path))
    assert P.name == Q.name == "sym"
    assert curvature(P, (0.1, 0.1), (1, 0), (0, 1)) == pytest.approx([1.0])
