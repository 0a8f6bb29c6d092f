import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from locomanip.discretize import zoh
from locomanip.dynamics import RobotModel, RobotState, build_continuous, build_extended
from oracles import random_stable


def test_nilpotent_zero_drift():
    B = np.array([[1.0, 2.0], [3.0, -4.0]])
    dd = zoh(np.zeros((2, 2)), B, 0.03)
    assert np.array_equal(dd.A_d, np.eye(2))
    assert np.allclose(dd.B_d, 0.03 * B, rtol=1e-12, atol=0)


def test_scalar_closed_form():
    dd = zoh([[-1.0]], [[2.0]], 0.1)
    assert math.isclose(dd.A_d[0, 0], math.exp(-0.1), rel_tol=1e-12)
    assert math.isclose(dd.B_d[0, 0], 2 * (1 - math.exp(-0.1)), rel_tol=1e-12)
    assert math.isclose(dd.A_d[0, 0], 0.904837, abs_tol=5e-7)
    assert math.isclose(dd.B_d[0, 0], 0.190325, abs_tol=5e-7)


@pytest.mark.parametrize("h", [0.001, 0.03, 0.5, 2.0])
def test_double_integrator_closed_form(h):
    dd = zoh([[0.0, 1.0], [0.0, 0.0]], [0.0, 1.0], h)
    assert np.allclose(dd.A_d, [[1.0, h], [0.0, 1.0]], rtol=1e-12, atol=1e-15)
    assert np.allclose(dd.B_d[:, 0], [h * h / 2, h], rtol=1e-12, atol=0)


def test_rejects_bad_inputs():
    with pytest.raises(ValueError):
        zoh(np.eye(2), np.ones((2, 1)), 0.0)
    with pytest.raises(ValueError):
        zoh(np.eye(2), np.ones((3, 1)), 0.1)
    with pytest.raises(ValueError):
        zoh([[np.nan]], [[1.0]], 0.1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.005, 0.2))
def test_semigroup(seed, h):
    rng = np.random.default_rng(seed)
    A = random_stable(rng, 4)
    B = rng.normal(size=(4, 2))
    one = zoh(A, B, h)
    two = zoh(A, B, 2 * h)
    assert np.allclose(two.A_d, one.A_d @ one.A_d, atol=1e-9, rtol=1e-9)
    # held input over two steps equals one double-length step
    assert np.allclose(two.B_d, one.A_d @ one.B_d + one.B_d, atol=1e-9, rtol=1e-9)


def test_matches_integrated_response():
    # oracle: explicit RK4 with many substeps on the continuous system
    rng = np.random.default_rng(3)
    A = random_stable(rng, 3)
    B = rng.normal(size=(3, 2))
    x0, u, h = rng.normal(size=3), rng.normal(size=2), 0.3
    x = x0.copy()
    n = 3000
    dt = h / n
    f = lambda z: A @ z + B @ u
    for _ in range(n):
        k1 = f(x); k2 = f(x + dt / 2 * k1); k3 = f(x + dt / 2 * k2); k4 = f(x + dt * k3)
        x = x + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
    dd = zoh(A, B, h)
    assert np.allclose(dd.A_d @ x0 + dd.B_d @ u, x, rtol=1e-10, atol=1e-12)


def test_extended_model_has_no_spurious_fill():
    model = RobotModel()
    feet = model.hip_offsets + [0.0, 0.0, -0.3]
    cd = build_continuous(model, RobotState.at_rest(), feet)
    ext = build_extended(cd, model)
    dd = zoh(ext.D_bar, ext.H_bar, 0.03)
    # F_b and gravity states stay constant; nothing drives them
    assert np.array_equal(dd.A_d[12:, 12:], np.eye(4))
    assert not np.any(dd.A_d[12:, :12]) and not np.any(dd.B_d[12:])
    # positions are not driven back into velocities
    assert not np.any(dd.A_d[6:12, 0:6])
    # polynomial series terminates: velocity gets exactly dt times the gravity direction
    assert np.allclose(dd.A_d[6:9, 12], 0.03 * np.array([0, 0, -1]), atol=1e-15)
    assert np.allclose(dd.A_d[0:3, 12], 0.03 ** 2 / 2 * np.array([0, 0, -1]), atol=1e-15)
