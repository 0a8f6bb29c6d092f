import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial.transform import Rotation

from locomanip.constraints import ContactSurface, cone_rows, stack

FLAT = ContactSurface(0.6)


def feasible(surface, F, tol=1e-12):
    C, lo, hi = cone_rows(surface)
    v = C @ F
    return bool(np.all(v >= lo - tol) and np.all(v <= hi + tol))


def test_rows_flat_ground():
    C, lo, hi = cone_rows(FLAT)
    assert np.allclose(C, [[-1, 0, 0.6], [0, -1, 0.6], [0, 1, 0.6], [1, 0, 0.6], [0, 0, 1]], atol=1e-15)
    assert np.array_equal(lo, [0, 0, 0, 0, 1])
    assert np.array_equal(hi, [np.inf] * 4 + [120])


def test_row_values():
    C, _, _ = cone_rows(FLAT)
    assert np.allclose(C @ [0, 0, 10], [6, 6, 6, 6, 10])
    assert feasible(FLAT, np.array([0.0, 0.0, 10.0]))
    assert math.isclose((C @ [7, 0, 10])[0], -1.0, abs_tol=1e-12)
    assert not feasible(FLAT, np.array([7.0, 0.0, 10.0]))


def test_frame_validation():
    with pytest.raises(ValueError):
        cone_rows(ContactSurface(0.6, n=[0, 0, 1], t1=[1, 1, 0], t2=[0, 1, 0]))
    with pytest.raises(ValueError):
        cone_rows(ContactSurface(0.0))
    with pytest.raises(ValueError):
        cone_rows(ContactSurface(0.6, f_min=10, f_max=5))


def test_stack_shapes():
    four = stack([FLAT] * 4, [True] * 4)
    assert four.C.shape == (20, 12) and four.stance_index_map == (0, 1, 2, 3)
    two = stack([FLAT] * 4, [True, False, False, True])
    assert two.C.shape == (10, 6) and two.stance_index_map == (0, 3)
    assert not np.any(two.C[0:5, 3:6]) and not np.any(two.C[5:10, 0:3])
    one = stack([FLAT, ContactSurface(0.3), FLAT, FLAT], [False, True, False, False])
    C, lo, hi = cone_rows(ContactSurface(0.3))
    assert np.array_equal(one.C, C) and np.array_equal(one.d_lo, lo) and np.array_equal(one.d_hi, hi)
    with pytest.raises(ValueError):
        stack([FLAT] * 4, [False] * 4)


def test_slope_frame():
    s = ContactSurface.on_slope(0.6, math.radians(20))
    s.validate()
    # pure normal push on the slope is feasible; pure vertical weight support is not at low mu
    assert feasible(s, 30 * s.n)
    assert not feasible(ContactSurface.on_slope(0.3, math.radians(20)), np.array([0.0, 0.0, 30.0]))


@settings(max_examples=60)
@given(st.floats(0.05, 2.0), st.floats(1.0, 120.0))
def test_normal_forces_always_feasible(mu, c):
    assert feasible(ContactSurface(mu), c * np.array([0.0, 0.0, 1.0]), tol=1e-9)


@settings(max_examples=60)
@given(st.floats(0.05, 1.5), st.floats(-3, 3), st.floats(-3, 3), st.floats(1.0, 100.0),
       st.integers(0, 2 ** 31))
def test_pyramid_between_cones_and_rotation_invariant(mu, a, b, fn, seed):
    F = np.array([a * fn * mu / 3, b * fn * mu / 3, fn])
    ft = math.hypot(F[0], F[1])
    ok = feasible(ContactSurface(mu), F, tol=1e-9)
    if ok:
        assert ft <= mu * math.sqrt(2) * fn + 1e-9
    if ft <= mu * fn * (1 - 1e-9):
        assert ok
    R = Rotation.random(random_state=seed % (2 ** 32)).as_matrix()
    rotated = ContactSurface(mu, R @ [0, 0, 1], R @ [1, 0, 0], R @ [0, 1, 0])
    C, lo, hi = cone_rows(rotated)
    v = C @ (R @ F)
    assert ok == bool(np.all(v >= lo - 1e-9) and np.all(v <= hi + 1e-9))
