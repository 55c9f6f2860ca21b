import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qrgreen.core_maps import (OVERFLOW_GUARD, H_apply, H_iterate, MapOverflowError, MapParams,
                               eigenvalues, h_apply, jacobian, normalize_theta, stretch_matrix)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
points = st.builds(complex, finite, finite)
stretches = st.floats(0.1, 10)
angles = st.floats(-math.pi / 2, math.pi / 2).filter(lambda t: t > -math.pi / 2)


def rotation(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def as_vec(z):
    return np.array([z.real, z.imag])


# -- h and H ------------------------------------------------------------------

def test_h_identity_when_unstretched():
    for z in (0j, 1 + 2j, -3.5 + 0.25j):
        assert h_apply(1.0, 0.7, z) == z


def test_h_stretches_real_axis():
    assert h_apply(3.0, 0.0, 2 + 5j) == 6 + 5j


def test_h_rotated_example():
    assert abs(h_apply(2.0, math.pi / 2, 1 + 1j) - (1 + 2j)) < 1e-15


@given(stretches, angles, points)
def test_h_matches_rotation_oracle(K, theta, z):
    # h = rot(theta) diag(K, 1) rot(-theta)
    m = rotation(theta) @ np.diag([K, 1.0]) @ rotation(-theta)
    w = m @ as_vec(z)
    assert abs(h_apply(K, theta, z) - complex(*w)) <= 1e-12 * (1 + K * abs(z))
    assert np.allclose(stretch_matrix(K, theta), m, atol=1e-14)


def test_H_examples():
    p = MapParams(5.0, 0.0, -0.1)
    for x in (-0.3, 0.0, 0.0863, 1.7):
        assert H_apply(p, complex(x)) == pytest.approx(25 * x * x - 0.1, abs=1e-15)
    assert H_apply(MapParams(3.0, 0.4, 2 - 1j), 0j) == 2 - 1j
    for z in (1 + 1j, -0.5 + 2j):
        assert H_apply(MapParams(1.0, 0.0, 0.3j), z) == z * z + 0.3j


@settings(max_examples=200)
@given(stretches, angles, points, st.floats(0.01, 5))
def test_H0_is_homogeneous(K, theta, z, r):
    p = MapParams(K, theta)
    assert abs(H_apply(p, r * z) - r * r * H_apply(p, z)) <= 1e-12 * (1 + r * r) * (1 + K * abs(z)) ** 2


def test_H_overflow_guard():
    p = MapParams(2.0)
    with pytest.raises(MapOverflowError):
        H_apply(p, complex(math.sqrt(OVERFLOW_GUARD)))
    with pytest.raises(MapOverflowError):
        H_iterate(p, 10.0, 20)


# -- params ---------------------------------------------------------------------

@pytest.mark.parametrize("bad", [dict(K=0.0), dict(K=-1.0), dict(K=math.inf), dict(K=1, theta=2.0),
                                 dict(K=1, theta=-math.pi / 2), dict(K=1, c=complex(math.nan, 0))])
def test_params_validation(bad):
    with pytest.raises(ValueError):
        MapParams(**bad)


@given(st.floats(-20, 20))
def test_normalize_theta_range_and_period(t):
    n = normalize_theta(t)
    assert -math.pi / 2 < n <= math.pi / 2 + 1e-15
    assert abs(cmath.exp(2j * n) - cmath.exp(2j * t)) < 1e-12


@settings(max_examples=100)
@given(st.floats(0.1, 0.99), angles, points, points)
def test_small_K_conjugation(K, theta, c, z):
    p = MapParams(K, theta, c)
    q, s = p.conjugated()
    assert q.K == pytest.approx(1 / K) and s == pytest.approx(K * K)
    # H_p(z) = H_q(s z) / s
    assert abs(H_apply(p, z) - H_apply(q, s * z) / s) <= 1e-10 * (1 + abs(z)) ** 2 * (1 + abs(c))


def test_conjugation_worked_example():
    q, s = MapParams(0.5, 0.0, -1.5 - 0.5j).conjugated()
    assert (q.K, s) == (2.0, 0.25)
    assert q.theta == pytest.approx(math.pi / 2)
    assert q.c == pytest.approx(-3 / 8 - 1j / 8)


# -- Jacobian ---------------------------------------------------------------------

def test_jacobian_examples():
    assert np.array_equal(jacobian(MapParams(4.0, 0.3, 1j), 0j), np.zeros((2, 2)))
    assert np.array_equal(jacobian(MapParams(2.0, 0.0, 5.0), 1 + 1j), [[8, -2], [4, 4]])
    z = 0.3 - 1.2j
    assert np.allclose(jacobian(MapParams(1.0, 0.9, 0j), z),
                       [[2 * z.real, -2 * z.imag], [2 * z.imag, 2 * z.real]], atol=1e-14)


@settings(max_examples=100)
@given(stretches, angles, points)
def test_jacobian_matches_finite_differences(K, theta, z):
    p = MapParams(K, theta, 0.2 - 0.1j)
    e = 1e-6 * (1 + abs(z))
    cols = [(H_apply(p, z + d) - H_apply(p, z - d)) / (2 * e) for d in (e, 1j * e)]
    fd = np.array([[cols[0].real, cols[1].real], [cols[0].imag, cols[1].imag]])
    scale = 1 + np.abs(fd).max()
    assert np.allclose(jacobian(p, z), fd, atol=1e-5 * scale)


# -- eigenvalues -------------------------------------------------------------------

def test_eigenvalues_saddle_example():
    x = (1 + math.sqrt(11)) / 50
    l1, l2 = eigenvalues(jacobian(MapParams(5.0, 0.0, -0.1), complex(x)))
    assert l1.real == pytest.approx(0.863, abs=5e-4)
    assert l2.real == pytest.approx(4.317, abs=5e-4)
    assert l1.imag == 0 and l2.imag == 0


def test_eigenvalues_unit_circle_example():
    K = 3.0
    l1, l2 = eigenvalues(jacobian(MapParams(K), complex(0, 1 / (2 * math.sqrt(K)))))
    assert (l1.real, l2.real) == pytest.approx((0.0, 0.0), abs=1e-15)
    assert sorted((l1.imag, l2.imag)) == pytest.approx([-1, 1])
    assert abs(l1) == pytest.approx(1.0) and abs(l2) == pytest.approx(1.0)
    assert eigenvalues(np.eye(2)) == (1, 1)


@given(st.lists(st.floats(-50, 50), min_size=4, max_size=4))
def test_eigenvalues_match_characteristic_polynomial(entries):
    m = np.array(entries).reshape(2, 2)
    l1, l2 = eigenvalues(m)
    assert abs(l1) <= abs(l2)
    ref = np.roots([1.0, -np.trace(m), np.linalg.det(m)])
    scale = 1 + np.abs(m).max()
    got = sorted([l1, l2], key=lambda z: (round(z.real, 6), z.imag))
    ref = sorted(ref, key=lambda z: (round(z.real, 6), z.imag))
    # double roots are ill-conditioned: compare symmetric functions instead
    assert abs((l1 + l2) - np.trace(m)) <= 1e-9 * scale
    assert abs(l1 * l2 - np.linalg.det(m)) <= 1e-9 * scale * scale
    if abs(ref[0] - ref[1]) > 1e-3 * scale:
        assert np.allclose(got, ref, atol=1e-8 * scale)
