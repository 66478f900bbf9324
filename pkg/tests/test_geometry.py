import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ball_points
from npball.geometry import (
    Automorphism,
    BoundaryError,
    DimensionError,
    axis_unitary,
    ball_point,
    compose,
    composition_bound,
    kernel_eval,
    mobius_eval,
    mobius_factor,
    sphere_point,
    sqnorm,
)


def test_spot_values():
    assert mobius_eval(0.5, 0.3)[0] == pytest.approx(0.2 / 0.85, abs=1e-15)
    assert mobius_factor(0.5, 0.3, 1.0)[()] == pytest.approx(0.75 * 0.91 / 0.85**2, rel=1e-14)
    assert composition_bound([0.5]) == pytest.approx(3.0)
    assert composition_bound([0.5, 0.0]) == pytest.approx(3.0**1.5)
    assert composition_bound([0.0, 0.0]) == 1.0


def test_phi_zero_is_minus_identity():
    z = np.array([0.1 + 0.2j, -0.3j])
    assert np.allclose(mobius_eval(np.zeros(2), z), -z)


@given(ball_points(1), ball_points(1))
def test_involution_n1(a, z):
    assert np.allclose(mobius_eval(a, mobius_eval(a, z)), z, atol=1e-10)


@given(ball_points(2), ball_points(2))
def test_involution_n2(a, z):
    w = mobius_eval(a, z)
    assert np.allclose(mobius_eval(a, w), z, atol=1e-10)


@given(ball_points(2, 0.99))
def test_swaps_zero_and_a(a):
    assert np.allclose(mobius_eval(a, np.zeros(2)), a, atol=1e-14)
    assert np.allclose(mobius_eval(a, a), 0, atol=1e-10)


@given(ball_points(2), ball_points(2))
def test_mobius_identity(a, z):
    direct = 1 - sqnorm(mobius_eval(a, z))
    assert mobius_factor(a, z, 1.0) == pytest.approx(direct, rel=1e-8, abs=1e-12)


@given(ball_points(1), ball_points(1), ball_points(1))
def test_schwarz_pick(a, z, w):
    # automorphisms preserve the pseudo-hyperbolic distance
    d = lambda x, y: abs(mobius_eval(x, y)[0])
    fz, fw = mobius_eval(a, z), mobius_eval(a, w)
    if sqnorm(z - w) == 0:
        return
    assert d(fz, fw) == pytest.approx(d(z, w), abs=1e-9)


def _real_jacobian(a, z, h=1e-6):
    n = z.size
    cols = []
    for k in range(n):
        e = np.zeros(n, dtype=complex)
        e[k] = h
        cols.append((mobius_eval(a, z + e) - mobius_eval(a, z - e)) / (2 * h))
    return abs(np.linalg.det(np.array(cols).T)) ** 2


@given(ball_points(1, 0.8), ball_points(1, 0.8))
def test_kernel_is_jacobian_n1(a, z):
    assert abs(kernel_eval(a, z)) ** 2 == pytest.approx(_real_jacobian(a, z), rel=1e-6)


@given(ball_points(2, 0.8), ball_points(2, 0.8))
def test_kernel_is_jacobian_n2(a, z):
    assert abs(kernel_eval(a, z)) ** 2 == pytest.approx(_real_jacobian(a, z), rel=1e-6)


@given(ball_points(3, 0.99))
def test_axis_unitary(v):
    u = axis_unitary(v)
    assert np.allclose(u @ u.conj().T, np.eye(3), atol=1e-12)
    if np.linalg.norm(v) > 0:
        assert np.allclose(u[:, 0], v / np.linalg.norm(v))


@given(ball_points(2, 0.9), ball_points(2, 0.9), ball_points(2, 0.9))
def test_compose_matches_pointwise(a, b, z):
    phi, psi = Automorphism.involution(a), Automorphism(b, axis_unitary(np.array([1, 1j])) )
    c = compose(phi, psi)
    assert np.allclose(c(z), phi(psi(z)), atol=1e-9)


@given(ball_points(2, 0.9), ball_points(2, 0.9))
def test_inverse(b, z):
    phi = Automorphism(b, axis_unitary(np.array([0.6, 0.8j])))
    assert np.allclose(phi.inverse_eval(phi(z)), z, atol=1e-10)
    assert np.allclose(phi.inverse()(phi(z)), z, atol=1e-9)


def test_identity_and_rotation():
    z = np.array([0.3, -0.2j])
    assert np.allclose(Automorphism.identity(2)(z), z)
    u = axis_unitary(np.array([1j, 1.0]))
    assert np.allclose(Automorphism.rotation(u)(z), u @ z)


def test_errors():
    with pytest.raises(BoundaryError):
        ball_point([1.0])
    with pytest.raises(BoundaryError):
        sphere_point([0.5])
    with pytest.raises(DimensionError):
        mobius_eval([0.1, 0.2], np.array([0.1]))
    with pytest.raises(DimensionError):
        compose(Automorphism.identity(1), Automorphism.identity(2))
    with pytest.raises(ValueError):
        Automorphism(np.zeros(2), np.ones((2, 2)))
    with pytest.raises(ValueError):
        mobius_factor(0.1, 0.2, 0.0)


def test_near_boundary_factor_is_stable():
    a = np.array([1 - 1e-9])
    z = np.array([1 - 1e-9])
    assert mobius_factor(a, z, 1.0) == pytest.approx(1.0, rel=1e-6)
