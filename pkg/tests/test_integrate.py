import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import beta, hyp2f1

from conftest import ball_points
from npball.functions import BlackBox, Polynomial, weighted_compose
from npball.geometry import Automorphism, NumericError
from npball.integrate import (
    QuadSpec,
    SeriesTruncationError,
    ball_integral,
    kernel_integral,
    kernel_series,
    np_integral,
    radial_profile,
    radial_rule,
    sphere_kernel_integral,
    sphere_rule,
)

SPECTRAL = QuadSpec(backend="spectral")
QUAD = QuadSpec(backend="quadrature")

# Values of the defining integrals computed independently with scipy's
# adaptive dblquad in polar coordinates (tolerance 1e-13).
F = Polynomial({(0,): 1, (1,): 2, (3,): 1})
A = np.array([0.5 + 0.2j])
I_F_A_P07 = 1.6086101534953723  # int |F|^2 (1-|phi_A|^2)^0.7 dA/pi
J_F_A = 1.2303212401996926  # int |F|^2 |1-z conj(A)|^-1.2 (1-|z|^2)^1.3 dA/pi


@pytest.mark.parametrize("spec", [SPECTRAL, QUAD])
def test_frozen_oracle_values(spec):
    assert np_integral(F, A, 0.7, spec) == pytest.approx(I_F_A_P07, rel=1e-12)
    assert kernel_integral(F, A, 0.6, 1.3, spec) == pytest.approx(J_F_A, rel=1e-12)


@pytest.mark.parametrize("n,w", [(1, 0.0), (1, 0.7), (2, 1.5), (3, 0.25)])
def test_radial_rule_moments(n, w):
    t, wt = radial_rule(20, w, n)
    for k in range(8):
        assert np.sum(t**k * wt) == pytest.approx(beta(n + k, w + 1), rel=1e-12)


def test_sphere_rules_integrate_monomials():
    for n in (1, 2):
        z, w = sphere_rule(n, QuadSpec())
        assert w.sum() == pytest.approx(1.0)
        alpha = (2,) * n
        vals = np.abs(np.prod(z ** np.array(alpha), axis=-1)) ** 2
        expected = math.factorial(n - 1) * 2**n / math.factorial(n - 1 + 2 * n)
        assert vals @ w == pytest.approx(expected, rel=1e-12)
    with pytest.raises(ValueError):
        sphere_rule(3, QuadSpec())


def test_ball_integral_beta():
    for n in (1, 2):
        est = ball_integral(lambda z: np.sum(np.abs(z) ** 2, -1), n, QuadSpec(), weight=1.0)
        # int |z|^2 (1-|z|^2) dV = n B(n+1, 2)
        assert est.value == pytest.approx(n * beta(n + 1, 2), rel=1e-12)
        assert est.error < 1e-10


def test_monte_carlo_seeded():
    spec = QuadSpec(backend="montecarlo", seed=5, mc_samples=20000)
    g = lambda z: np.ones(z.shape[0])
    a, b = ball_integral(g, 3, spec, 1.0), ball_integral(g, 3, spec, 1.0)
    assert a == b
    assert a.value == pytest.approx(0.25, abs=5 * a.error + 1e-3)
    with pytest.raises(ValueError):
        QuadSpec(backend="montecarlo")
    with pytest.raises(ValueError):
        ball_integral(g, 3, QuadSpec(), 1.0)


@given(
    st.lists(st.complex_numbers(max_magnitude=2, allow_nan=False), min_size=1, max_size=9),
    ball_points(1, 0.9),
    st.sampled_from([0.25, 0.5, 1.0, 1.5]),
)
def test_backends_agree_n1(cs, a, p):
    f = Polynomial.from_coefficients(cs)
    if f.is_zero():
        return
    s, q = np_integral(f, a, p, SPECTRAL), np_integral(f, a, p, QUAD)
    assert s == pytest.approx(q, rel=1e-9, abs=1e-14)


@settings(max_examples=8)
@given(ball_points(2, 0.9), st.sampled_from([0.25, 1.0, 1.5]))
def test_backends_agree_n2(a, p):
    f = Polynomial({(0, 0): 1, (1, 2): 0.5j, (3, 1): -0.7, (0, 4): 0.2}, 2)
    s, q = np_integral(f, a, p, SPECTRAL), np_integral(f, a, p, QUAD)
    assert s == pytest.approx(q, rel=1e-9)


@given(ball_points(1, 0.8), st.sampled_from([0.5, 1.0]))
def test_change_of_variables(a, p):
    # I_f(a) equals the A^2_p integral of k_a (f o phi_a)
    f = Polynomial({(0,): 1, (2,): 1j, (3,): 0.5})
    w = weighted_compose(f, Automorphism.involution(a))
    lhs = np_integral(f, a, p, SPECTRAL)
    rhs = kernel_integral(w, np.zeros(1), 0.0, p, QUAD.refined(2))
    assert lhs == pytest.approx(rhs, rel=1e-8)


@given(ball_points(1, 0.9))
def test_monotone_in_p(a):
    f = Polynomial({(0,): 1, (1,): -1, (4,): 0.3})
    vals = [np_integral(f, a, p) for p in (0.25, 0.5, 1.0, 1.5)]
    assert all(b <= x * (1 + 1e-12) for x, b in zip(vals, vals[1:]))


def test_constant_function():
    one = Polynomial.constant(1.0)
    for p in (0.5, 1.0, 2.0):
        assert np_integral(one, [0.0], p) == pytest.approx(1 / (p + 1))


def test_kernel_series_tail():
    for p, x in [(0.5, 0.9), (1.0, 0.99), (2.5, 0.95)]:
        c = kernel_series(p, x, tol=1e-12)
        k = np.arange(c.size)
        assert np.sum(c * x**k) == pytest.approx((1 - x) ** -p, rel=1e-10)
    with pytest.raises(SeriesTruncationError):
        kernel_series(1.0, 0.99999, max_terms=1000)


def test_spectral_rejects_black_box():
    b = BlackBox(lambda z: z[..., 0])
    with pytest.raises(TypeError):
        np_integral(b, [0.1], 1.0, SPECTRAL)
    assert np_integral(b, [0.1], 1.0) == pytest.approx(np_integral(Polynomial({(1,): 1}), [0.1], 1.0))


def test_non_finite_integrand():
    bad = BlackBox(lambda z: np.full(z.shape[:-1], np.nan))
    with pytest.raises(NumericError):
        np_integral(bad, [0.1], 1.0, QUAD)


def test_radial_profile():
    f = Polynomial({(1, 0): 1, (0, 1): 1j}, 2)
    prof = radial_profile(f)
    assert prof(0.5) == pytest.approx(0.25)


@pytest.mark.parametrize("n", [1, 2, 3])
@given(st.floats(0, 0.999), st.floats(0.01, 0.999), st.sampled_from([0.25, 0.5, 1.0]))
def test_sphere_kernel_closed_form(n, s, r, p):
    a = np.zeros(n, dtype=complex)
    a[0] = s
    exact = (1 - s * s) ** p * hyp2f1(p, p, n, (r * s) ** 2)
    assert sphere_kernel_integral(a, r, p) == pytest.approx(exact, rel=1e-9)


def test_quad_spec_round_trip():
    spec = QuadSpec(backend="quadrature", radial_nodes=32, seed=3)
    assert QuadSpec.from_json(spec.to_json()) == spec
    assert spec.refined(2).radial_nodes == 64
    with pytest.raises(ValueError):
        QuadSpec(backend="magic")
    with pytest.raises(ValueError):
        QuadSpec(radial_nodes=0)
