import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import ball_points
from npball.functions import (
    BlackBox,
    GapSeries,
    Polynomial,
    as_polynomial,
    dilate,
    generator_constants,
    kernel_function,
    monomial_generator,
    multiply,
    sphere_monomial_weight,
    truncate,
    weighted_compose,
)
from npball.geometry import Automorphism, DimensionError, kernel_eval, mobius_eval

coeff = st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False)


def test_polynomial_eval_and_degree():
    f = Polynomial({(0,): 1, (1,): 2, (3,): 1})
    assert f.degree == 3
    assert f(0.5)[()] == pytest.approx(1 + 1 + 0.125)
    g = Polynomial({(1, 2): 1j, (0, 0): 2})
    assert g(np.array([0.5, 0.5]))[()] == pytest.approx(2 + 0.125j)
    assert Polynomial({(0,): 0}, 1).is_zero()


@given(st.lists(coeff, min_size=1, max_size=9), ball_points(1, 0.99))
def test_dense_eval_matches_direct(cs, z):
    f = Polynomial.from_coefficients(cs)
    direct = sum(c * z[0] ** k for k, c in enumerate(cs))
    assert f(z)[()] == pytest.approx(direct, abs=1e-10)


def test_lacunary_eval_matches_direct():
    f = Polynomial({(2**k,): 1 for k in range(10)}, 1)
    z = np.array([0.999 * np.exp(0.3j)])
    direct = sum(z[0] ** (2**k) for k in range(10))
    assert f(z)[()] == pytest.approx(direct, rel=1e-12)


def test_arithmetic():
    z = Polynomial({(1,): 1})
    f = (1 + z) * (1 - z)
    assert f == Polynomial({(0,): 1, (2,): -1})
    assert (2 * z - z) == z
    assert -z == Polynomial({(1,): -1})
    with pytest.raises(DimensionError):
        z * Polynomial({(1, 0): 1})


def test_json_round_trip():
    f = Polynomial({(0, 1): 1 + 2j, (3, 0): -0.5})
    assert Polynomial.from_json(f.to_json()) == f


def test_dilate():
    f = Polynomial({(0,): 1, (2,): 1})
    assert dilate(f, 0.5) == Polynomial({(0,): 1, (2,): 0.25})
    with pytest.raises(ValueError):
        dilate(f, 1.5)
    b = BlackBox(lambda z: z[..., 0] ** 2)
    assert dilate(dilate(b, 0.5), 0.5)(0.8)[()] == pytest.approx(0.04)


@given(ball_points(1, 0.9), ball_points(1, 0.9))
def test_weighted_composition(a, z):
    f = Polynomial({(0,): 1, (2,): 1j})
    w = weighted_compose(f, Automorphism.involution(a))
    expected = kernel_eval(a, z) * f(mobius_eval(a, z))
    assert w(z)[()] == pytest.approx(expected[()], abs=1e-12)


def test_multiply_keeps_coefficients():
    u = Polynomial({(1,): 1})
    assert as_polynomial(multiply(u, u)) == Polynomial({(2,): 1})
    k = kernel_function([0.5])
    assert multiply(u, k)(0.2)[()] == pytest.approx(0.2 * kernel_eval([0.5], [0.2])[()])


def test_generators_have_unit_sup():
    gen = monomial_generator(2)
    for k in (1, 2, 5, 8):
        sup, l2 = generator_constants(k, 2)
        assert sup == pytest.approx(1.0)
        theta = np.linspace(0, np.pi / 2, 20001)
        pts = np.stack([np.cos(theta), np.sin(theta)], -1).astype(complex)
        assert np.max(np.abs(gen(k)(pts))) == pytest.approx(1.0, abs=1e-6)
    assert sphere_monomial_weight((1, 1)) == pytest.approx(1 / 6)


def test_gap_series():
    s = GapSeries(np.ones(5), 2 ** np.arange(5))
    assert s.degree == 16
    assert truncate(s, 3) == Polynomial({(1,): 1, (2,): 1, (4,): 1})
    assert s(0.5)[()] == pytest.approx(sum(0.5 ** (2**k) for k in range(5)))
    assert GapSeries(np.ones(5), 2 ** np.arange(5), K=2).tail_bound(0.5) == pytest.approx(
        0.5**4 + 0.5**8 + 0.5**16)
    with pytest.raises(ValueError):
        GapSeries([1, 1], [2, 3], c=2.0)
    with pytest.raises(ValueError):
        GapSeries([1], [1], c=1.0)
    with pytest.raises(ValueError):
        truncate(s, 9)
