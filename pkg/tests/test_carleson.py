import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import dblquad

from npball.carleson import TubeGrid, carleson_constant, carleson_transform, tube_measure, vanishing_test
from npball.functions import Polynomial
from npball.gap import separation_witnesses
from npball.integrate import kernel_integral
from npball.norms import norm_a2p

ONE = Polynomial.constant(1.0)
F = Polynomial({(0,): 1, (1,): 2, (3,): 1})

# Lens integrals {|z| < 1, |1 - z| < r} computed with scipy dblquad using the
# exact boundary curves as limits (tolerance 1e-12).
ONE_P1_R025 = 0.00568600742884865
F_P1_R05_XI07 = 0.20676401892571633
ONE_N2_P05_R05 = 0.03413938839021124


def _lens_oracle(g, r):
    lo = max(1 - r, -1.0)
    yl = lambda x: min(math.sqrt(max(1 - x * x, 0)), math.sqrt(max(r * r - (1 - x) ** 2, 0)))
    return dblquad(lambda y, x: g(x + 1j * y), lo, 1, lambda x: -yl(x), yl, epsabs=1e-13, epsrel=1e-11)[0]


def test_frozen_tube_values():
    assert tube_measure(ONE, 1.0, 0.25, 1.0) == pytest.approx(ONE_P1_R025, rel=1e-10)
    assert tube_measure(F, 1.0, 0.5, np.exp(0.7j)) == pytest.approx(F_P1_R05_XI07, rel=1e-10)
    e1 = np.array([1.0, 0.0])
    assert tube_measure(Polynomial.constant(1.0, 2), 0.5, 0.5, e1) == pytest.approx(ONE_N2_P05_R05, rel=1e-10)


@pytest.mark.parametrize("p,r", [(0.3, 1.5), (2.5, 0.1)])
def test_live_oracle(p, r):
    xi = np.exp(-1.1j)
    g = lambda z: abs(F(xi * z)[()]) ** 2 * (1 - abs(z) ** 2) ** p / math.pi
    assert tube_measure(F, p, r, xi) == pytest.approx(_lens_oracle(g, r), rel=1e-8)


def test_n2_rotation_invariance():
    one = Polynomial.constant(1.0, 2)
    a = tube_measure(one, 1.0, 0.3, np.array([1.0, 0.0]))
    b = tube_measure(one, 1.0, 0.3, np.array([0.6, 0.8j]))
    assert a == pytest.approx(b, rel=1e-12)


def test_whole_ball():
    for r in (2.0, 5.0):
        assert tube_measure(F, 0.7, r, 1.0) == pytest.approx(norm_a2p(F, 0.7).value ** 2, rel=1e-12)
    # continuity as the tube fills the ball
    assert tube_measure(F, 0.7, 1.999, 1.0) == pytest.approx(norm_a2p(F, 0.7).value ** 2, rel=1e-4)


def test_zero_and_errors():
    zero = Polynomial({}, 1)
    assert tube_measure(zero, 1.0, 0.5, 1.0) == 0.0
    assert carleson_constant(zero, 1.0).sup_quotient == 0.0
    assert vanishing_test(zero, 1.0) == "vanishing"
    assert carleson_transform(zero, 1.0, 1.0, 0.5) == 0.0
    with pytest.raises(ValueError):
        tube_measure(F, 1.0, 0.0, 1.0)
    with pytest.raises(ValueError):
        tube_measure(F, 1.0, 0.5, 0.5)
    with pytest.raises(ValueError):
        carleson_transform(F, 1.0, 0.0, 0.5)


@settings(max_examples=25)
@given(st.floats(0.001, 1.9), st.floats(0.01, 0.99), st.floats(0, 2 * math.pi), st.sampled_from([0.25, 1.0, 2.0]))
def test_tube_monotone(r, frac, theta, p):
    xi = np.exp(1j * theta)
    small, big = tube_measure(F, p, r * frac, xi), tube_measure(F, p, r, xi)
    assert small <= big + 1e-9 * big


def test_grid():
    g = TubeGrid()
    assert np.all(np.diff(g.radii) < 0) and g.radii[0] == 0.5 and g.radii[-1] == 2.0**-10
    assert g.points(1).shape == (16, 1) and g.points(2).shape == (32, 2)
    assert np.allclose(np.linalg.norm(g.points(2), axis=1), 1, atol=1e-12)
    with pytest.raises(ValueError):
        TubeGrid(j_min=3, j_max=2)


def test_constant_function_scaling():
    rep = carleson_constant(ONE, 1.0)
    assert rep.sup_quotient == rep.quotients.max()
    col = rep.quotients[:, 0]
    assert np.all(np.diff(col) < 0)
    # quotient ~ r^(n+1) = r^2 for small tubes
    assert col[-1] / col[-2] == pytest.approx(0.25, rel=0.01)
    assert rep.verdict == "vanishing"


def test_reports():
    rep = carleson_constant(F, 1.0, TubeGrid(1, 3, directions=4))
    d = json.loads(json.dumps(rep.to_dict()))
    assert d["sup_quotient"] == rep.sup_quotient
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0] == ["j", "i", "r", "xi", "mass", "quotient"] and len(rows) == 1 + 3 * 4


def test_truncated_witness_grows():
    f1, _ = separation_witnesses(1, 0.5, 1.0)
    small = carleson_constant(f1.polynomial(4), 1.0).sup_quotient
    big = carleson_constant(f1.polynomial(8), 1.0).sup_quotient
    assert big > small


def test_transform():
    mass = kernel_integral(ONE, [0.0], 0.0, 1.0)
    assert carleson_transform(ONE, 1.0, 1.0, 0.0) == pytest.approx(mass)
    assert carleson_transform(ONE, 1.0, 3.0, 0.0) == pytest.approx(mass)
    vals = [carleson_transform(ONE, 1.0, 1.0, t) for t in (0.5, 0.9, 0.99)]
    assert vals[0] > vals[1] > vals[2]
