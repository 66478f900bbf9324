import csv
import io
import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gamma

from npball.gap import (
    GapSpec,
    block_count_bound,
    dyadic_blocks,
    dyadic_bracket,
    equivalence_report,
    gap_aq_rhs,
    gap_dyadic_blocks,
    gap_np_rhs,
    gap_np_series_value,
    membership_table,
    separation_witnesses,
    stirling_ratio,
)
from npball.norms import norm_np


def test_geometric_np_sum():
    s = gap_np_rhs(GapSpec(), 1.0, 12)
    assert s.value == pytest.approx(4 / 3, abs=1e-6)
    assert not s.divergent
    assert gap_np_series_value(GapSpec(), 1.0) == pytest.approx(4 / 3, rel=1e-15)


def test_witness_sums():
    f1, f2 = separation_witnesses(1, 0.5, 1.0)
    assert f1.b(4) == pytest.approx(2.0 ** np.arange(4))
    assert f2.b(4) == pytest.approx(2.0 ** (0.75 * np.arange(4)))
    assert gap_np_series_value(f2, 1.0, 12) == pytest.approx(1 / (1 - 2**-0.5), abs=1e-12)
    # the bare partial sum still misses the geometric tail 2^-6 / (1 - 2^-1/2)
    assert gap_np_rhs(f2, 1.0, 12).value == pytest.approx(1 / (1 - 2**-0.5) * (1 - 2**-6), rel=1e-12)
    at_p1 = gap_np_rhs(f2, 0.5, 12)
    assert at_p1.partials == pytest.approx(np.arange(1, 13))
    assert at_p1.divergent
    assert gap_np_series_value(f2, 0.5) == math.inf
    for K in range(1, 13):
        assert gap_aq_rhs(f1, 1.0, K).value == pytest.approx(1.0)
    assert gap_np_rhs(f1, 1.0, 12).divergent


def test_aq_rhs():
    assert gap_aq_rhs(GapSpec(), 1.0, 8).value == 1.0
    grow = gap_aq_rhs(GapSpec(b_beta=0.75), 0.5, 12)
    assert grow.value == pytest.approx(2 ** (0.25 * 11))
    assert grow.divergent


def test_overflow_is_flagged():
    s = gap_np_rhs(GapSpec(b_beta=600.0, truncations=(4,)), 1.0, 4)
    assert s.divergent and math.isfinite(s.value)


def test_dyadic_blocks():
    s = GapSpec(b_beta=0.3)
    for p in (0.5, 1.0):
        assert gap_dyadic_blocks(s, p, 10) == pytest.approx(gap_np_rhs(s, p, 10).value, rel=1e-14)
    pair = GapSpec(b_values=(1, 1), m_values=(2, 3), c=1.5, truncations=())
    assert gap_dyadic_blocks(pair, 1.0, 2) == pytest.approx(1.0)
    terms = gap_np_rhs(pair, 1.0, 2).value
    assert terms == pytest.approx(1 / 4 + 1 / 9)
    assert 1 <= 1.0 / terms <= dyadic_bracket(1.5, 1.0)
    assert gap_dyadic_blocks(GapSpec(), 1.0, 0) == 0.0


@given(st.floats(1.05, 4.0), st.integers(1, 40), st.integers(2, 14))
def test_block_count_bound(c, m0, K):
    m = [m0]
    for _ in range(K - 1):
        m.append(int(math.ceil(c * m[-1])))
    counts = [len(v) for v in dyadic_blocks(m).values()]
    assert max(counts) <= block_count_bound(c)


@given(st.floats(1.2, 3.0), st.integers(1, 10), st.floats(0.1, 2.0),
       st.lists(st.floats(-3, 3), min_size=8, max_size=8))
def test_dyadic_comparability(c, m0, p, logb):
    m = [m0]
    for _ in range(7):
        m.append(int(math.ceil(c * m[-1])))
    s = GapSpec(b_values=tuple(np.exp(logb)), m_values=tuple(m), c=c, truncations=())
    ratio = gap_dyadic_blocks(s, p, 8) / gap_np_rhs(s, p, 8).value
    assert 1 - 1e-12 <= ratio <= dyadic_bracket(c, p) * (1 + 1e-12)


def test_spec_validation_and_json():
    with pytest.raises(ValueError):
        GapSpec(m_values=(1, 2, 3), c=2.0, truncations=())
    with pytest.raises(ValueError):
        GapSpec(c=1.0)
    with pytest.raises(ValueError):
        separation_witnesses(1, 1.0, 0.5)
    with pytest.raises(ValueError):
        separation_witnesses(1, 0.5, 1.5)
    s = GapSpec(b_values=(1, 2j), m_values=(1, 3), c=3.0, truncations=(1, 2))
    assert GapSpec.from_dict(json.loads(json.dumps(s.to_dict()))) == s


def test_membership_table():
    t = membership_table(1, 0.5, 1.0)
    assert t["verdicts"]["f1"] == {"N_0.5": "diverges", "N_1.0": "diverges", "A^-1.0": "bounded"}
    assert t["verdicts"]["f2"]["N_1.0"] == "bounded"
    assert t["verdicts"]["f2"]["N_0.5"] == "diverges"


def test_stirling():
    r = stirling_ratio(1, np.array([2.0**12, 2.0**20]), 0.5)
    assert r[-1] == pytest.approx(gamma(1.5), rel=1e-5)
    assert np.all(np.isfinite(stirling_ratio(2, 2.0**40, 3.0)))


def test_equivalence_single_term():
    s = GapSpec(b_values=(1,), m_values=(1,), truncations=(1,))
    rep = equivalence_report(s, 1.0, 0.5)
    row = rep.rows[0]
    assert row.np_rhs == 1.0
    assert row.norm_sq == pytest.approx(norm_np(s.polynomial(1), 1.0).value ** 2)
    assert row.aq == pytest.approx(0.5, rel=1e-9)
    assert rep.np_spread == 1.0
    rows = list(csv.reader(io.StringIO(rep.to_csv())))
    assert rows[0][0] == "K" and len(rows) == 2
    assert equivalence_report(s, 1.0, 0.5, []).rows == []


def test_equivalence_bracket():
    rep = equivalence_report(GapSpec(), 0.5, 1.0, (6, 8, 10, 12))
    assert rep.np_spread <= 4 and rep.aq_spread <= 4
    json.loads(rep.to_json())
