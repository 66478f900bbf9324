"""Hadamard gap series: closed-form norm sides, dyadic blocks, witnesses.

A gap series is ``f = sum_k b_k P_{m_k}`` with ``m_{k+1} / m_k >= c > 1``
and ``P_k`` homogeneous of degree ``k`` with sup 1 on the sphere. For such
``f`` the ``N_p`` norm squared is comparable to ``sum |b_k|^2 / m_k^(p+1)``
when ``0 < p <= n``, and the ``A^-q`` norm to ``sup |b_k| / m_k^q``.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .functions import GapSeries, Polynomial, truncate
from .integrate import QuadSpec
from .norms import SearchSpec, norm_bergman_type, norm_np

DEFAULT_TRUNCATIONS = (4, 6, 8, 10, 12)


@dataclass(frozen=True)
class GapSpec:
    """Closed-form coefficient and degree rules.

    ``b_k = 2^(k * b_beta)`` unless ``b_values`` is given; ``m_k = m_base^k``
    unless ``m_values`` is given. Explicit lists cap the available ``K``.
    """

    b_beta: float = 0.0
    m_base: int = 2
    c: float = 2.0
    n: int = 1
    b_values: tuple | None = None
    m_values: tuple | None = None
    truncations: tuple = DEFAULT_TRUNCATIONS

    def __post_init__(self):
        if self.c <= 1:
            raise ValueError(f"gap ratio must exceed 1, got {self.c}")
        if self.n not in (1, 2):
            raise ValueError("gap series are generated for n = 1 and n = 2 only")
        if self.m_values is None and self.m_base < 2:
            raise ValueError("m_base must be at least 2")
        if self.b_values is not None:
            object.__setattr__(self, "b_values", tuple(complex(v) for v in self.b_values))
        if self.m_values is not None:
            object.__setattr__(self, "m_values", tuple(int(v) for v in self.m_values))
            if self.b_values is not None and len(self.b_values) != len(self.m_values):
                raise ValueError("b_values and m_values must have equal length")
        object.__setattr__(self, "truncations", tuple(int(k) for k in self.truncations))
        if list(self.truncations) != sorted(set(self.truncations)):
            raise ValueError("truncations must be strictly increasing")
        self.m(self.max_terms)  # validates the gap ratio

    @property
    def max_terms(self) -> int:
        caps = [len(v) for v in (self.b_values, self.m_values) if v is not None]
        if caps:
            return min(caps)
        return max(self.truncations) if self.truncations else 0

    def _check_k(self, K: int) -> None:
        if K < 0:
            raise ValueError("K must be nonnegative")
        caps = [len(v) for v in (self.b_values, self.m_values) if v is not None]
        if caps and K > min(caps):
            raise ValueError(f"K={K} exceeds the {min(caps)} listed terms")

    def m(self, K: int) -> np.ndarray:
        self._check_k(K)
        if self.m_values is not None:
            m = np.asarray(self.m_values[:K], dtype=np.int64)
        else:
            m = np.asarray([self.m_base**k for k in range(K)], dtype=np.int64)
        if np.any(m <= 0):
            raise ValueError("degrees must be positive")
        if np.any(m[1:] < self.c * m[:-1]):
            raise ValueError(f"degrees {m.tolist()} violate the gap ratio {self.c}")
        return m

    def log_abs_b(self, K: int) -> np.ndarray:
        self._check_k(K)
        if self.b_values is not None:
            with np.errstate(divide="ignore"):
                return np.log(np.abs(np.asarray(self.b_values[:K], dtype=complex)))
        return np.arange(K) * self.b_beta * math.log(2.0)

    def b(self, K: int) -> np.ndarray:
        if self.b_values is not None:
            self._check_k(K)
            return np.asarray(self.b_values[:K], dtype=complex)
        return np.exp(self.log_abs_b(K)).astype(complex)

    def series(self, K: int) -> GapSeries:
        return GapSeries(self.b(K), self.m(K), n=self.n, c=self.c)

    def polynomial(self, K: int) -> Polynomial:
        return truncate(self.series(K), K)

    def to_dict(self) -> dict:
        d = asdict(self)
        if self.b_values is not None:
            d["b_values"] = [[v.real, v.imag] for v in self.b_values]
        for key in ("m_values", "truncations"):
            if d[key] is not None:
                d[key] = list(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "GapSpec":
        d = dict(d)
        if d.get("b_values") is not None:
            d["b_values"] = tuple(complex(re, im) for re, im in d["b_values"])
        if d.get("m_values") is not None:
            d["m_values"] = tuple(d["m_values"])
        if "truncations" in d:
            d["truncations"] = tuple(d["truncations"])
        return cls(**d)


class GapSum(NamedTuple):
    value: float
    partials: np.ndarray
    divergent: bool


def _growth_flag(partials: np.ndarray, ratio: float) -> bool:
    K = partials.size
    if K < 4:
        return False
    half = partials[K // 2 - 1]
    return bool(partials[-1] > ratio * half)


def gap_np_rhs(spec: GapSpec, p: float, K: int, growth_ratio: float = 1.5) -> GapSum:
    """Partial sums of ``sum_{k<K} |b_k|^2 / m_k^(p+1)``.

    ``divergent`` is set when ``S_K > growth_ratio * S_{K/2}`` or a term
    overflows; the value is then the last finite partial sum.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    if K == 0:
        return GapSum(0.0, np.zeros(0), False)
    logt = 2 * spec.log_abs_b(K) - (p + 1) * np.log(spec.m(K).astype(float))
    with np.errstate(over="ignore"):
        partials = np.cumsum(np.exp(logt))
    finite = np.isfinite(partials)
    if not finite.all():
        last = partials[finite][-1] if finite.any() else 0.0
        return GapSum(float(last), partials[finite], True)
    return GapSum(float(partials[-1]), partials, _growth_flag(partials, growth_ratio))


def gap_np_series_value(spec: GapSpec, p: float, K: int = 0) -> float:
    """Exact value of ``sum_k |b_k|^2 / m_k^(p+1)`` for geometric rules.

    The partial sum over ``k < K`` plus the closed-form geometric remainder.
    Returns ``inf`` when the ratio ``2^(2 beta) / m_base^(p+1)`` is >= 1.
    """
    if spec.b_values is not None or spec.m_values is not None:
        raise ValueError("closed-form series values need the geometric rules")
    ratio_log = 2 * spec.b_beta * math.log(2.0) - (p + 1) * math.log(spec.m_base)
    if ratio_log >= 0:
        return math.inf
    head = gap_np_rhs(spec, p, K).value if K else 0.0
    return head + math.exp(K * ratio_log) / -math.expm1(ratio_log)


def gap_aq_rhs(spec: GapSpec, q: float, K: int, growth_ratio: float = 1.5) -> GapSum:
    """Running maxima of ``|b_k| / m_k^q``; ``divergent`` marks an unbounded trend."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    if K == 0:
        return GapSum(0.0, np.zeros(0), False)
    logt = spec.log_abs_b(K) - q * np.log(spec.m(K).astype(float))
    with np.errstate(over="ignore"):
        partials = np.maximum.accumulate(np.exp(logt))
    if not np.isfinite(partials[-1]):
        finite = partials[np.isfinite(partials)]
        return GapSum(float(finite[-1]) if finite.size else 0.0, finite, True)
    return GapSum(float(partials[-1]), partials, _growth_flag(partials, growth_ratio))


def dyadic_blocks(m: Sequence[int]) -> dict[int, list[int]]:
    """Indices grouped by the block ``2^k <= m_j < 2^(k+1)``."""
    out: dict[int, list[int]] = {}
    for j, mj in enumerate(m):
        out.setdefault(int(mj).bit_length() - 1, []).append(j)
    return out


def block_count_bound(c: float) -> int:
    """Largest possible number of indices in one dyadic block: ``floor(1 + log_c 2)``."""
    return int(math.floor(1 + math.log(2) / math.log(c) + 1e-12))


def dyadic_bracket(c: float, p: float) -> float:
    """``C_b`` with ``1 <= blocks / terms <= C_b``.

    Inside block ``k`` every ``m_j^-(p+1)`` lies within ``2^(p+1)`` of
    ``2^(-k(p+1))``, and squaring a sum of ``N`` terms costs at most ``N``.
    """
    return block_count_bound(c) * 2.0 ** (p + 1)


def gap_dyadic_blocks(spec: GapSpec, p: float, K: int) -> float:
    """``sum_k 2^(-k(p+1)) (sum_{2^k <= m_j < 2^(k+1)} |b_j|)^2`` over ``j < K``."""
    if K == 0:
        return 0.0
    m = spec.m(K)
    absb = np.exp(spec.log_abs_b(K))
    total = 0.0
    for k, idx in dyadic_blocks(m).items():
        total += 2.0 ** (-k * (p + 1)) * float(absb[idx].sum()) ** 2
    return total


def separation_witnesses(n: int, p1: float, p2: float) -> tuple[GapSpec, GapSpec]:
    """``f1`` with ``b_k = 2^(k(n+1)/2)`` and ``f2`` with ``b_k = 2^(k(1+p1)/2)``, ``m_k = 2^k``.

    ``f1`` lies in ``A^-(n+1)/2`` but not in ``N_p2``; ``f2`` lies in
    ``N_p2`` but not in ``N_p1``.
    """
    if not 0 < p1 < p2 <= n:
        raise ValueError(f"need 0 < p1 < p2 <= n, got p1={p1}, p2={p2}, n={n}")
    f1 = GapSpec(b_beta=(n + 1) / 2, n=n)
    f2 = GapSpec(b_beta=(1 + p1) / 2, n=n)
    return f1, f2


def membership_table(n: int, p1: float, p2: float, K: int = 12) -> dict:
    """Closed-form membership verdicts for the two witnesses, as a JSON-ready dict."""
    f1, f2 = separation_witnesses(n, p1, p2)
    q = (n + 1) / 2

    def verdict(s: GapSum) -> str:
        return "diverges" if s.divergent else "bounded"

    rows = {}
    for name, spec in (("f1", f1), ("f2", f2)):
        rows[name] = {
            f"N_{p1}": verdict(gap_np_rhs(spec, p1, K)),
            f"N_{p2}": verdict(gap_np_rhs(spec, p2, K)),
            f"A^-{q}": verdict(gap_aq_rhs(spec, q, K)),
        }
    return {"n": n, "p1": p1, "p2": p2, "K": K, "verdicts": rows}


def stirling_ratio(n: int, m, p: float) -> np.ndarray:
    """``Gamma(n+m) Gamma(p+1) / Gamma(n+m+p+1)`` divided by ``m^-(p+1)``.

    Computed in log space; tends to ``Gamma(p+1)`` as ``m`` grows.
    """
    m = np.asarray(m, dtype=float)
    log = gammaln(n + m) + gammaln(p + 1) - gammaln(n + m + p + 1) + (p + 1) * np.log(m)
    return np.exp(log)


@dataclass
class EquivalenceRow:
    K: int
    norm_sq: float
    np_rhs: float
    np_ratio: float
    aq: float
    aq_rhs: float
    aq_ratio: float


@dataclass
class EquivalenceReport:
    p: float
    q: float
    rows: list = field(default_factory=list)

    @property
    def np_spread(self) -> float:
        r = [row.np_ratio for row in self.rows]
        return max(r) / min(r) if r else 1.0

    @property
    def aq_spread(self) -> float:
        r = [row.aq_ratio for row in self.rows]
        return max(r) / min(r) if r else 1.0

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "q": self.q,
            "np_spread": self.np_spread,
            "aq_spread": self.aq_spread,
            "rows": [asdict(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        names = list(EquivalenceRow.__dataclass_fields__)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(names)
        for row in self.rows:
            w.writerow([repr(getattr(row, k)) for k in names])
        return buf.getvalue()


def equivalence_report(
    spec: GapSpec,
    p: float,
    q: float,
    truncations: Sequence[int] | None = None,
    search: SearchSpec | None = None,
    quad: QuadSpec | None = None,
) -> EquivalenceReport:
    """Numeric norms of the truncations against both closed forms."""
    ks = list(spec.truncations if truncations is None else truncations)
    if ks != sorted(ks):
        raise ValueError("truncations must be increasing")
    rep = EquivalenceReport(p, q)
    for K in ks:
        if K == 0:
            continue
        poly = spec.polynomial(K)
        nsq = norm_np(poly, p, search, quad).value ** 2
        rhs = gap_np_rhs(spec, p, K).value
        aq = norm_bergman_type(poly, q).value
        aq_rhs = gap_aq_rhs(spec, q, K).value
        rep.rows.append(EquivalenceRow(K, nsq, rhs, nsq / rhs, aq, aq_rhs, aq / aq_rhs))
    return rep
