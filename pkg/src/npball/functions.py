"""Holomorphic functions on the ball and the operator wrappers acting on them.

Two kinds of functions exist. Coefficient-bearing ones (:class:`Polynomial`
and :class:`GapSeries`) can be integrated exactly by the spectral backend.
Everything else (:class:`BlackBox` and the wrappers) is only evaluable
pointwise and goes through quadrature.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Mapping, Sequence

import numpy as np
from scipy.special import gammaln

from .geometry import Automorphism, DimensionError, kernel_eval, mobius_eval


def _points(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z[None]
    if z.shape[-1] != n:
        if n == 1:
            # bare complex arrays are accepted in one variable
            return z[..., None]
        raise DimensionError(f"function of {n} variables evaluated at shape {z.shape}")
    return z


class HoloFunction:
    """Base class. Subclasses implement ``_eval`` on arrays of shape (..., n)."""

    n: int
    coefficient_bearing = False

    def __call__(self, z) -> np.ndarray:
        return self._eval(_points(z, self.n))

    def _eval(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def is_zero(self) -> bool:
        return False

    def __mul__(self, other):
        if isinstance(other, HoloFunction):
            return multiply(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __add__(self, other):
        return combine([(1.0, self), (1.0, _lift(other, self.n))])

    __radd__ = __add__

    def __sub__(self, other):
        return combine([(1.0, self), (-1.0, _lift(other, self.n))])

    def __rsub__(self, other):
        return combine([(1.0, _lift(other, self.n)), (-1.0, self)])

    def __neg__(self):
        return scale(self, -1.0)


def _lift(value, n: int) -> HoloFunction:
    if isinstance(value, HoloFunction):
        if value.n != n:
            raise DimensionError(f"cannot combine n={n} with n={value.n}")
        return value
    return Polynomial.constant(value, n)


def _powers(x: np.ndarray, exps) -> dict[int, np.ndarray]:
    """``{e: x**e}`` for the distinct positive ``exps``, built incrementally.

    Lacunary exponents (each about double the last) cost one multiply each.
    """
    out: dict[int, np.ndarray] = {}
    prev = 0
    for e in sorted({int(e) for e in exps if e > 0}):
        step = e - prev
        if prev == 0:
            out[e] = x**e
        elif step in out:
            out[e] = out[prev] * out[step]
        else:
            out[e] = out[prev] * x**step
        prev = e
    return out


class Polynomial(HoloFunction):
    """Finite sum ``sum_alpha c_alpha z^alpha``.

    ``terms`` maps multi-indices (tuples of n nonnegative ints) to complex
    coefficients. Zero coefficients are dropped.
    """

    coefficient_bearing = True

    def __init__(self, terms: Mapping[tuple[int, ...], complex], n: int | None = None):
        clean: dict[tuple[int, ...], complex] = {}
        for alpha, c in terms.items():
            alpha = tuple(int(k) for k in alpha)
            if any(k < 0 for k in alpha):
                raise ValueError(f"negative exponent in {alpha}")
            if n is None:
                n = len(alpha)
            elif len(alpha) != n:
                raise DimensionError(f"multi-index {alpha} does not have length {n}")
            c = complex(c)
            if c != 0:
                clean[alpha] = clean.get(alpha, 0) + c
        if n is None:
            raise ValueError("dimension is required for the zero polynomial")
        self.n = n
        self.terms = {k: v for k, v in sorted(clean.items()) if v != 0}
        if self.terms:
            self.exps = np.array(list(self.terms.keys()), dtype=np.int64)
            self.coeffs = np.array(list(self.terms.values()), dtype=complex)
        else:
            self.exps = np.zeros((0, n), dtype=np.int64)
            self.coeffs = np.zeros(0, dtype=complex)

    @classmethod
    def constant(cls, c, n: int = 1) -> "Polynomial":
        return cls({(0,) * n: c}, n)

    @classmethod
    def monomial(cls, alpha: Sequence[int], c: complex = 1.0) -> "Polynomial":
        return cls({tuple(alpha): c})

    @classmethod
    def from_coefficients(cls, coeffs: Sequence[complex]) -> "Polynomial":
        """One-variable polynomial from dense coefficients, constant term first."""
        return cls({(k,): c for k, c in enumerate(coeffs)}, 1)

    @property
    def degree(self) -> int:
        return int(self.exps.sum(axis=1).max()) if self.terms else 0

    def is_zero(self) -> bool:
        return not self.terms

    def _eval(self, z: np.ndarray) -> np.ndarray:
        out = np.zeros(z.shape[:-1], dtype=complex)
        if not self.terms:
            return out
        if self.n == 1 and 2 * len(self.terms) >= self.degree:
            dense = np.zeros(self.degree + 1, dtype=complex)
            dense[self.exps[:, 0]] = self.coeffs
            return np.polynomial.polynomial.polyval(z[..., 0], dense)
        powers = [_powers(z[..., j], self.exps[:, j]) for j in range(self.n)]
        for alpha, c in zip(self.exps, self.coeffs):
            term = c
            for j, k in enumerate(alpha):
                if k:
                    term = term * powers[j][k]
            out += term
        return out

    def dilate(self, r: float) -> "Polynomial":
        return Polynomial({a: c * r ** sum(a) for a, c in self.terms.items()}, self.n)

    def homogeneous_parts(self) -> dict[int, "Polynomial"]:
        parts: dict[int, dict] = {}
        for a, c in self.terms.items():
            parts.setdefault(sum(a), {})[a] = c
        return {d: Polynomial(t, self.n) for d, t in sorted(parts.items())}

    def __mul__(self, other):
        if isinstance(other, Polynomial):
            if other.n != self.n:
                raise DimensionError(f"cannot multiply n={self.n} by n={other.n}")
            out: dict[tuple[int, ...], complex] = {}
            for a, c in self.terms.items():
                for b, d in other.terms.items():
                    k = tuple(x + y for x, y in zip(a, b))
                    out[k] = out.get(k, 0) + c * d
            return Polynomial(out, self.n)
        return super().__mul__(other)

    def __eq__(self, other):
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    __hash__ = None

    def __repr__(self):
        return f"Polynomial({self.terms!r}, n={self.n})"

    def to_json(self) -> list[dict]:
        return [
            {"alpha": list(a), "re": c.real, "im": c.imag} for a, c in self.terms.items()
        ]

    @classmethod
    def from_json(cls, items: Sequence[Mapping], n: int | None = None) -> "Polynomial":
        terms: dict[tuple[int, ...], complex] = {}
        for it in items:
            a = tuple(it["alpha"])
            terms[a] = terms.get(a, 0) + complex(it.get("re", 0.0), it.get("im", 0.0))
        if n is None and not terms:
            n = 1
        return cls(terms, n)


# --- homogeneous generators for gap series -----------------------------------


def monomial_generator(n: int) -> Callable[[int], Polynomial]:
    """Homogeneous ``P_k`` of degree ``k`` with sup norm 1 on the sphere.

    ``n = 1`` gives ``z^k``. ``n = 2`` gives
    ``z1^ceil(k/2) z2^floor(k/2)`` divided by its sphere maximum. The
    sphere L^2 norm of the result is reported by :func:`generator_constants`.
    """
    if n == 1:
        return lambda k: Polynomial({(k,): 1.0}, 1)
    if n == 2:
        def gen(k: int) -> Polynomial:
            alpha = (-(-k // 2), k // 2)
            return Polynomial({alpha: math.exp(-log_monomial_sup(alpha))}, 2)

        return gen
    raise NotImplementedError("generators are provided for n = 1 and n = 2 only")


def log_monomial_sup(alpha: Sequence[int]) -> float:
    """log of ``max_{|zeta|=1} |zeta^alpha|``; attained at ``|zeta_j|^2 = alpha_j/|alpha|``."""
    d = sum(alpha)
    if d == 0:
        return 0.0
    return 0.5 * sum(k * math.log(k / d) for k in alpha if k > 0)


def sphere_monomial_weight(alpha: Sequence[int]) -> float:
    """``int_S |zeta^alpha|^2 dsigma = (n-1)! alpha! / (n-1+|alpha|)!``."""
    return math.exp(log_sphere_monomial_weight(alpha))


def log_sphere_monomial_weight(alpha) -> np.ndarray | float:
    alpha = np.asarray(alpha)
    n = alpha.shape[-1]
    d = alpha.sum(axis=-1)
    return gammaln(n) + gammaln(alpha + 1).sum(axis=-1) - gammaln(n + d)


def generator_constants(k: int, n: int) -> tuple[float, float]:
    """(sup norm on S, L^2(sigma) norm) of the degree-k generator polynomial."""
    pk = monomial_generator(n)(k)
    (alpha, c), = pk.terms.items()
    sup = abs(c) * math.exp(log_monomial_sup(alpha))
    l2 = abs(c) * math.exp(0.5 * log_sphere_monomial_weight(alpha))
    return sup, l2


class GapSeries(HoloFunction):
    """Lacunary series ``sum_k b_k P_{m_k}`` kept at truncation ``K``.

    ``m`` must satisfy ``m[k+1] / m[k] >= c`` with the declared ``c > 1``.
    """

    coefficient_bearing = True

    def __init__(
        self,
        b: Sequence[complex],
        m: Sequence[int],
        n: int = 1,
        c: float = 2.0,
        K: int | None = None,
        generator: Callable[[int], Polynomial] | None = None,
    ):
        b = np.asarray(b, dtype=complex)
        m = np.asarray(m, dtype=np.int64)
        if b.shape != m.shape:
            raise ValueError("b and m must have equal length")
        if c <= 1:
            raise ValueError(f"gap ratio must exceed 1, got {c}")
        if np.any(m <= 0):
            raise ValueError("degrees m_k must be positive")
        if np.any(m[1:] < c * m[:-1]):
            raise ValueError(f"degrees {m.tolist()} violate the gap ratio {c}")
        self.b, self.m, self.n, self.c = b, m, n, float(c)
        self.K = len(b) if K is None else int(K)
        if not 0 < self.K <= len(b):
            raise ValueError(f"truncation K={self.K} outside 1..{len(b)}")
        self.generator = generator or monomial_generator(n)
        self._poly = None

    def materialize(self) -> Polynomial:
        if self._poly is None:
            terms: dict = {}
            for bk, mk in zip(self.b[: self.K], self.m[: self.K]):
                for a, c in self.generator(int(mk)).terms.items():
                    terms[a] = terms.get(a, 0) + bk * c
            self._poly = Polynomial(terms, self.n)
        return self._poly

    def tail_bound(self, radius: float, extra_b=(), extra_m=()) -> float:
        """``sum_{k>=K} |b_k| radius^{m_k}`` over the coefficients held beyond K."""
        b = np.abs(np.concatenate([self.b[self.K:], np.asarray(extra_b, dtype=complex)]))
        m = np.concatenate([self.m[self.K:], np.asarray(extra_m, dtype=np.int64)])
        with np.errstate(under="ignore"):
            return float(np.sum(b * radius ** m.astype(float)))

    @property
    def degree(self) -> int:
        return int(self.m[self.K - 1])

    def _eval(self, z):
        return self.materialize()._eval(z)

    def __repr__(self):
        return f"GapSeries(K={self.K}, m={self.m[:self.K].tolist()}, n={self.n})"


class BlackBox(HoloFunction):
    """Caller-supplied evaluator, assumed holomorphic."""

    def __init__(self, fn: Callable[[np.ndarray], np.ndarray], n: int = 1, name: str = "blackbox"):
        self.fn, self.n, self.name = fn, n, name

    def _eval(self, z):
        return np.asarray(self.fn(z), dtype=complex)

    def __repr__(self):
        return f"BlackBox({self.name}, n={self.n})"


class Dilated(HoloFunction):
    def __init__(self, inner: HoloFunction, r: float):
        self.inner, self.r, self.n = inner, float(r), inner.n

    def _eval(self, z):
        return self.inner._eval(self.r * z)


class Product(HoloFunction):
    def __init__(self, u: HoloFunction, f: HoloFunction):
        if u.n != f.n:
            raise DimensionError(f"cannot multiply n={u.n} by n={f.n}")
        self.u, self.f, self.n = u, f, f.n

    def _eval(self, z):
        return self.u._eval(z) * self.f._eval(z)


class WeightedComposed(HoloFunction):
    """``W_phi f = k_a * (f o phi)`` with ``a = phi^-1(0)``."""

    def __init__(self, f: HoloFunction, phi: Automorphism):
        if f.n != phi.n:
            raise DimensionError(f"function has n={f.n}, automorphism has n={phi.n}")
        self.f, self.phi, self.n = f, phi, f.n
        self.a = phi.base

    def _eval(self, z):
        return kernel_eval(self.a, z) * self.f._eval(self.phi(z))


class Composed(HoloFunction):
    """``f o phi`` (the unweighted composition operator)."""

    def __init__(self, f: HoloFunction, phi: Automorphism):
        if f.n != phi.n:
            raise DimensionError(f"function has n={f.n}, automorphism has n={phi.n}")
        self.f, self.phi, self.n = f, phi, f.n

    def _eval(self, z):
        return self.f._eval(self.phi(z))


class Combination(HoloFunction):
    """Finite linear combination ``sum_i w_i f_i``."""

    def __init__(self, parts: Sequence[tuple[complex, HoloFunction]]):
        self.parts = [(complex(w), f) for w, f in parts]
        self.n = self.parts[0][1].n

    def _eval(self, z):
        out = np.zeros(z.shape[:-1], dtype=complex)
        for w, f in self.parts:
            out += w * f._eval(z)
        return out


class Scaled(HoloFunction):
    def __init__(self, f: HoloFunction, c: complex):
        self.f, self.c, self.n = f, complex(c), f.n

    def _eval(self, z):
        return self.c * self.f._eval(z)


# --- operations ---------------------------------------------------------------


def as_polynomial(f: HoloFunction) -> Polynomial | None:
    """Coefficient form of ``f`` if it has one."""
    if isinstance(f, Polynomial):
        return f
    if isinstance(f, GapSeries):
        return f.materialize()
    return None


def evaluate(f: HoloFunction, z) -> np.ndarray:
    return f(z)


def dilate(f: HoloFunction, r: float) -> HoloFunction:
    """``f_r(z) = f(rz)``; polynomials are rescaled, not wrapped."""
    if not 0 < r <= 1:
        raise ValueError(f"dilation radius must lie in (0, 1], got {r}")
    if r == 1:
        return f
    poly = as_polynomial(f)
    if poly is not None:
        return poly.dilate(r)
    if isinstance(f, Dilated):
        return Dilated(f.inner, f.r * r)
    return Dilated(f, r)


def weighted_compose(f: HoloFunction, phi: Automorphism) -> HoloFunction:
    return WeightedComposed(f, phi)


def composed(f: HoloFunction, phi: Automorphism) -> HoloFunction:
    return Composed(f, phi)


def truncate(f: GapSeries, K: int) -> Polynomial:
    """Partial sum ``sum_{k<K} b_k P_{m_k}`` as a polynomial."""
    if K <= 0:
        raise ValueError("truncation K must be positive")
    if K > len(f.b):
        raise ValueError(f"K={K} exceeds the {len(f.b)} available coefficients")
    return GapSeries(f.b, f.m, f.n, f.c, K, f.generator).materialize()


def multiply(u: HoloFunction, f: HoloFunction) -> HoloFunction:
    pu, pf = as_polynomial(u), as_polynomial(f)
    if pu is not None and pf is not None:
        return pu * pf
    return Product(u, f)


def scale(f: HoloFunction, c) -> HoloFunction:
    poly = as_polynomial(f)
    if poly is not None:
        return Polynomial({a: complex(c) * v for a, v in poly.terms.items()}, poly.n)
    return Scaled(f, c)


def combine(parts: Sequence[tuple[complex, HoloFunction]]) -> HoloFunction:
    polys = [as_polynomial(f) for _, f in parts]
    if all(p is not None for p in polys):
        n = polys[0].n
        out: dict = {}
        for (w, _), p in zip(parts, polys):
            if p.n != n:
                raise DimensionError("mixed dimensions in linear combination")
            for a, c in p.terms.items():
                out[a] = out.get(a, 0) + complex(w) * c
        return Polynomial(out, n)
    return Combination(parts)


def kernel_function(w) -> BlackBox:
    """``k_w`` as an evaluable function."""
    w = np.asarray(w, dtype=complex)
    return BlackBox(lambda z: kernel_eval(w, z), n=w.shape[0], name=f"k_{w.tolist()}")


def involution_image(a) -> BlackBox:
    """The coordinate map ``phi_a`` restricted to its first component."""
    a = np.asarray(a, dtype=complex)
    return BlackBox(lambda z: mobius_eval(a, z)[..., 0], n=a.shape[0], name="phi_a[0]")
