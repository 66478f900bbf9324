"""Integration over the ball and sphere.

All measures are normalized: ``V(B) = 1`` and ``sigma(S) = 1``. Ball
integrals use polar coordinates in the variable ``t = |z|^2``::

    int_B h dV = n int_0^1 t^(n-1) int_S h(sqrt(t) zeta) dsigma(zeta) dt

with a Gauss-Jacobi rule in ``t`` that absorbs ``t^(n-1) (1-t)^weight``.

The central quantity is the kernel integral::

    J(f; a, kappa, weight) = int_B |f(z)|^2 |1 - <z,a>|^(-2 kappa) (1-|z|^2)^weight dV

from which ``I_f(a) = (1-|a|^2)^p J(f; a, p, p)`` and the Carleson
transform are built. Two independent routes compute it: an exact spectral
sum for coefficient-bearing functions (n <= 2) and tensor quadrature.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Callable, NamedTuple

import numpy as np
from scipy.special import gammaln, roots_jacobi, roots_legendre

from .functions import HoloFunction, Polynomial, as_polynomial, log_sphere_monomial_weight
from .geometry import NumericError, axis_unitary, ball_point

log = logging.getLogger(__name__)

BACKENDS = ("auto", "spectral", "quadrature", "montecarlo")
SPHERE_RULES = ("circle_trapezoid", "hopf_product", "mc")


class SeriesTruncationError(NumericError):
    """The kernel series needs more terms than allowed."""


@dataclass(frozen=True)
class QuadSpec:
    """Integration configuration.

    ``backend="auto"`` uses the spectral sum when the integrand has
    coefficients and ``n <= 2`` and falls back to quadrature otherwise.
    For ``n = 2`` the sphere rule is a Hopf product: Gauss-Legendre in
    ``|zeta_1|^2`` (``hopf_nodes``) times trapezoid rules in the two
    phases (``angular_nodes`` and ``fiber_nodes``).
    """

    backend: str = "auto"
    radial_nodes: int = 64
    angular_nodes: int = 256
    hopf_nodes: int = 32
    fiber_nodes: int = 24
    sphere_rule: str | None = None
    mc_samples: int = 200_000
    seed: int | None = None
    series_tol: float = 1e-13
    max_series_terms: int = 400_000
    near_boundary: float = 0.95

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}; expected one of {BACKENDS}")
        if self.sphere_rule is not None and self.sphere_rule not in SPHERE_RULES:
            raise ValueError(f"unknown sphere rule {self.sphere_rule!r}")
        if min(self.radial_nodes, self.angular_nodes, self.hopf_nodes, self.fiber_nodes) < 1:
            raise ValueError("node counts must be positive")
        if self.backend == "montecarlo" and self.seed is None:
            raise ValueError("the montecarlo backend needs an explicit seed")
        if self.sphere_rule == "mc" and self.seed is None:
            raise ValueError("the mc sphere rule needs an explicit seed")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "QuadSpec":
        return cls(**d)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, s: str) -> "QuadSpec":
        return cls.from_dict(json.loads(s))

    def refined(self, factor: int) -> "QuadSpec":
        return replace(
            self,
            radial_nodes=self.radial_nodes * factor,
            angular_nodes=self.angular_nodes * factor,
            hopf_nodes=self.hopf_nodes * factor,
            fiber_nodes=self.fiber_nodes * factor,
            mc_samples=self.mc_samples * factor,
        )


class Estimate(NamedTuple):
    value: float
    error: float


@dataclass(frozen=True)
class RadialProfile:
    """``M(r) = sum_d s[d] r^(2d)``, the sphere mean of ``|f(r zeta)|^2``."""

    s: np.ndarray = field(repr=False)

    def __call__(self, r) -> np.ndarray:
        r2 = np.asarray(r, dtype=float) ** 2
        return np.polynomial.polynomial.polyval(r2, self.s)


# --- rules ----------------------------------------------------------------


@lru_cache(maxsize=256)
def radial_rule(nodes: int, weight: float, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights for ``int_0^1 g(t) t^(n-1) (1-t)^weight dt``."""
    x, w = roots_jacobi(nodes, weight, n - 1)
    t = 0.5 * (1.0 + x)
    w = w * 2.0 ** (-(n + weight))
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=64)
def _legendre01(nodes: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = roots_legendre(nodes)
    return 0.5 * (1.0 + x), 0.5 * w


def _rule_name(n: int, spec: QuadSpec) -> str:
    if spec.sphere_rule is not None:
        return spec.sphere_rule
    return {1: "circle_trapezoid", 2: "hopf_product"}.get(n, "mc")


def sphere_rule(n: int, spec: QuadSpec, stream: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Points ``(m, n)`` on the unit sphere and weights summing to 1."""
    rule = _rule_name(n, spec)
    if rule == "circle_trapezoid":
        if n != 1:
            raise ValueError("circle_trapezoid is the n = 1 rule")
        theta = 2 * np.pi * np.arange(spec.angular_nodes) / spec.angular_nodes
        return np.exp(1j * theta)[:, None], np.full(spec.angular_nodes, 1.0 / spec.angular_nodes)
    if rule == "hopf_product":
        if n != 2:
            raise ValueError("hopf_product is the n = 2 rule")
        s, ws = _legendre01(spec.hopf_nodes)
        t1 = 2 * np.pi * np.arange(spec.angular_nodes) / spec.angular_nodes
        t2 = 2 * np.pi * np.arange(spec.fiber_nodes) / spec.fiber_nodes
        S, T1, T2 = np.meshgrid(s, t1, t2, indexing="ij")
        pts = np.stack([np.sqrt(S) * np.exp(1j * T1), np.sqrt(1 - S) * np.exp(1j * T2)], axis=-1)
        w = np.broadcast_to(ws[:, None, None], S.shape) / (spec.angular_nodes * spec.fiber_nodes)
        return pts.reshape(-1, 2), w.reshape(-1)
    if spec.seed is None:
        raise ValueError("the mc sphere rule needs an explicit seed")
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(stream,)))
    g = rng.normal(size=(spec.mc_samples, n)) + 1j * rng.normal(size=(spec.mc_samples, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g, np.full(spec.mc_samples, 1.0 / spec.mc_samples)


def _finite(vals: np.ndarray, pts: np.ndarray) -> np.ndarray:
    bad = ~np.isfinite(vals)
    if np.any(bad):
        idx = np.unravel_index(np.argmax(bad), vals.shape)
        raise NumericError(f"non-finite integrand value at z = {pts[idx]}")
    return vals


# --- generic ball integral ------------------------------------------------------


def _radial_chunks(nt: int, m: int, budget: int = 1 << 19):
    step = max(1, budget // max(m, 1))
    for lo in range(0, nt, step):
        yield slice(lo, min(nt, lo + step))


def _ball_quadrature(g, n: int, spec: QuadSpec, weight: float) -> float:
    t, wt = radial_rule(spec.radial_nodes, float(weight), n)
    zeta, wz = sphere_rule(n, spec)
    rows = np.empty(t.size)
    for sl in _radial_chunks(t.size, zeta.shape[0]):
        pts = np.sqrt(t[sl])[:, None, None] * zeta[None]
        flat = pts.reshape(-1, n)
        vals = _finite(np.asarray(g(flat), dtype=float), flat).reshape(pts.shape[:2])
        rows[sl] = vals @ wz
    return n * float(rows @ wt)


def _ball_montecarlo(g, n: int, spec: QuadSpec, weight: float, stream: int = 0) -> Estimate:
    rng = np.random.default_rng(np.random.SeedSequence(spec.seed, spawn_key=(1000 + stream,)))
    m = spec.mc_samples
    d = rng.normal(size=(m, n)) + 1j * rng.normal(size=(m, n))
    d /= np.linalg.norm(d, axis=1, keepdims=True)
    r = rng.random(m) ** (1.0 / (2 * n))
    pts = r[:, None] * d
    vals = _finite(np.asarray(g(pts), dtype=float), pts) * (1 - r**2) ** weight
    return Estimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(m)))


def ball_integral(
    g: Callable[[np.ndarray], np.ndarray], n: int, spec: QuadSpec | None = None, weight: float = 0.0
) -> Estimate:
    """Integrate ``g(z) (1-|z|^2)^weight`` over the ball against normalized volume.

    ``g`` takes points of shape ``(m, n)`` and returns ``m`` real values.
    The error is the gap to a half-resolution run (quadrature) or the
    standard error (Monte Carlo).
    """
    spec = spec or QuadSpec()
    if spec.backend == "montecarlo" or (n > 2 and spec.backend != "spectral"):
        if spec.seed is None:
            raise ValueError("Monte Carlo integration needs an explicit seed")
        return _ball_montecarlo(g, n, spec, weight)
    fine = _ball_quadrature(g, n, spec, weight)
    coarse_spec = replace(
        spec,
        radial_nodes=max(1, spec.radial_nodes // 2),
        angular_nodes=max(1, spec.angular_nodes // 2),
        hopf_nodes=max(1, spec.hopf_nodes // 2),
    )
    coarse = _ball_quadrature(g, n, coarse_spec, weight)
    return Estimate(fine, abs(fine - coarse))


# --- spectral route -------------------------------------------------------------


def kernel_series(p: float, a, tol: float = 1e-13, max_terms: int = 400_000) -> np.ndarray:
    """Coefficients ``c_k = Gamma(p+k) / (Gamma(p) k!)`` of ``(1-x)^-p``.

    Enough terms are returned that ``sum_{k>K} c_k |a|^k < tol``. ``a``
    is a point or a radius.
    """
    x = float(np.linalg.norm(np.atleast_1d(np.asarray(a, dtype=complex))))
    if x >= 1:
        raise ValueError("kernel series needs |a| < 1")
    if p == 0:
        return np.ones(1)
    if x == 0:
        return np.ones(1)
    size = 64
    while True:
        k = np.arange(size + 1, dtype=float)
        logc = gammaln(p + k) - gammaln(p) - gammaln(k + 1)
        # ratio c_{k+1} x / c_k is (p+k)/(k+1) x, monotone in k
        kk = k[:-1]
        if p > 1:
            q = x * (p + kk + 1) / (kk + 2)
        else:
            q = np.full_like(kk, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            tail = np.where(q < 1, np.exp(logc[1:] + (kk + 1) * math.log(x)) / (1 - q), np.inf)
        ok = np.nonzero(tail < tol)[0]
        if ok.size:
            K = int(ok[0])
            return np.exp(logc[: K + 1])
        if size >= max_terms:
            raise SeriesTruncationError(
                f"kernel series for p={p}, |a|={x} needs more than {max_terms} terms"
            )
        size = min(2 * size, max_terms)


def sphere_weights(exps: np.ndarray) -> np.ndarray:
    """``int_S |zeta^alpha|^2 dsigma`` for rows of ``exps``."""
    return np.exp(log_sphere_monomial_weight(exps))


def radial_profile(f: HoloFunction) -> RadialProfile:
    """Sphere mean ``int_S |f(r zeta)|^2 dsigma`` as an even power series in r."""
    poly = as_polynomial(f)
    if poly is None:
        raise TypeError("radial_profile needs a function with coefficients")
    if poly.is_zero():
        return RadialProfile(np.zeros(1))
    deg = poly.exps.sum(axis=1)
    s = np.zeros(int(deg.max()) + 1)
    np.add.at(s, deg, np.abs(poly.coeffs) ** 2 * sphere_weights(poly.exps))
    return RadialProfile(s)


def _log_ball_weights(i: np.ndarray, j: np.ndarray | None, n: int, weight: float) -> np.ndarray:
    """log of ``int_B |z^alpha|^2 (1-|z|^2)^weight dV = n! alpha! G(w+1) / G(n+|alpha|+w+1)``."""
    if j is None:
        d = i
        lf = gammaln(i + 1.0)
    else:
        d = i + j
        lf = gammaln(i + 1.0) + gammaln(j + 1.0)
    return gammaln(n + 1.0) + lf + gammaln(weight + 1.0) - gammaln(n + d + weight + 1.0)


def _homog_power(cache: dict, key, base: np.ndarray, k: int) -> np.ndarray:
    out = cache.get((key, k))
    if out is None:
        out = np.ones(1, dtype=complex) if k == 0 else np.convolve(_homog_power(cache, key, base, k - 1), base)
        cache[(key, k)] = out
    return out


def rotate_polynomial(poly: Polynomial, u: np.ndarray) -> np.ndarray:
    """Dense coefficients of ``w -> poly(U w)``.

    n = 1 gives a 1-D array indexed by degree; n = 2 a 2-D array
    ``G[i, j]`` for ``w1^i w2^j``.
    """
    if poly.n == 1:
        deg = poly.degree
        out = np.zeros(deg + 1, dtype=complex)
        out[poly.exps[:, 0]] = poly.coeffs * u[0, 0] ** poly.exps[:, 0]
        return out
    if poly.n != 2:
        raise NotImplementedError("spectral rotation is implemented for n <= 2")
    deg = poly.degree
    out = np.zeros((deg + 1, deg + 1), dtype=complex)
    if np.allclose(u, np.eye(2), atol=0, rtol=0):
        out[poly.exps[:, 0], poly.exps[:, 1]] = poly.coeffs
        return out
    # (U w)_1 = U00 w1 + U01 w2 etc.; homogeneous polys indexed by w1 power
    l1 = np.array([u[0, 1], u[0, 0]])
    l2 = np.array([u[1, 1], u[1, 0]])
    cache: dict = {}
    for (a1, a2), c in zip(poly.exps, poly.coeffs):
        h = np.convolve(_homog_power(cache, 1, l1, int(a1)), _homog_power(cache, 2, l2, int(a2)))
        d = int(a1 + a2)
        i = np.arange(d + 1)
        out[i, d - i] += c * h
    return out


def _spectral_kernel_integral(poly: Polynomial, a: np.ndarray, kappa: float, weight: float, spec: QuadSpec) -> float:
    n = poly.n
    if n > 2:
        raise ValueError("the spectral backend supports n <= 2")
    if poly.is_zero():
        return 0.0
    r = float(np.linalg.norm(a))
    u = axis_unitary(a)
    g0 = rotate_polynomial(poly, u)
    c = kernel_series(kappa, r, spec.series_tol, spec.max_series_terms)
    h = c * r ** np.arange(c.size) if r > 0 else c
    shape = (g0.shape[0] + h.size - 1,) + g0.shape[1:]
    G = np.zeros(shape, dtype=complex)
    nz = np.argwhere(g0 != 0)
    for idx in nz:
        i = idx[0]
        G[(slice(i, i + h.size),) + tuple(idx[1:])] += g0[tuple(idx)] * h
    if n == 1:
        logw = _log_ball_weights(np.arange(shape[0], dtype=float), None, 1, weight)
    else:
        I, J = np.meshgrid(np.arange(shape[0], dtype=float), np.arange(shape[1], dtype=float), indexing="ij")
        logw = _log_ball_weights(I, J, 2, weight)
    mag = G.real**2 + G.imag**2
    with np.errstate(under="ignore"):
        return float(np.sum(mag * np.exp(logw)))


# --- quadrature route ------------------------------------------------------------


def _quadrature_kernel_integral(f: HoloFunction, a: np.ndarray, kappa: float, weight: float, spec: QuadSpec) -> float:
    n = f.n
    r = float(np.linalg.norm(a))
    if r > spec.near_boundary:
        spec = replace(spec, radial_nodes=2 * spec.radial_nodes, angular_nodes=2 * spec.angular_nodes)
    u = axis_unitary(a)
    t, wt = radial_rule(spec.radial_nodes, float(weight), n)
    zeta, wz = sphere_rule(n, spec)
    rows = np.empty(t.size)
    for sl in _radial_chunks(t.size, zeta.shape[0]):
        w = np.sqrt(t[sl])[:, None, None] * zeta[None]
        z = w @ u.T
        fz = f(z)
        vals = (fz.real**2 + fz.imag**2) * np.abs(1.0 - r * w[..., 0]) ** (-2.0 * kappa)
        rows[sl] = _finite(vals, z) @ wz
    return n * float(rows @ wt)


def _montecarlo_kernel_integral(f: HoloFunction, a: np.ndarray, kappa: float, weight: float, spec: QuadSpec) -> float:
    def g(z):
        fz = f(z)
        return (fz.real**2 + fz.imag**2) * np.abs(1.0 - z @ np.conj(a)) ** (-2.0 * kappa)

    return _ball_montecarlo(g, f.n, spec, weight).value


def resolve_backend(f: HoloFunction, spec: QuadSpec) -> str:
    if spec.backend != "auto":
        return spec.backend
    if f.coefficient_bearing and f.n <= 2:
        return "spectral"
    return "quadrature" if f.n <= 2 else "montecarlo"


def kernel_integral(f: HoloFunction, a, kappa: float, weight: float, spec: QuadSpec | None = None) -> float:
    """``int_B |f|^2 |1-<z,a>|^(-2 kappa) (1-|z|^2)^weight dV``."""
    spec = spec or QuadSpec()
    a = ball_point(a, f.n)
    if f.is_zero():
        return 0.0
    backend = resolve_backend(f, spec)
    if backend == "spectral":
        poly = as_polynomial(f)
        if poly is None:
            raise TypeError(f"the spectral backend needs coefficients; got {f!r}")
        try:
            return _spectral_kernel_integral(poly, a, kappa, weight, spec)
        except SeriesTruncationError as exc:
            if spec.backend == "spectral":
                raise
            log.warning("%s; falling back to quadrature", exc)
            backend = "quadrature"
    if backend == "quadrature":
        if f.n > 2 and _rule_name(f.n, spec) == "mc" and spec.seed is None:
            raise ValueError("quadrature for n >= 3 samples the sphere and needs a seed")
        return _quadrature_kernel_integral(f, a, kappa, weight, spec)
    return _montecarlo_kernel_integral(f, a, kappa, weight, spec)


def np_integral(f: HoloFunction, a, p: float, spec: QuadSpec | None = None) -> float:
    """``I_f(a) = int_B |f(z)|^2 (1 - |phi_a(z)|^2)^p dV(z)``."""
    if p < 0:
        raise ValueError(f"p must be nonnegative, got {p}")
    a = ball_point(a, f.n)
    if f.is_zero():
        return 0.0
    scale = (1.0 - float(np.vdot(a, a).real)) ** p
    return scale * kernel_integral(f, a, p, p, spec)


def sphere_kernel_integral(a, r: float, p: float, spec: QuadSpec | None = None) -> float:
    """``int_S (1-|a|^2)^p |1 - <zeta, r a>|^(-2p) dsigma(zeta)``.

    Rotating ``a`` onto the first axis leaves a function of ``zeta_1``
    only. Trapezoid counts grow with ``r|a|`` so the aliasing error
    ``(r|a|)^N`` stays below 1e-14.
    """
    spec = spec or QuadSpec()
    if not 0 < r < 1:
        raise ValueError(f"r must lie in (0, 1), got {r}")
    a = ball_point(a)
    n = a.shape[0]
    x = r * float(np.linalg.norm(a))
    scale = (1.0 - float(np.vdot(a, a).real)) ** p
    if x == 0:
        return scale
    nodes = max(spec.angular_nodes, int(math.ceil(math.log(1e-14) / math.log(x))) + 1)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    if n == 1:
        return scale * float(np.mean(np.abs(1.0 - x * e) ** (-2 * p)))
    # |zeta_1|^2 = s has density (n-1)(1-s)^(n-2) on [0, 1]
    m = max(spec.hopf_nodes, min(4000, int(math.ceil(30.0 / (1.0 - x)))))
    s, ws = radial_rule(m, float(n - 2), 1)
    ws = ws * (n - 1)
    vals = np.abs(1.0 - x * np.sqrt(s)[:, None] * e[None, :]) ** (-2 * p)
    return scale * float(vals.mean(axis=1) @ ws)
