"""Space norms and operator-level checks.

The supremum over ``a`` in the ``N_p`` norm has no closed form, so
:func:`norm_np` returns a certified lower bound: the best value found by a
radial grid followed by multistart Nelder-Mead. Every candidate it
evaluated is kept in the trace.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .functions import (
    GapSeries,
    HoloFunction,
    as_polynomial,
    combine,
    composed,
    dilate,
    multiply,
    weighted_compose,
)
from .geometry import Automorphism, composition_bound
from .integrate import QuadSpec, kernel_integral, np_integral, radial_rule, sphere_kernel_integral

DEFAULT_LEVELS = (0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.98)


@dataclass(frozen=True)
class SearchSpec:
    """Discretization of the supremum over the ball."""

    levels: tuple[float, ...] = DEFAULT_LEVELS
    directions: int | None = None
    refine_starts: int = 3
    refine_maxfev: int = 300
    xatol: float = 1e-5
    max_radius: float = 0.999

    def __post_init__(self):
        lv = tuple(float(x) for x in self.levels)
        if any(not 0 <= x < 1 for x in lv) or any(b <= a for a, b in zip(lv, lv[1:])):
            raise ValueError(f"levels must be strictly increasing in [0, 1): {lv}")
        object.__setattr__(self, "levels", lv)

    def direction_count(self, n: int) -> int:
        if self.directions is not None:
            return self.directions
        return 8 if n == 1 else 16

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SearchSpec":
        d = dict(d)
        if "levels" in d:
            d["levels"] = tuple(d["levels"])
        return cls(**d)


def sphere_directions(n: int, count: int) -> np.ndarray:
    """Deterministic unit vectors spread over the sphere of C^n."""
    if n == 1:
        return np.exp(2j * np.pi * np.arange(count) / count)[:, None]
    if n == 2 and count == 16:
        dirs = [[np.exp(1j * t), 0] for t in np.arange(4) * np.pi / 2]
        dirs += [[0, np.exp(1j * t)] for t in np.arange(4) * np.pi / 2]
        h = 1 / np.sqrt(2)
        dirs += [[h * s1, h * np.exp(1j * t)] for s1 in (1, -1) for t in np.arange(4) * np.pi / 2]
        return np.array(dirs, dtype=complex)
    rng = np.random.default_rng(0)
    g = rng.normal(size=(count, n)) + 1j * rng.normal(size=(count, n))
    return g / np.linalg.norm(g, axis=1, keepdims=True)


@dataclass
class NormEstimate:
    value: float
    argmax: np.ndarray | None = None
    trace: list = field(default_factory=list)
    quad: QuadSpec | None = None
    tail_bound: float = 0.0
    kind: str = "np"
    lower_bound: bool = True

    def to_dict(self) -> dict:
        def c(z):
            return None if z is None else [[float(x.real), float(x.imag)] for x in np.atleast_1d(z)]

        return {
            "kind": self.kind,
            "value": float(self.value),
            "lower_bound": self.lower_bound,
            "argmax": c(self.argmax),
            "trace": [{"a": c(a), "value": float(v)} for a, v in self.trace],
            "quad": None if self.quad is None else self.quad.to_dict(),
            "tail_bound": float(self.tail_bound),
        }


def _tail(f: HoloFunction) -> float:
    return f.tail_bound(1.0) if isinstance(f, GapSeries) else 0.0


def _to_ball(x: np.ndarray, n: int, rmax: float) -> np.ndarray:
    rho = float(np.linalg.norm(x))
    if rho == 0:
        return np.zeros(n, dtype=complex)
    v = (x[0::2] + 1j * x[1::2]) / rho
    return rmax * math.tanh(rho) * v


def _from_ball(a: np.ndarray, rmax: float) -> np.ndarray:
    r = float(np.linalg.norm(a))
    x = np.empty(2 * a.size)
    if r == 0:
        x[:] = 0
        return x
    rho = math.atanh(min(r / rmax, 1 - 1e-12))
    v = a / r * rho
    x[0::2], x[1::2] = v.real, v.imag
    return x


def _maximize(obj, starts: Sequence[np.ndarray], n: int, rmax: float, search: SearchSpec):
    """Multistart Nelder-Mead of ``obj(a)`` over ``|a| <= rmax``."""
    best_a, best_v, evals = None, -np.inf, []
    for a0 in starts:
        x0 = _from_ball(np.asarray(a0, dtype=complex), rmax)
        simplex = np.vstack([x0] + [x0 + 0.15 * e for e in np.eye(x0.size)])
        scale = max(abs(obj(_to_ball(x0, n, rmax))), 1e-300)

        def neg(x):
            a = _to_ball(x, n, rmax)
            v = obj(a)
            evals.append((a, v))
            return -v / scale

        res = minimize(
            neg,
            x0,
            method="Nelder-Mead",
            options={
                "initial_simplex": simplex,
                "xatol": search.xatol,
                "fatol": 1e-12,
                "maxfev": search.refine_maxfev,
            },
        )
        a = _to_ball(res.x, n, rmax)
        v = -res.fun * scale
        if v > best_v:
            best_a, best_v = a, v
    return best_a, best_v, evals


def _top_candidates(trace, k: int):
    order = sorted(range(len(trace)), key=lambda i: -trace[i][1])
    picked: list[np.ndarray] = []
    for i in order:
        a = trace[i][0]
        if all(np.linalg.norm(a - b) > 1e-9 for b in picked):
            picked.append(a)
        if len(picked) == k:
            break
    return picked


def norm_a2p(f: HoloFunction, p: float, spec: QuadSpec | None = None) -> NormEstimate:
    """Weighted Bergman norm ``(int |f|^2 (1-|z|^2)^p dV)^(1/2)``."""
    if p < 0:
        raise ValueError(f"p must be nonnegative, got {p}")
    spec = spec or QuadSpec()
    zero = np.zeros(f.n, dtype=complex)
    if f.is_zero():
        return NormEstimate(0.0, zero, [], spec, 0.0, "a2p", False)
    v = kernel_integral(f, zero, 0.0, p, spec)
    return NormEstimate(math.sqrt(v), zero, [(zero, v)], spec, _tail(f), "a2p", False)


def norm_np(
    f: HoloFunction,
    p: float,
    search: SearchSpec | None = None,
    spec: QuadSpec | None = None,
    seeds: Sequence = (),
) -> NormEstimate:
    """Lower bound for ``sup_a I_f(a)^(1/2)``.

    ``seeds`` are extra candidate points (e.g. the maximizer found for a
    related function); they can only raise the bound.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    search = search or SearchSpec()
    spec = spec or QuadSpec()
    n = f.n
    if f.is_zero():
        return NormEstimate(0.0, np.zeros(n, dtype=complex), [], spec, 0.0, "np")
    dirs = sphere_directions(n, search.direction_count(n))
    cands = []
    for lv in search.levels:
        if lv == 0:
            cands.append(np.zeros(n, dtype=complex))
        else:
            cands.extend(lv * d for d in dirs)
    cands.extend(np.asarray(s, dtype=complex).reshape(n) for s in seeds)
    trace = [(a, np_integral(f, a, p, spec)) for a in cands]
    if not any(np.isfinite(v) for _, v in trace):
        raise ArithmeticError("no finite value found during the search")
    starts = _top_candidates(trace, search.refine_starts)
    rmax = max(search.max_radius, max(float(np.linalg.norm(a)) for a in cands) + 1e-9)
    rmax = min(rmax, 1 - 1e-9)
    a_best, v_best, evals = _maximize(lambda a: np_integral(f, a, p, spec), starts, n, rmax, search)
    trace.extend(evals)
    i = max(range(len(trace)), key=lambda k: trace[k][1])
    if trace[i][1] >= v_best:
        a_best, v_best = trace[i]
    return NormEstimate(math.sqrt(max(v_best, 0.0)), a_best, trace, spec, _tail(f), "np")


def _radius_grid() -> np.ndarray:
    return np.concatenate([np.linspace(0.0, 0.9, 10), 1.0 - np.geomspace(0.1, 1e-6, 60)])


def norm_bergman_type(f: HoloFunction, q: float, directions: int | None = None) -> NormEstimate:
    """``sup_z |f(z)| (1-|z|^2)^q`` by shell grid plus local refinement."""
    if q <= 0:
        raise ValueError(f"q must be positive, got {q}")
    n = f.n
    if f.is_zero():
        return NormEstimate(0.0, np.zeros(n, dtype=complex), [], None, 0.0, "bergman")
    dirs = sphere_directions(n, directions or (64 if n == 1 else 64))
    radii = _radius_grid()
    pts = radii[:, None, None] * dirs[None, :, :]
    vals = np.abs(f(pts)) * (1 - radii[:, None] ** 2) ** q
    flat = [(pts[i, j], float(vals[i, j])) for i in range(radii.size) for j in range(dirs.shape[0])]

    def obj(x):
        rho = float(np.linalg.norm(x))
        if rho == 0:
            return float(abs(f(np.zeros(n))[()]))
        z = math.tanh(rho) * (x[0::2] + 1j * x[1::2]) / rho
        return float(abs(f(z)[()]) * math.cosh(rho) ** (-2 * q))

    best_z, best_v = max(flat, key=lambda t: t[1])
    trace = []
    for z0 in _top_candidates(flat, 3):
        r = float(np.linalg.norm(z0))
        x0 = np.zeros(2 * n)
        if r > 0:
            v = z0 / r * math.atanh(min(r, 1 - 1e-15))
            x0[0::2], x0[1::2] = v.real, v.imag
        res = minimize(lambda x: -obj(x), x0, method="Nelder-Mead",
                       options={"initial_simplex": np.vstack([x0] + [x0 + 0.05 * e for e in np.eye(2 * n)]),
                                "xatol": 1e-10, "fatol": 1e-14, "maxfev": 2000})
        rho = float(np.linalg.norm(res.x))
        z = np.zeros(n, dtype=complex) if rho == 0 else math.tanh(rho) * (res.x[0::2] + 1j * res.x[1::2]) / rho
        trace.append((z, -res.fun))
        if -res.fun > best_v:
            best_z, best_v = z, -res.fun
    return NormEstimate(float(best_v), best_z, trace, None, _tail(f), "bergman")


def norm_sup(f: HoloFunction, directions: int | None = None) -> NormEstimate:
    """Lower bound for ``sup_B |f|`` from shells at 0.9, 0.99, 0.999.

    Coefficient-bearing functions are also maximized on the sphere itself
    (maximum modulus).
    """
    n = f.n
    if f.is_zero():
        return NormEstimate(0.0, np.zeros(n, dtype=complex), [], None, 0.0, "sup")
    dirs = sphere_directions(n, directions or (512 if n == 1 else 256))
    shells = np.array([0.9, 0.99, 0.999])
    pts = shells[:, None, None] * dirs[None]
    vals = np.abs(f(pts))
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    best_z, best_v = pts[i, j], float(vals[i, j])
    trace = [(best_z, best_v)]
    if as_polynomial(f) is not None:
        onsphere = np.abs(f(dirs))
        order = np.argsort(-onsphere)[:3]
        for k in order:
            if n == 1:
                t0 = float(np.angle(dirs[k, 0]))
                h = 2 * np.pi / dirs.shape[0]
                res = minimize_scalar(lambda t: -abs(f(np.array([np.exp(1j * t)]))[()]),
                                      bounds=(t0 - h, t0 + h), method="bounded",
                                      options={"xatol": 1e-12})
                z, v = np.array([np.exp(1j * res.x)]), -res.fun
            else:
                x0 = np.empty(2 * n)
                x0[0::2], x0[1::2] = dirs[k].real, dirs[k].imag

                def neg(x):
                    zz = (x[0::2] + 1j * x[1::2]) / np.linalg.norm(x)
                    return -abs(f(zz)[()])

                res = minimize(neg, x0, method="Nelder-Mead",
                               options={"xatol": 1e-10, "fatol": 1e-14, "maxfev": 4000})
                z = (res.x[0::2] + 1j * res.x[1::2]) / np.linalg.norm(res.x)
                v = -res.fun
            trace.append((z, v))
            if v > best_v:
                best_z, best_v = z, v
    return NormEstimate(best_v, best_z, trace, None, _tail(f), "sup")


# --- little space ------------------------------------------------------------------


@dataclass
class Np0Report:
    norm: float
    decay_trace: list
    dilation_trace: list
    decay_ok: bool
    dilation_ok: bool
    verdict: str
    thresholds: dict

    def to_dict(self) -> dict:
        return {
            "norm": self.norm,
            "decay_trace": [{"j": j, "value": v} for j, v in self.decay_trace],
            "dilation_trace": [{"r": r, "value": v} for r, v in self.dilation_trace],
            "decay_ok": self.decay_ok,
            "dilation_ok": self.dilation_ok,
            "verdict": self.verdict,
            "thresholds": self.thresholds,
        }


def boundary_trace(f: HoloFunction, p: float, spec: QuadSpec, jmax: int = 10, directions: int | None = None):
    """``max_direction I_f(a)`` at ``|a| = 1 - 2^-j``, j = 1..jmax."""
    dirs = sphere_directions(f.n, directions or (8 if f.n == 1 else 16))
    out = []
    for j in range(1, jmax + 1):
        r = 1.0 - 2.0**-j
        out.append((j, max(np_integral(f, r * d, p, spec) for d in dirs)))
    return out


def np0_test(
    f: HoloFunction,
    p: float,
    spec: QuadSpec | None = None,
    search: SearchSpec | None = None,
    eps_decay: float = 0.05,
    eps_dilation: float = 0.1,
    decreasing_from: int = 3,
    radii: Sequence[float] = (0.9, 0.99, 0.999),
    check_radius: float = 0.99,
) -> Np0Report:
    """Two independent little-space tests that must agree.

    Boundary decay: ``I_f(a_j)`` at ``|a_j| = 1 - 2^-j`` is decreasing from
    ``decreasing_from`` on and ends below ``eps_decay * ||f||_p^2``.
    Dilation: ``||f_r - f||_p`` decreases over ``radii`` and is below
    ``eps_dilation * ||f||_p`` at ``check_radius``.
    """
    spec = spec or QuadSpec()
    search = search or SearchSpec()
    thresholds = {"eps_decay": eps_decay, "eps_dilation": eps_dilation,
                  "decreasing_from": decreasing_from, "check_radius": check_radius}
    if f.is_zero():
        return Np0Report(0.0, [(j, 0.0) for j in range(1, 11)], [(r, 0.0) for r in radii],
                         True, True, "member", thresholds)
    norm = norm_np(f, p, search, spec).value
    decay = boundary_trace(f, p, spec)
    tail = [v for j, v in decay if j >= decreasing_from]
    decay_ok = all(b <= a for a, b in zip(tail, tail[1:])) and decay[-1][1] < eps_decay * norm**2
    dil = []
    for r in radii:
        diff = combine([(1.0, dilate(f, r)), (-1.0, f)])
        dil.append((r, norm_np(diff, p, search, spec).value))
    vals = [v for _, v in dil]
    at = dict(dil).get(check_radius, vals[-1])
    dilation_ok = all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:])) and at < eps_dilation * norm
    if decay_ok and dilation_ok:
        verdict = "member"
    elif not decay_ok and not dilation_ok:
        verdict = "non-member"
    else:
        verdict = "inconclusive"
    return Np0Report(norm, decay, dil, decay_ok, dilation_ok, verdict, thresholds)


# --- operator checks ----------------------------------------------------------------


def isometry_residual(
    f: HoloFunction,
    phi: Automorphism,
    p: float,
    spec: QuadSpec | None = None,
    search: SearchSpec | None = None,
) -> float:
    """``| ||W_phi f||_p - ||f||_p | / ||f||_p``."""
    if f.is_zero():
        raise ValueError("isometry residual is undefined for f = 0")
    nf = norm_np(f, p, search, spec).value
    nw = norm_np(weighted_compose(f, phi), p, search, spec).value
    return abs(nw - nf) / nf


@dataclass
class BoundReport:
    lhs: float
    rhs: float
    factor: float
    ratio: float
    holds: bool
    slack: float

    def to_dict(self) -> dict:
        return asdict(self)


def multiplier_check(
    u: HoloFunction,
    f: HoloFunction,
    p: float,
    spec: QuadSpec | None = None,
    search: SearchSpec | None = None,
    slack: float = 1e-9,
) -> BoundReport:
    """Check ``||u f||_p <= ||u||_inf ||f||_p``.

    ``ratio`` is ``||uf||_p / (||u||_inf ||f||_p)``, a lower bound on
    ``||M_u|| / ||u||_inf``. The search for ``||f||_p`` is seeded with the
    maximizer found for ``uf``.
    """
    uf = multiply(u, f)
    sup_u = norm_sup(u).value
    nuf = norm_np(uf, p, search, spec)
    nf = norm_np(f, p, search, spec, seeds=[nuf.argmax])
    rhs = sup_u * nf.value
    ratio = nuf.value / rhs if rhs > 0 else 0.0
    return BoundReport(nuf.value, rhs, sup_u, ratio, nuf.value <= rhs * (1 + slack), slack)


def composition_bound_check(
    phi: Automorphism,
    f: HoloFunction,
    p: float,
    spec: QuadSpec | None = None,
    search: SearchSpec | None = None,
    slack: float = 1e-4,
) -> BoundReport:
    """Check ``||f o phi||_p <= ((1+|a|)/(1-|a|))^((n+1)/2) ||f||_p``, ``a = phi^-1(0)``."""
    bound = composition_bound(phi.base)
    lhs = norm_np(composed(f, phi), p, search, spec).value
    nf = norm_np(f, p, search, spec).value
    rhs = bound * nf
    ratio = lhs / nf if nf > 0 else 0.0
    return BoundReport(lhs, rhs, bound, ratio, lhs <= rhs * (1 + slack), slack)


# --- small-p upper estimate ------------------------------------------------------------


def sphere_kernel_constant(
    n: int,
    p: float,
    a_radii: Sequence[float] = (0.0, 0.3, 0.6, 0.8, 0.9, 0.95, 0.99, 0.999),
    r_values: Sequence[float] = (0.1, 0.5, 0.9, 0.99, 0.999),
    spec: QuadSpec | None = None,
) -> float:
    """Sampled ``sup_{a,r} int_S (1-|a|^2)^p |1-<zeta, ra>|^(-2p) dsigma``.

    The integral only depends on ``|a|`` so one axis direction suffices.
    """
    e = np.zeros(n, dtype=complex)
    e[0] = 1
    return max(sphere_kernel_integral(s * e, r, p, spec) for s in a_radii for r in r_values)


def shell_sup_integral(f: HoloFunction, p: float, nodes: int = 64, directions: int | None = None) -> float:
    """``int_B (sup_{|w|=|z|} |f(w)|^2) (1-|z|^2)^p dV`` with shell maxima on a grid."""
    n = f.n
    t, wt = radial_rule(nodes, float(p), n)
    dirs = sphere_directions(n, directions or (1024 if n == 1 else 512))
    r = np.sqrt(t)
    shell_max = np.max(np.abs(f(r[:, None, None] * dirs[None])) ** 2, axis=1)
    return n * float(shell_max @ wt)


@dataclass
class SmallPReport:
    norm_sq: float
    constant: float
    shell_integral: float
    holds: bool

    def to_dict(self) -> dict:
        return asdict(self)


def small_p_estimate_check(
    f: HoloFunction,
    p: float,
    constant: float | None = None,
    spec: QuadSpec | None = None,
    search: SearchSpec | None = None,
    rtol: float = 1e-9,
) -> SmallPReport:
    """``||f||_p^2 <= C(n,p) int (sup_{|w|=|z|}|f(w)|^2)(1-|z|^2)^p dV`` for ``0 < p <= n``."""
    if not 0 < p <= f.n:
        raise ValueError(f"the estimate is stated for 0 < p <= n; got p={p}, n={f.n}")
    c = sphere_kernel_constant(f.n, p, spec=spec) if constant is None else constant
    nsq = norm_np(f, p, search, spec).value ** 2
    rhs = shell_sup_integral(f, p)
    return SmallPReport(nsq, c, rhs, nsq <= c * rhs * (1 + rtol))
