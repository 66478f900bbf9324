"""Exact geometry of the unit ball of C^n.

Points are complex numpy arrays whose last axis has length ``n``. Every
map here is vectorized over leading axes of ``z``; base points (``a``,
``w``) are single points.

The involutive automorphism used throughout is::

    phi_a(z) = (a - P_a z - s_a Q_a z) / (1 - <z, a>),  s_a = sqrt(1 - |a|^2)

with ``P_a`` the orthogonal projection onto span{a} and ``Q_a = I - P_a``.
``phi_0`` is ``-identity``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

BOUNDARY_TOL = 1e-14
UNITARY_TOL = 1e-12
COMPOSE_TOL = 1e-10


class DimensionError(ValueError):
    """Points or maps of different dimensions were combined."""


class BoundaryError(ValueError):
    """A point lies on or outside the unit sphere."""


class NumericError(ArithmeticError):
    """A numerical procedure failed to meet its own residual check."""


def ball_point(z, n: int | None = None) -> np.ndarray:
    """Validate ``z`` as a single point of the open ball and return it.

    Points with ``1 - |z|^2 < 1e-14`` are rejected since every formula
    in the package is singular at the boundary.
    """
    z = np.atleast_1d(np.asarray(z, dtype=complex))
    if z.ndim != 1:
        raise DimensionError(f"expected a single point, got shape {z.shape}")
    if n is not None and z.shape[0] != n:
        raise DimensionError(f"expected dimension {n}, got {z.shape[0]}")
    if 1.0 - np.vdot(z, z).real < BOUNDARY_TOL:
        raise BoundaryError(f"point {z} is not inside the unit ball")
    return z


def sphere_point(xi, n: int | None = None) -> np.ndarray:
    """Validate ``xi`` as a point of the unit sphere (|xi| = 1 to 1e-12)."""
    xi = np.atleast_1d(np.asarray(xi, dtype=complex))
    if xi.ndim != 1:
        raise DimensionError(f"expected a single point, got shape {xi.shape}")
    if n is not None and xi.shape[0] != n:
        raise DimensionError(f"expected dimension {n}, got {xi.shape[0]}")
    if abs(np.linalg.norm(xi) - 1.0) > 1e-12:
        raise BoundaryError(f"point {xi} is not on the unit sphere")
    return xi


def inner(z, w) -> np.ndarray:
    """Hermitian product <z, w> = sum_j z_j conj(w_j) over the last axis."""
    return np.sum(np.asarray(z) * np.conj(w), axis=-1)


def sqnorm(z) -> np.ndarray:
    z = np.asarray(z)
    return np.sum(z.real**2 + z.imag**2, axis=-1)


def _check_dims(a: np.ndarray, z: np.ndarray) -> None:
    if z.shape[-1] != a.shape[0]:
        raise DimensionError(
            f"dimension mismatch: base point has n={a.shape[0]}, "
            f"argument has n={z.shape[-1]}"
        )


def mobius_eval(a, z) -> np.ndarray:
    """Evaluate the involution ``phi_a`` at ``z`` (shape ``(..., n)``)."""
    a = ball_point(a)
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z[None]
    _check_dims(a, z)
    aa = np.vdot(a, a).real
    if aa == 0.0:
        return -z
    if a.shape[0] == 1:
        # P_a is the identity in one variable
        return (a[0] - z) / (1.0 - z * np.conj(a[0]))
    za = inner(z, a)[..., None]
    pz = za / aa * a
    qz = z - pz
    return (a - pz - np.sqrt(1.0 - aa) * qz) / (1.0 - za)


def mobius_factor(a, z, p: float) -> np.ndarray:
    """Return ``(1 - |phi_a(z)|^2)^p`` from the closed form.

    The closed form is ``((1-|a|^2)(1-|z|^2) / |1-<z,a>|^2)^p``; it never
    forms ``phi_a(z)`` and stays accurate where ``|phi_a(z)|`` is near 1.
    """
    if p <= 0:
        raise ValueError(f"p must be positive, got {p}")
    a = ball_point(a)
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z[None]
    _check_dims(a, z)
    num = (1.0 - np.vdot(a, a).real) * (1.0 - sqnorm(z))
    return (num / np.abs(1.0 - inner(z, a)) ** 2) ** p


def kernel_eval(w, z) -> np.ndarray:
    """Normalized Bergman kernel ``k_w(z) = ((1-|w|^2)/(1-<z,w>)^2)^((n+1)/2)``.

    Evaluated as ``(1-|w|^2)^((n+1)/2) * (1-<z,w>)^-(n+1)``, which is the
    principal branch because ``Re(1 - <z,w>) > 0`` on the ball.
    """
    w = ball_point(w)
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z[None]
    _check_dims(w, z)
    n = w.shape[0]
    scale = (1.0 - np.vdot(w, w).real) ** ((n + 1) / 2)
    return scale * (1.0 - inner(z, w)) ** (-(n + 1))


def axis_unitary(v) -> np.ndarray:
    """Unitary ``U`` whose first column is ``v/|v|`` (identity for v = 0)."""
    v = np.atleast_1d(np.asarray(v, dtype=complex))
    n = v.shape[0]
    nv = np.linalg.norm(v)
    if nv == 0.0:
        return np.eye(n, dtype=complex)
    e = v / nv
    if n == 1:
        return e.reshape(1, 1)
    if n == 2:
        return np.array([[e[0], -np.conj(e[1])], [e[1], np.conj(e[0])]])
    # Householder-free route: QR of [e | I] keeps e (up to phase) as column 0.
    q, _ = np.linalg.qr(np.column_stack([e, np.eye(n, dtype=complex)]))
    q = q[:, :n]
    q[:, 0] *= np.vdot(q[:, 0], e) / abs(np.vdot(q[:, 0], e))
    return q


@dataclass(frozen=True, eq=False)
class Automorphism:
    """The automorphism ``z -> U phi_a(z)`` of the ball.

    ``base`` is the point sent to 0; ``unitary`` is ``U``.
    """

    base: np.ndarray
    unitary: np.ndarray = field(default=None)

    def __post_init__(self):
        base = ball_point(self.base)
        n = base.shape[0]
        u = self.unitary
        u = np.eye(n, dtype=complex) if u is None else np.asarray(u, dtype=complex)
        if u.shape != (n, n):
            raise DimensionError(f"unitary must be {n}x{n}, got {u.shape}")
        if np.max(np.abs(u @ u.conj().T - np.eye(n))) > UNITARY_TOL:
            raise ValueError("matrix is not unitary to 1e-12")
        object.__setattr__(self, "base", base)
        object.__setattr__(self, "unitary", u)

    @property
    def n(self) -> int:
        return self.base.shape[0]

    @classmethod
    def identity(cls, n: int) -> "Automorphism":
        # phi_0 = -I, so U = -I undoes it
        return cls(np.zeros(n, dtype=complex), -np.eye(n, dtype=complex))

    @classmethod
    def involution(cls, a) -> "Automorphism":
        return cls(ball_point(a))

    @classmethod
    def rotation(cls, u) -> "Automorphism":
        u = np.asarray(u, dtype=complex)
        return cls(np.zeros(u.shape[0], dtype=complex), -u)

    def __call__(self, z) -> np.ndarray:
        w = mobius_eval(self.base, z)
        return w @ self.unitary.T

    def inverse_eval(self, z) -> np.ndarray:
        z = np.asarray(z, dtype=complex)
        return mobius_eval(self.base, z @ self.unitary.conj())

    def inverse(self) -> "Automorphism":
        return _recover(self.inverse_eval, self(np.zeros(self.n)), self.n)

    def __repr__(self) -> str:
        return f"Automorphism(base={self.base!r}, unitary={self.unitary!r})"


def _recover(mapping, base, n: int) -> Automorphism:
    """Write an automorphism given pointwise as ``U phi_b``.

    ``mapping o phi_b`` fixes 0, so it is a unitary; its columns are read
    off at ``0.5 e_j`` and then polished to the nearest unitary.
    """
    base = ball_point(base, n)
    probes = 0.5 * np.eye(n, dtype=complex)
    cols = mapping(mobius_eval(base, probes)) / 0.5
    u_raw = cols.T
    left, _, right = np.linalg.svd(u_raw)
    u = left @ right
    rng = np.random.default_rng(12345)
    pts = rng.normal(size=(20, n)) + 1j * rng.normal(size=(20, n))
    pts *= (0.9 * rng.random((20, 1)) ** (1 / (2 * n))) / np.linalg.norm(pts, axis=1, keepdims=True)
    resid = np.max(np.abs(mapping(pts) - mobius_eval(base, pts) @ u.T))
    if resid > COMPOSE_TOL:
        raise NumericError(f"unitary recovery residual {resid:.3e} exceeds {COMPOSE_TOL}")
    return Automorphism(base, u)


def compose(outer: Automorphism, inner_map: Automorphism) -> Automorphism:
    """Return ``outer o inner_map`` in the normal form ``U' phi_b``."""
    if outer.n != inner_map.n:
        raise DimensionError(f"cannot compose n={outer.n} with n={inner_map.n}")
    b = inner_map.inverse_eval(outer.inverse_eval(np.zeros(outer.n, dtype=complex)))
    return _recover(lambda z: outer(inner_map(z)), b, outer.n)


def composition_bound(a) -> float:
    """Norm of the composition operator ``f -> f o Phi`` with ``Phi^-1(0) = a``."""
    a = ball_point(a)
    r = np.linalg.norm(a)
    return float(((1 + r) / (1 - r)) ** ((a.shape[0] + 1) / 2))
