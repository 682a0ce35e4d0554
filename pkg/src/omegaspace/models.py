"""Transport maps between Omega and its equivalent models.

* ``psi_plus`` / ``psi_minus``: Omega_+ and Omega_- onto C^2,
* ``to_config`` / ``from_config``: Omega onto the configuration space
  ``G = {z != w}`` via ``(z, w) -> (z, 1/w)``,
* ``stereographic_S`` / ``stereographic_pi``: Omega onto the complex
  two-sphere ``z1^2 + z2^2 + z3^2 = 1``.

The stereographic formulas are evaluated in whichever sphere chart keeps the
coordinates of modulus at most one, so the infinity branches are the exact
limits of the finite ones and points near infinity stay accurate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .riemann_core import (
    INF,
    DomainError,
    OmegaPoint,
    ext,
    ext_reciprocal,
    ext_to_json,
    ext_from_json,
    in_omega,
    in_omega_minus,
    in_omega_plus,
)

__all__ = [
    "SpherePoint",
    "ComplexRotation",
    "FitError",
    "psi_plus",
    "psi_plus_inv",
    "psi_minus",
    "psi_minus_inv",
    "to_config",
    "from_config",
    "stereographic_S",
    "stereographic_pi",
    "fit_so3",
    "FIT_POINTS",
    "HOLDOUT_POINTS",
]

QUADRIC_TOL = 1e-10
SINGULAR_TOL = 1e-13


class FitError(RuntimeError):
    """A map could not be represented by a complex orthogonal matrix."""


@dataclass(frozen=True)
class SpherePoint:
    z1: complex
    z2: complex
    z3: complex

    def __post_init__(self):
        for name in ("z1", "z2", "z3"):
            object.__setattr__(self, name, complex(getattr(self, name)))
        r = self.quadric_residual()
        if not r < QUADRIC_TOL:
            raise DomainError(f"point is off the complex sphere (|z1^2+z2^2+z3^2-1| = {r:.3g})")

    def quadric_residual(self) -> float:
        return abs(self.z1**2 + self.z2**2 + self.z3**2 - 1)

    def as_array(self) -> np.ndarray:
        return np.array([self.z1, self.z2, self.z3])

    def to_json(self) -> dict:
        return {"z1": ext_to_json(self.z1), "z2": ext_to_json(self.z2), "z3": ext_to_json(self.z3)}

    @classmethod
    def from_json(cls, obj) -> "SpherePoint":
        return cls(*(ext_from_json(obj[k]) for k in ("z1", "z2", "z3")))


@dataclass(frozen=True, eq=False)
class ComplexRotation:
    """A complex orthogonal 3x3 matrix, ``R^T R = I``.

    ``proper`` tells whether ``det R = +1``; Moebius automorphisms that swap
    the coordinates land on the ``det R = -1`` component.
    """

    R: np.ndarray
    tol: float = 1e-8

    def __post_init__(self):
        R = np.array(self.R, dtype=complex)
        if R.shape != (3, 3):
            raise ValueError("rotation matrix must be 3x3")
        object.__setattr__(self, "R", R)
        if self.orthogonality_error() >= self.tol:
            raise FitError(f"matrix is not complex orthogonal (|R^T R - I| = {self.orthogonality_error():.3g})")
        if min(abs(self.det - 1), abs(self.det + 1)) >= self.tol:
            raise FitError(f"determinant {self.det} is not +-1")

    @property
    def det(self) -> complex:
        return complex(np.linalg.det(self.R))

    @property
    def proper(self) -> bool:
        return abs(self.det - 1) < self.tol

    def orthogonality_error(self) -> float:
        return float(np.max(np.abs(self.R.T @ self.R - np.eye(3))))

    def __matmul__(self, other: "ComplexRotation") -> "ComplexRotation":
        return ComplexRotation(self.R @ other.R, tol=max(self.tol, other.tol))

    def apply(self, s: SpherePoint) -> SpherePoint:
        return SpherePoint(*(self.R @ s.as_array()))


def psi_plus(z, w) -> tuple[complex, complex]:
    """``(z, w) -> (z / (1 - z w), w)`` on Omega_+."""
    z, w = ext(z), ext(w)
    if not in_omega_plus(z, w):
        raise DomainError(f"({z!r}, {w!r}) is not in Omega_+")
    if z is INF:
        return -1 / w, w
    return z / (1 - z * w), w


def psi_plus_inv(u, v) -> OmegaPoint:
    """``(u, v) -> (u / (1 + u v), v)``; total on C^2."""
    u, v = complex(u), complex(v)
    den = 1 + u * v
    return OmegaPoint(INF if den == 0 else u / den, v)


def psi_minus(z, w) -> tuple[complex, complex]:
    """``(z, w) -> (z, w / (1 - z w))`` on Omega_-."""
    z, w = ext(z), ext(w)
    if not in_omega_minus(z, w):
        raise DomainError(f"({z!r}, {w!r}) is not in Omega_-")
    if w is INF:
        return z, -1 / z
    return z, w / (1 - z * w)


def psi_minus_inv(u, v) -> OmegaPoint:
    u, v = complex(u), complex(v)
    den = 1 + u * v
    return OmegaPoint(u, INF if den == 0 else v / den)


def to_config(z, w) -> tuple:
    """Omega -> G, ``(z, w) -> (z, 1/w)``."""
    z, w = ext(z), ext(w)
    if not in_omega(z, w):
        raise DomainError(f"({z!r}, {w!r}) is not in Omega")
    return z, ext_reciprocal(w)


def from_config(z, w, tol: float = 0.0) -> OmegaPoint:
    """G -> Omega, inverse of :func:`to_config`."""
    z, w = ext(z), ext(w)
    if (z is INF and w is INF) or (z is not INF and w is not INF and abs(z - w) <= tol):
        raise DomainError(f"({z!r}, {w!r}) is on the diagonal, not in G")
    return OmegaPoint(z, ext_reciprocal(w))


def _chart_coordinate(x):
    """``(x, False)`` if ``|x| <= 1`` else ``(1/x, True)``; inf maps to ``(0, True)``."""
    if x is INF:
        return 0j, True
    if abs(x) <= 1:
        return x, False
    return 1 / x, True


def stereographic_S(z, w) -> SpherePoint:
    """The biholomorphism Omega -> complex two-sphere.

    For finite points this is ``((z-w)/(1-zw), -i(z+w)/(1-zw), -(1+zw)/(1-zw))``;
    the ``w = inf`` and ``z = inf`` branches are ``(1/z, i/z, 1)`` and
    ``(-1/w, i/w, 1)``.
    """
    z, w = ext(z), ext(w)
    if not in_omega(z, w):
        raise DomainError(f"({z!r}, {w!r}) is not in Omega")
    a, za = _chart_coordinate(z)
    b, wb = _chart_coordinate(w)
    # numerator/denominator of the finite formula multiplied through by
    # the inverted coordinates, then evaluated with |a|, |b| <= 1
    if not za and not wb:
        n1, n2, n3, den = a - b, a + b, 1 + a * b, 1 - a * b
    elif za and not wb:
        n1, n2, n3, den = 1 - b * a, 1 + b * a, a + b, a - b
    elif not za and wb:
        n1, n2, n3, den = a * b - 1, a * b + 1, b + a, b - a
    else:
        n1, n2, n3, den = b - a, b + a, a * b + 1, a * b - 1
    if abs(den) < SINGULAR_TOL:
        raise DomainError(f"({z!r}, {w!r}) is numerically on z*w = 1")
    return SpherePoint(n1 / den, -1j * n2 / den, -n3 / den)


def stereographic_pi(s: SpherePoint) -> OmegaPoint:
    """Complex stereographic projection, inverse of :func:`stereographic_S`.

    On the quadric ``(z1 + i z2)(z1 - i z2) = (1 - z3)(1 + z3)``, so each
    coordinate has two equivalent quotient forms; the one with the larger
    denominator is used and a vanishing denominator gives infinity.
    """
    if not isinstance(s, SpherePoint):
        s = SpherePoint(*s)
    plus = s.z1 + 1j * s.z2
    minus = s.z1 - 1j * s.z2
    d_low = 1 - s.z3
    d_high = 1 + s.z3

    def quotient(n1, d1, n2, d2):
        if abs(d1) >= abs(d2):
            return INF if abs(d1) < SINGULAR_TOL else n1 / d1
        return INF if abs(d2) < SINGULAR_TOL else n2 / d2

    z = quotient(plus, d_low, d_high, minus)
    w = quotient(-minus, d_low, -d_high, plus)
    if z is not INF and w is not INF:
        return OmegaPoint(z, w)
    return OmegaPoint(ext(z), ext(w))


FIT_POINTS = [
    (0.13 + 0.21j, -0.32 + 0.07j),
    (-0.41 + 0.18j, 0.26 - 0.35j),
    (0.52 - 0.11j, 0.09 + 0.44j),
    (-0.07 - 0.48j, -0.23 - 0.16j),
    (0.31 + 0.39j, 0.47 + 0.12j),
    (-0.28 - 0.05j, -0.51 + 0.29j),
]

HOLDOUT_POINTS = [
    (0.21 - 0.33j, 0.14 + 0.27j),
    (-0.36 + 0.42j, -0.12 - 0.38j),
    (0.44 + 0.06j, -0.29 + 0.19j),
    (-0.17 - 0.24j, 0.38 - 0.08j),
]


def fit_so3(T, tol: float = 1e-8) -> ComplexRotation:
    """Recover the orthogonal matrix ``R`` with ``S(T(p)) = R S(p)``.

    ``T`` maps an Omega point ``(z, w)`` to an Omega point.  The matrix is
    fitted by least squares on six fixed points and checked on four held-out
    points; a map outside the Moebius subgroup fails the check.
    """
    def images(points):
        src = np.array([stereographic_S(z, w).as_array() for z, w in points])
        dst = np.array([stereographic_S(*T(OmegaPoint(z, w))).as_array() for z, w in points])
        return src, dst

    X, Y = images(FIT_POINTS)
    Rt, *_ = np.linalg.lstsq(X, Y, rcond=None)
    R = Rt.T
    Xh, Yh = images(HOLDOUT_POINTS)
    scale = max(1.0, float(np.max(np.abs(Yh))))
    resid = float(np.max(np.abs(Xh @ R.T - Yh))) / scale
    if resid >= tol:
        raise FitError(f"held-out fit residual {resid:.3g} exceeds {tol:g}: map is not linear on the sphere")
    return ComplexRotation(R, tol=tol)
