"""Points of the Riemann sphere, Moebius maps, and membership in Omega.

A point of the Riemann sphere is either a Python ``complex`` or the
singleton :data:`INF`.  Omega is the set of pairs ``(z, w)`` with
``z * w != 1`` where products involving infinity follow the conventions

    z * inf = inf * z = inf    (z != 0)
    0 * inf = inf * 0 = 1

These conventions are only meaningful for deciding membership, so the only
arithmetic exposed on extended points is :func:`ext_mul`.
"""

from __future__ import annotations

import cmath
from collections import namedtuple
from dataclasses import dataclass
from numbers import Number
from typing import Union

import numpy as np

__all__ = [
    "INF",
    "Infinity",
    "ExtComplex",
    "DomainError",
    "DegenerateMapError",
    "OmegaPoint",
    "MobiusMap",
    "ext",
    "is_inf",
    "ext_isclose",
    "ext_reciprocal",
    "ext_mul",
    "chordal_distance",
    "in_omega",
    "in_omega_plus",
    "in_omega_minus",
    "mobius_apply",
    "mobius_compose",
    "mobius_inverse",
    "mobius_tilde",
    "mobius_fit_three_points",
    "ext_to_json",
    "ext_from_json",
]


class DomainError(ValueError):
    """A point lies outside the domain an operation is defined on."""


class DegenerateMapError(ValueError):
    """A Moebius matrix is (numerically) singular."""


class Infinity:
    """The point at infinity of the Riemann sphere (a singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INF"

    def __reduce__(self):
        return (Infinity, ())


INF = Infinity()

ExtComplex = Union[complex, Infinity]


def ext(x) -> ExtComplex:
    """Coerce ``x`` to an extended complex number.

    Accepts numbers, :data:`INF`, IEEE infinities and the string ``"inf"``.
    NaN components are rejected.
    """
    if x is INF:
        return INF
    if isinstance(x, str):
        s = x.strip().lower()
        if s in ("inf", "infinity", "∞"):
            return INF
        x = complex(s.replace("i", "j"))
    if not isinstance(x, Number):
        # numpy 0-d arrays and the like
        x = complex(x)
    x = complex(x)
    if cmath.isnan(x):
        raise ValueError("NaN is not a point of the Riemann sphere")
    if cmath.isinf(x):
        return INF
    return x


def is_inf(z) -> bool:
    return z is INF


def ext_isclose(a: ExtComplex, b: ExtComplex, tol: float = 1e-12) -> bool:
    """Infinity compares by tag, finite values by absolute tolerance."""
    if a is INF or b is INF:
        return a is b
    return abs(a - b) <= tol


def ext_reciprocal(z: ExtComplex) -> ExtComplex:
    """``1/z`` on the sphere, with ``1/0 = inf`` and ``1/inf = 0``."""
    if z is INF:
        return 0j
    if z == 0:
        return INF
    return ext(1 / z)


def ext_mul(z: ExtComplex, w: ExtComplex) -> ExtComplex:
    """Product with the Omega-membership conventions for infinity.

    Total on the sphere and commutative.  Use this only to decide whether
    ``z * w == 1``; ``0 * inf = 1`` is not a general arithmetic rule.
    """
    z, w = ext(z), ext(w)
    if z is INF and w is INF:
        return INF
    if z is INF or w is INF:
        other = w if z is INF else z
        return 1 + 0j if other == 0 else INF
    return z * w


def chordal_distance(a: ExtComplex, b: ExtComplex) -> float:
    """Chordal distance on the sphere of diameter 2."""
    if a is INF and b is INF:
        return 0.0
    if a is INF:
        a, b = b, a
    if b is INF:
        return 2.0 / np.hypot(1.0, abs(a))
    if abs(a) > 1 and abs(b) > 1:
        # the metric is invariant under z -> 1/z; avoids overflow for huge values
        a, b = 1 / a, 1 / b
    return 2.0 * abs(a - b) / (np.hypot(1.0, abs(a)) * np.hypot(1.0, abs(b)))


def in_omega(z, w) -> bool:
    return ext_mul(z, w) != 1


def in_omega_plus(z, w) -> bool:
    return in_omega(z, w) and ext(w) is not INF


def in_omega_minus(z, w) -> bool:
    return in_omega(z, w) and ext(z) is not INF


class OmegaPoint(namedtuple("OmegaPoint", "z w")):
    """A validated point ``(z, w)`` of Omega."""

    __slots__ = ()

    def __new__(cls, z, w):
        z, w = ext(z), ext(w)
        if not in_omega(z, w):
            raise DomainError(f"({z!r}, {w!r}) is not in Omega: z*w = 1")
        return super().__new__(cls, z, w)


@dataclass(frozen=True)
class MobiusMap:
    """``z -> (a z + b) / (c z + d)`` stored as an un-normalized matrix.

    Calling the map on :data:`INF` or a Python number uses the exact
    extended rules; calling it on a numpy array evaluates the fraction
    elementwise (finite inputs only, poles come out as non-finite values).
    """

    a: complex
    b: complex
    c: complex
    d: complex
    det_floor: float = 1e-12

    def __post_init__(self):
        for name in "abcd":
            v = complex(getattr(self, name))
            if not cmath.isfinite(v):
                raise ValueError(f"Moebius entry {name} must be finite, got {v}")
            object.__setattr__(self, name, v)
        if abs(self.det) < self.det_floor:
            raise DegenerateMapError(f"determinant {self.det:.3g} below floor {self.det_floor:g}")

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m, det_floor: float = 1e-12) -> "MobiusMap":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1], det_floor=det_floor)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    def normalized(self) -> "MobiusMap":
        """Same map scaled to determinant one."""
        s = cmath.sqrt(self.det)
        return MobiusMap(self.a / s, self.b / s, self.c / s, self.d / s)

    def pole(self) -> ExtComplex:
        """The point sent to infinity."""
        return INF if self.c == 0 else -self.d / self.c

    def __call__(self, z):
        if isinstance(z, np.ndarray):
            with np.errstate(divide="ignore", invalid="ignore"):
                return (self.a * z + self.b) / (self.c * z + self.d)
        z = ext(z)
        if z is INF:
            return INF if self.c == 0 else ext(self.a / self.c)
        den = self.c * z + self.d
        if den == 0:
            return INF
        # overflow to an IEEE infinity is the point at infinity
        return ext((self.a * z + self.b) / den)

    def derivative(self, z):
        """``det / (c z + d)**2`` for finite ``z``."""
        return self.det / (self.c * z + self.d) ** 2

    def __matmul__(self, other: "MobiusMap") -> "MobiusMap":
        return mobius_compose(self, other)

    def inverse(self) -> "MobiusMap":
        return mobius_inverse(self)

    def tilde(self) -> "MobiusMap":
        return mobius_tilde(self)

    def acts_like(self, other: "MobiusMap", points=None, tol: float = 1e-12) -> bool:
        """Projective equality checked on sample points (chordal metric)."""
        if points is None:
            points = [0j, 1 + 0j, -1 + 0j, 1j, 0.3 - 0.7j, 2.5 + 1j, INF]
        return all(chordal_distance(self(p), other(p)) <= tol for p in points)

    def to_json(self) -> dict:
        return {k: ext_to_json(getattr(self, k)) for k in "abcd"}

    @classmethod
    def from_json(cls, obj: dict) -> "MobiusMap":
        vals = [ext_from_json(obj[k]) for k in "abcd"]
        if any(v is INF for v in vals):
            raise ValueError("Moebius entries must be finite")
        return cls(*vals)


def mobius_apply(psi: MobiusMap, z):
    return psi(z)


def mobius_compose(psi1: MobiusMap, psi2: MobiusMap) -> MobiusMap:
    """``psi1 o psi2``."""
    return MobiusMap.from_matrix(psi1.matrix @ psi2.matrix, det_floor=min(psi1.det_floor, psi2.det_floor))


def mobius_inverse(psi: MobiusMap) -> MobiusMap:
    # adjugate; scale is irrelevant projectively
    return MobiusMap(psi.d, -psi.b, -psi.c, psi.a, det_floor=psi.det_floor)


def mobius_tilde(psi: MobiusMap) -> MobiusMap:
    """The conjugate ``w -> 1 / psi(1 / w)``, i.e. entries ``(d, c; b, a)``."""
    return MobiusMap(psi.d, psi.c, psi.b, psi.a, det_floor=psi.det_floor)


def _to_zero_one_inf(z1: ExtComplex, z2: ExtComplex, z3: ExtComplex) -> np.ndarray:
    """Matrix of the map sending z1, z2, z3 to 0, 1, inf."""
    if z1 is INF:
        return np.array([[0, z2 - z3], [1, -z3]], dtype=complex)
    if z2 is INF:
        return np.array([[1, -z1], [1, -z3]], dtype=complex)
    if z3 is INF:
        return np.array([[1, -z1], [0, z2 - z1]], dtype=complex)
    return np.array([[z2 - z3, -z1 * (z2 - z3)], [z2 - z1, -z3 * (z2 - z1)]], dtype=complex)


def _check_distinct(pts, what, tol):
    for i in range(3):
        for j in range(i + 1, 3):
            if ext_isclose(pts[i], pts[j], tol):
                raise DegenerateMapError(f"{what} points {i} and {j} coincide")


def mobius_fit_three_points(pairs, tol: float = 1e-12) -> MobiusMap:
    """The unique Moebius map sending three sources to three targets.

    ``pairs`` is a sequence of three ``(source, target)`` tuples.
    """
    if len(pairs) != 3:
        raise ValueError("exactly three (source, target) pairs are required")
    src = [ext(s) for s, _ in pairs]
    dst = [ext(t) for _, t in pairs]
    _check_distinct(src, "source", tol)
    _check_distinct(dst, "target", tol)
    m_src = _to_zero_one_inf(*src)
    m_dst = _to_zero_one_inf(*dst)
    adj = np.array([[m_dst[1, 1], -m_dst[0, 1]], [-m_dst[1, 0], m_dst[0, 0]]])
    m = adj @ m_src
    # keep entries O(1) so the determinant floor is meaningful
    m = m / np.max(np.abs(m))
    return MobiusMap.from_matrix(m)


def ext_to_json(z: ExtComplex):
    z = ext(z)
    if z is INF:
        return "inf"
    return {"re": z.real, "im": z.imag}


def ext_from_json(obj) -> ExtComplex:
    if isinstance(obj, str):
        if obj.strip().lower() == "inf":
            return INF
        raise ValueError(f"bad extended complex encoding {obj!r}")
    if isinstance(obj, dict):
        return ext(complex(obj["re"], obj.get("im", 0.0)))
    if isinstance(obj, (list, tuple)) and len(obj) == 2:
        return ext(complex(obj[0], obj[1]))
    if isinstance(obj, (int, float)):
        return ext(obj)
    raise ValueError(f"bad extended complex encoding {obj!r}")
