"""Schauder basis of holomorphic functions on Omega.

The basis is ``f_{p,q}(z, w) = z^p w^q / (1 - z w)^max(p, q)``.  It is the
image of the monomial basis ``u^p v^q`` of entire functions under the
isomorphism that uses ``Psi_+`` on the index set ``p >= q`` and ``Psi_-``
on ``p < q``.  Coefficients are read off the Taylor coefficients of
``f o Psi_+^{-1}`` (for ``p >= q``) and ``f o Psi_-^{-1}`` (for ``p < q``),
both entire, by a two-dimensional FFT on a torus.

Naming of the two halves: *future* is the index set ``p >= q`` (the
``Psi_+`` side) and *past* is ``p < q`` (the ``Psi_-`` side).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .calculus import BivariateFunction, Domain, as_bivariate
from .riemann_core import INF, DomainError, ext, in_omega

__all__ = [
    "Basis",
    "CoeffArray",
    "FourierRestriction",
    "basis_eval",
    "basis_function",
    "series_eval",
    "project_past",
    "project_future",
    "phi_map",
    "phi_inv_map",
    "extract_coeffs",
    "taylor_coeffs_entire",
    "fourier_restrict",
]


class Basis(enum.Enum):
    MONOMIAL = "monomial"
    SCHAUDER = "schauder"


@dataclass(frozen=True, eq=False)
class CoeffArray:
    """Truncated coefficient table ``a[p, q]``, ``0 <= p, q <= N``."""

    a: np.ndarray
    basis: Basis = Basis.SCHAUDER

    def __post_init__(self):
        a = np.array(self.a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"coefficient table must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValueError("coefficients must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "basis", Basis(self.basis))

    @property
    def N(self) -> int:
        return self.a.shape[0] - 1

    @classmethod
    def zeros(cls, N: int, basis: Basis = Basis.SCHAUDER) -> "CoeffArray":
        return cls(np.zeros((N + 1, N + 1), dtype=complex), basis)

    @classmethod
    def unit(cls, N: int, p: int, q: int, basis: Basis = Basis.SCHAUDER) -> "CoeffArray":
        a = np.zeros((N + 1, N + 1), dtype=complex)
        a[p, q] = 1
        return cls(a, basis)

    def with_basis(self, basis: Basis) -> "CoeffArray":
        return CoeffArray(self.a, basis)

    def __add__(self, other: "CoeffArray") -> "CoeffArray":
        if self.basis is not other.basis or self.N != other.N:
            raise ValueError("can only add arrays of the same basis and order")
        return CoeffArray(self.a + other.a, self.basis)

    def max_abs_diff(self, other: "CoeffArray") -> float:
        return float(np.max(np.abs(self.a - other.a)))

    def to_json(self) -> dict:
        flat = self.a.reshape(-1)
        return {
            "N": self.N,
            "basis": self.basis.value,
            "coeffs": [[float(c.real), float(c.imag)] for c in flat],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "CoeffArray":
        N = int(obj["N"])
        coeffs = obj["coeffs"]
        if len(coeffs) != (N + 1) ** 2:
            raise ValueError(f"expected {(N + 1) ** 2} coefficients for N = {N}, got {len(coeffs)}")
        a = np.array([complex(re, im) for re, im in coeffs]).reshape(N + 1, N + 1)
        return cls(a, Basis(obj["basis"]))


def _generators(z, w):
    """``(f_{1,0}, f_{0,1}, f_{1,1})`` at a point of Omega, infinity included."""
    if z is INF and w is INF:
        return 0j, 0j, -1 + 0j
    if w is INF:
        return 0j, -1 / z, -1 + 0j
    if z is INF:
        return -1 / w, 0j, -1 + 0j
    d = 1 - z * w
    return z / d, w / d, z * w / d


def _from_generators(p, q, f10, f01, f11):
    if p >= q:
        return f10 ** (p - q) * f11**q
    return f01 ** (q - p) * f11**p


def basis_eval(p: int, q: int, z, w):
    """``f_{p,q}(z, w)``.

    Scalars may be :data:`INF`; numpy arrays are evaluated elementwise and
    must be finite.
    """
    if p < 0 or q < 0:
        raise ValueError("basis indices must be nonnegative")
    if isinstance(z, np.ndarray) or isinstance(w, np.ndarray):
        z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
        d = 1 - z * w
        return z**p * w**q / d ** max(p, q)
    z, w = ext(z), ext(w)
    if not in_omega(z, w):
        raise DomainError(f"({z!r}, {w!r}) is not in Omega")
    return complex(_from_generators(p, q, *_generators(z, w)))


def basis_function(p: int, q: int) -> BivariateFunction:
    return BivariateFunction(lambda z, w: basis_eval(p, q, z, w), Domain.OMEGA, f"f[{p},{q}]")


def series_eval(S: CoeffArray, z, w):
    """``sum a[p, q] f_{p,q}(z, w)`` over the truncation, p-major order."""
    if S.basis is not Basis.SCHAUDER:
        raise ValueError("series_eval expects a Schauder-basis array")
    if isinstance(z, np.ndarray) or isinstance(w, np.ndarray):
        z, w = np.broadcast_arrays(np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        d = 1 - z * w
        gens = (z / d, w / d, z * w / d)
    else:
        z, w = ext(z), ext(w)
        if not in_omega(z, w):
            raise DomainError(f"({z!r}, {w!r}) is not in Omega")
        gens = _generators(z, w)
    f10, f01, f11 = gens
    N = S.N
    # powers of the generators, reused across the table
    p10 = [np.ones_like(f10)]
    p01 = [np.ones_like(f01)]
    p11 = [np.ones_like(f11)]
    for _ in range(N):
        p10.append(p10[-1] * f10)
        p01.append(p01[-1] * f01)
        p11.append(p11[-1] * f11)
    total = np.zeros_like(f11 * 1.0)
    for p in range(N + 1):
        for q in range(N + 1):
            c = S.a[p, q]
            if c == 0:
                continue
            if p >= q:
                total = total + c * p10[p - q] * p11[q]
            else:
                total = total + c * p01[q - p] * p11[p]
    return total if isinstance(total, np.ndarray) and total.ndim else complex(total)


def series_function(S: CoeffArray) -> BivariateFunction:
    return BivariateFunction(lambda z, w: series_eval(S, z, w), Domain.OMEGA, "series")


def _mask_future(n: int) -> np.ndarray:
    p, q = np.indices((n, n))
    return p >= q


def project_future(S: CoeffArray) -> CoeffArray:
    """Keep ``p >= q``, zero the rest."""
    return CoeffArray(np.where(_mask_future(S.N + 1), S.a, 0), S.basis)


def project_past(S: CoeffArray) -> CoeffArray:
    """Keep ``p < q``, zero the rest."""
    return CoeffArray(np.where(_mask_future(S.N + 1), 0, S.a), S.basis)


def phi_map(S: CoeffArray) -> CoeffArray:
    """Monomial coefficients -> Schauder coefficients (``u^p v^q -> f_{p,q}``)."""
    if S.basis is not Basis.MONOMIAL:
        raise ValueError("phi_map expects a monomial-basis array")
    return S.with_basis(Basis.SCHAUDER)


def phi_inv_map(S: CoeffArray) -> CoeffArray:
    if S.basis is not Basis.SCHAUDER:
        raise ValueError("phi_inv_map expects a Schauder-basis array")
    return S.with_basis(Basis.MONOMIAL)


def _torus(M: int, r: float, offset: bool):
    """Angles and nodes on the circle of radius ``r``.

    With ``offset`` the angles are shifted by half a step, which keeps
    ``u v = -1`` off the grid when ``r = 1``.
    """
    shift = np.pi / M if offset else 0.0
    theta = 2 * np.pi * np.arange(M) / M + shift
    return theta, r * np.exp(1j * theta)


def _taylor_block(g, N: int, M: int, r: float, offset_u: bool) -> np.ndarray:
    theta, u = _torus(M, r, offset_u)
    _, v = _torus(M, r, False)
    U, V = np.meshgrid(u, v, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(g(U, V), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise FloatingPointError("function returned non-finite values on the sampling torus")
    c = np.fft.fft2(vals)[: N + 1, : N + 1] / M**2
    p = np.arange(N + 1)
    if offset_u:
        c = c * np.exp(-1j * p * theta[0])[:, None]
    scale = float(r) ** -(p[:, None] + p[None, :])
    return c * scale


def _check_sampling(N: int, M: int, r: float):
    if N < 0:
        raise ValueError("truncation order must be nonnegative")
    if M < 2 * N + 2:
        raise ValueError(f"need at least 2N + 2 = {2 * N + 2} samples per circle, got {M}")
    if not r > 0:
        raise ValueError("radius must be positive")


def extract_coeffs(f, N: int, M: int = 64, r: float = 1.0) -> CoeffArray:
    """Schauder coefficients of ``f`` up to order ``N``.

    ``a[p, q]`` is the ``(p, q)`` Taylor coefficient of ``f(u/(1+uv), v)``
    for ``p >= q`` and of ``f(u, v/(1+uv))`` for ``p < q``; both integrands
    are entire, so any radius works.
    """
    _check_sampling(N, M, r)
    f = as_bivariate(f)

    def g_plus(u, v):
        return f(u / (1 + u * v), v)

    def g_minus(u, v):
        return f(u, v / (1 + u * v))

    plus = _taylor_block(g_plus, N, M, r, offset_u=True)
    minus = _taylor_block(g_minus, N, M, r, offset_u=True)
    a = np.where(_mask_future(N + 1), plus, minus)
    return CoeffArray(a, Basis.SCHAUDER)


def taylor_coeffs_entire(F, N: int, M: int = 64, r: float = 1.0) -> CoeffArray:
    """Taylor coefficients ``a[p, q]`` of an entire function of ``(u, v)``."""
    _check_sampling(N, M, r)
    F = as_bivariate(F, Domain.C2)
    return CoeffArray(_taylor_block(F, N, M, r, offset_u=False), Basis.MONOMIAL)


@dataclass(frozen=True, eq=False)
class FourierRestriction:
    """Fourier modes ``c_n`` of ``t -> f(r e^{it}, +-r e^{-it})``."""

    modes: np.ndarray
    coeffs: np.ndarray

    def __getitem__(self, n: int) -> complex:
        idx = np.nonzero(self.modes == n)[0]
        if idx.size == 0:
            raise KeyError(n)
        return complex(self.coeffs[idx[0]])

    def negative_max(self) -> float:
        return float(np.max(np.abs(self.coeffs[self.modes < 0]), initial=0.0))

    def to_json(self) -> dict:
        return {
            "modes": [int(n) for n in self.modes],
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
        }


def fourier_restrict(f, diagonal: str = "disk", r: float = 0.5, M: int = 64) -> FourierRestriction:
    """Fourier coefficients of ``f`` on the circle ``(r e^{it}, r e^{-it})``
    (``diagonal="disk"``) or ``(r e^{it}, -r e^{-it})`` (``"sphere"``)."""
    f = as_bivariate(f)
    if diagonal == "disk":
        if not 0 < r < 1:
            raise DomainError("disk restriction needs 0 < r < 1")
        sign = 1
    elif diagonal == "sphere":
        if not r > 0:
            raise DomainError("sphere restriction needs r > 0")
        sign = -1
    else:
        raise ValueError(f"diagonal must be 'disk' or 'sphere', not {diagonal!r}")
    t = 2 * np.pi * np.arange(M) / M
    e = np.exp(1j * t)
    vals = np.asarray(f(r * e, sign * r * np.conj(e)), dtype=complex)
    c = np.fft.fft(vals) / M
    modes = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    order = np.argsort(modes, kind="stable")
    return FourierRestriction(modes[order], c[order])
