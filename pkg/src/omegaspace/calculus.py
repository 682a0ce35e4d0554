"""Derivatives by Cauchy-integral quadrature and the operators built on them.

Partial derivatives are read off the trapezoid rule on circles around the
point, which converges geometrically for holomorphic integrands.  The
contour radius is capped by a fraction of a cheap lower bound on the
distance to the singular set of the function's domain, so the polydisc of
integration never meets ``z w = 1`` (Omega) or ``z = w`` (configuration
space).

Evaluators are vectorized: they receive numpy arrays of finite complex
values of a common shape and return an array of that shape.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .riemann_core import DomainError

__all__ = [
    "Domain",
    "BivariateFunction",
    "QuadratureConfig",
    "TwoFormCoefficients",
    "ContourError",
    "CriticalPointError",
    "as_bivariate",
    "resolve_radius",
    "cauchy_partial",
    "cauchy_derivatives",
    "laplacian_omega",
    "laplacian_config",
    "schwarzian",
    "schwarzeq_residual",
    "metric_pullback",
]


class ContourError(DomainError):
    """The integration contour would reach the singular set."""


class CriticalPointError(ValueError):
    """Schwarzian requested where the derivative vanishes."""


class Domain(enum.Enum):
    OMEGA = "omega"
    OMEGA_PLUS = "omega_plus"
    OMEGA_MINUS = "omega_minus"
    CONFIG = "config"
    C2 = "c2"


@dataclass(frozen=True)
class BivariateFunction:
    """A vectorized holomorphic function of ``(z, w)`` tagged with its domain."""

    evaluator: Callable
    domain: Domain = Domain.OMEGA
    name: str = ""

    def __call__(self, z, w):
        return self.evaluator(z, w)

    def compose(self, T, domain: Domain | None = None, name: str = "") -> "BivariateFunction":
        """``self o T`` for a vectorized map ``T(z, w) -> (Z, W)``."""
        f = self.evaluator

        def composite(z, w):
            Z, W = T(z, w)
            return f(Z, W)

        return BivariateFunction(composite, domain or self.domain, name or f"{self.name} o T")


def as_bivariate(f, domain: Domain = Domain.OMEGA) -> BivariateFunction:
    if isinstance(f, BivariateFunction):
        return f
    return BivariateFunction(f, domain)


@dataclass(frozen=True)
class QuadratureConfig:
    radius: float = 0.25
    samples: int = 32
    singular_margin: float = 0.5

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")
        if int(self.samples) != self.samples or self.samples < 8:
            raise ValueError("samples must be an integer >= 8")
        if not self.singular_margin > 0:
            raise ValueError("singular_margin must be positive")


@dataclass(frozen=True)
class TwoFormCoefficients:
    """Coefficients of ``dz^2``, ``dz v dw`` and ``dw^2``."""

    c_zz: complex
    c_zw: complex
    c_ww: complex


def _singular_distance(domain: Domain, z0: complex, w0: complex) -> float:
    if domain in (Domain.OMEGA, Domain.OMEGA_PLUS, Domain.OMEGA_MINUS):
        # |zw - z0 w0| <= r (|z0| + |w0| + 1) on the polydisc when r <= 1
        return abs(1 - z0 * w0) / (abs(z0) + abs(w0) + 1)
    if domain is Domain.CONFIG:
        return abs(z0 - w0) / 2
    return math.inf


def resolve_radius(domain: Domain, z0: complex, w0: complex, cfg: QuadratureConfig) -> float:
    """Contour radius actually used at ``(z0, w0)``."""
    if not (np.isfinite(z0) and np.isfinite(w0)):
        raise ContourError(f"quadrature needs a finite point, got ({z0}, {w0})")
    dist = _singular_distance(domain, z0, w0)
    r = min(cfg.radius, cfg.singular_margin * dist, 1.0 if dist < math.inf else cfg.radius)
    if not r > 1e-10:
        raise ContourError(f"({z0}, {w0}) is on or too close to the singular set of {domain.value}")
    return r


def _nodes(center: complex, order: int, radius: float, n: int):
    """Circle nodes and the weights extracting the ``order``-th derivative."""
    if order == 0:
        return np.array([center]), np.array([1.0 + 0j])
    theta = 2 * np.pi * np.arange(n) / n
    e = np.exp(1j * theta)
    weights = math.factorial(order) / radius**order * np.conj(e) ** order / n
    return center + radius * e, weights


def cauchy_partial(f, z0, w0, order_z: int, order_w: int, cfg: QuadratureConfig | None = None) -> complex:
    """``d^order_z/dz d^order_w/dw f`` at ``(z0, w0)`` by double Cauchy quadrature."""
    cfg = cfg or QuadratureConfig()
    f = as_bivariate(f)
    if order_z < 0 or order_w < 0:
        raise ValueError("derivative orders must be nonnegative")
    z0, w0 = complex(z0), complex(w0)
    r = resolve_radius(f.domain, z0, w0, cfg)
    zs, wz = _nodes(z0, order_z, r, cfg.samples)
    ws, ww = _nodes(w0, order_w, r, cfg.samples)
    Z, W = np.meshgrid(zs, ws, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(f(Z, W), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ContourError(f"non-finite values on the contour around ({z0}, {w0})")
    return complex(wz @ vals @ ww)


def cauchy_derivatives(h, z0, max_order: int, radius: float, samples: int = 32) -> np.ndarray:
    """``[h(z0), h'(z0), ..., h^(max_order)(z0)]`` from one circle of samples."""
    z0 = complex(z0)
    n = samples
    e = np.exp(2j * np.pi * np.arange(n) / n)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = np.asarray(h(z0 + radius * e), dtype=complex)
    if not np.all(np.isfinite(vals)):
        raise ContourError(f"non-finite values on the circle |z - {z0}| = {radius}")
    coeffs = np.fft.fft(vals) / n
    k = np.arange(max_order + 1)
    fact = np.array([math.factorial(int(i)) for i in k], dtype=float)
    return coeffs[: max_order + 1] * fact / radius**k


def laplacian_omega(f, z0, w0, cfg: QuadratureConfig | None = None) -> complex:
    """``4 (1 - z w)^2 d_z d_w f`` at a finite point of Omega."""
    z0, w0 = complex(z0), complex(w0)
    return 4 * (1 - z0 * w0) ** 2 * cauchy_partial(f, z0, w0, 1, 1, cfg)


def laplacian_config(F, z0, w0, cfg: QuadratureConfig | None = None) -> complex:
    """``-4 (z - w)^2 d_z d_w F`` on the configuration space.

    This is the Omega Laplacian transported by ``(z, w) -> (z, 1/w)``.
    """
    F = as_bivariate(F, Domain.CONFIG)
    z0, w0 = complex(z0), complex(w0)
    return -4 * (z0 - w0) ** 2 * cauchy_partial(F, z0, w0, 1, 1, cfg)


def schwarzian(H, z0, cfg: QuadratureConfig | None = None) -> complex:
    """``H'''/H' - 3/2 (H''/H')^2`` with derivatives from one Cauchy circle.

    The circle ``|z - z0| = cfg.radius`` must lie in the domain of ``H``.
    """
    cfg = cfg or QuadratureConfig()
    d = cauchy_derivatives(H, z0, 3, cfg.radius, cfg.samples)
    if abs(d[1]) < 1e-10:
        raise CriticalPointError(f"Schwarzian undefined at critical point {z0}")
    ratio = d[2] / d[1]
    return complex(d[3] / d[1] - 1.5 * ratio**2)


def schwarzeq_residual(H1, H2, z0, w0, cfg: QuadratureConfig | None = None) -> complex:
    """``((H1(z) - H2(w)) / (z - w))^2 - H1'(z) H2'(w)`` at ``(z0, w0)``."""
    cfg = cfg or QuadratureConfig()
    z0, w0 = complex(z0), complex(w0)
    if z0 == w0:
        raise DomainError("schwarzeq_residual needs z0 != w0")
    d1 = cauchy_derivatives(H1, z0, 1, cfg.radius, cfg.samples)
    d2 = cauchy_derivatives(H2, w0, 1, cfg.radius, cfg.samples)
    h1 = complex(np.asarray(H1(np.array([z0])))[0])
    h2 = complex(np.asarray(H2(np.array([w0])))[0])
    return ((h1 - h2) / (z0 - w0)) ** 2 - d1[1] * d2[1]


def metric_pullback(T, z0, w0, cfg: QuadratureConfig | None = None) -> TwoFormCoefficients:
    """Pull back ``dz v dw / (1 - z w)^2`` along ``T(z, w) = (T1, T2)``.

    Expands ``d(T1) v d(T2)`` in the basis ``dz^2, dz v dw, dw^2``.
    """
    cfg = cfg or QuadratureConfig()
    z0, w0 = complex(z0), complex(w0)
    r = resolve_radius(Domain.OMEGA, z0, w0, cfg)
    T1c, T2c = T(np.array([z0]), np.array([w0]))
    t1, t2 = complex(T1c[0]), complex(T2c[0])
    den = 1 - t1 * t2
    if not (np.isfinite(t1) and np.isfinite(t2)) or abs(den) < 1e-12:
        raise DomainError(f"T({z0}, {w0}) = ({t1}, {t2}) touches z*w = 1 or infinity")

    def jac_row(comp):
        dz = cauchy_derivatives(lambda z: T(z, np.full_like(z, w0))[comp], z0, 1, r, cfg.samples)[1]
        dw = cauchy_derivatives(lambda w: T(np.full_like(w, z0), w)[comp], w0, 1, r, cfg.samples)[1]
        return dz, dw

    a_z, a_w = jac_row(0)
    b_z, b_w = jac_row(1)
    s = den**-2
    return TwoFormCoefficients(c_zz=a_z * b_z * s, c_zw=(a_z * b_w + a_w * b_z) * s, c_ww=a_w * b_w * s)
