"""The Moebius subgroup of Aut(Omega) and residual checks of Laplacian invariance.

An element of the Moebius subgroup is stored as a Moebius map ``psi`` and a
swap flag; it acts by

    (z, w) -> (psi(z), psi~(w))      (swap = False)
    (z, w) -> (psi(w), psi~(z))      (swap = True)

with ``psi~(w) = 1 / psi(1 / w)``.

The checkers sample a finite grid, so a large residual is a concrete
violated instance while a small residual is evidence, not proof.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calculus import (
    BivariateFunction,
    ContourError,
    Domain,
    QuadratureConfig,
    as_bivariate,
    cauchy_partial,
    laplacian_omega,
)
from .riemann_core import (
    INF,
    DegenerateMapError,
    DomainError,
    MobiusMap,
    OmegaPoint,
    chordal_distance,
    ext,
    in_omega,
    mobius_compose,
    mobius_fit_three_points,
    mobius_inverse,
    mobius_tilde,
)
from .schauder import basis_function

__all__ = [
    "OmegaAutomorphism",
    "TestBattery",
    "BlowupTable",
    "ACCEPT_THRESHOLD",
    "REJECT_THRESHOLD",
    "aut_apply",
    "aut_compose",
    "aut_inverse",
    "default_omega_battery",
    "default_config_battery",
    "omega_grid",
    "config_grid",
    "laplace_invariance_table",
    "laplace_invariance_residual",
    "config_invariance_table",
    "config_invariance_residual",
    "aut4_combination",
    "shear_automorphism_G",
    "shear_omega",
    "config_pair_map",
    "transport_config_map",
    "polynomial_perturbation",
    "random_mobius",
    "random_automorphism",
    "detect_mobius",
    "verdict",
    "blowup_probe",
]

ACCEPT_THRESHOLD = 1e-7
REJECT_THRESHOLD = 1e-3

_PROBES = [
    (0.12 + 0.05j, 0.31 - 0.22j),
    (-0.35 + 0.27j, 0.08 + 0.41j),
    (0.44 - 0.31j, -0.19 + 0.12j),
    (0.02 + 0.48j, 0.52 + 0.03j),
    (-0.27 - 0.36j, -0.33 - 0.14j),
    (0.58 + 0.17j, 0.22 + 0.26j),
    (-0.49 - 0.08j, 0.37 - 0.45j),
    (0.21 + 0.33j, -0.42 + 0.36j),
    (-0.13 - 0.52j, 0.15 - 0.07j),
    (0.36 - 0.04j, -0.05 - 0.39j),
    (1.7 + 0.4j, -0.6 + 0.9j),
    (-2.3 - 1.1j, 0.8 - 0.2j),
    (0.3j, 3.1 + 0.5j),
    (0.9 - 0.9j, -0.1 + 1.4j),
    (INF, 0.6 - 0.3j),
    (0.45 + 0.2j, INF),
    (INF, INF),
    (0j, 0j),
    (2.0 + 0j, 0.1 + 0j),
    (-0.7 + 0.7j, -1.9 + 0.2j),
]


@dataclass(frozen=True)
class OmegaAutomorphism:
    """Element of the Moebius subgroup: a Moebius map plus a swap flag."""

    psi: MobiusMap
    swap: bool = False

    def __post_init__(self):
        for z, w in _PROBES:
            Z, W = aut_apply(self, (z, w))
            if not in_omega(Z, W):
                raise DomainError(f"automorphism sends probe ({z}, {w}) outside Omega")

    @classmethod
    def identity(cls) -> "OmegaAutomorphism":
        return cls(MobiusMap.identity(), False)

    @property
    def tilde(self) -> MobiusMap:
        return mobius_tilde(self.psi)

    def __call__(self, z, w=None):
        """Vectorized on numpy arrays; exact (infinity aware) on scalars.

        Also accepts a single ``(z, w)`` tuple, returning an :class:`OmegaPoint`.
        """
        if w is None:
            return aut_apply(self, z)
        if isinstance(z, np.ndarray) or isinstance(w, np.ndarray):
            z, w = np.asarray(z, dtype=complex), np.asarray(w, dtype=complex)
            if self.swap:
                return self.psi(w), self.tilde(z)
            return self.psi(z), self.tilde(w)
        return tuple(aut_apply(self, (z, w)))

    def __matmul__(self, other: "OmegaAutomorphism") -> "OmegaAutomorphism":
        return aut_compose(self, other)

    def inverse(self) -> "OmegaAutomorphism":
        return aut_inverse(self)

    def to_json(self) -> dict:
        return {"mobius": self.psi.to_json(), "swap": self.swap}


def aut_apply(T: OmegaAutomorphism, p) -> OmegaPoint:
    z, w = ext(p[0]), ext(p[1])
    if not in_omega(z, w):
        raise DomainError(f"({z!r}, {w!r}) is not in Omega")
    psi, tl = T.psi, mobius_tilde(T.psi)
    if T.swap:
        return OmegaPoint(psi(w), tl(z))
    return OmegaPoint(psi(z), tl(w))


def aut_compose(T1: OmegaAutomorphism, T2: OmegaAutomorphism) -> OmegaAutomorphism:
    """``T1 o T2``."""
    inner = mobius_tilde(T2.psi) if T1.swap else T2.psi
    return OmegaAutomorphism(mobius_compose(T1.psi, inner), T1.swap != T2.swap)


def aut_inverse(T: OmegaAutomorphism) -> OmegaAutomorphism:
    inv = mobius_inverse(T.psi)
    if T.swap:
        return OmegaAutomorphism(mobius_tilde(inv), True)
    return OmegaAutomorphism(inv, False)


@dataclass
class TestBattery:
    """Globally holomorphic test functions on one model."""

    __test__ = False  # not a pytest class

    functions: list = field(default_factory=list)
    domain: Domain = Domain.OMEGA

    def __iter__(self):
        return iter(self.functions)

    def __len__(self):
        return len(self.functions)

    @property
    def names(self) -> list:
        return [f.name for f in self.functions]


def default_omega_battery(max_index: int = 4) -> TestBattery:
    fs = [basis_function(p, q) for p in range(max_index + 1) for q in range(max_index + 1)]
    return TestBattery(fs, Domain.OMEGA)


def default_config_battery() -> TestBattery:
    fs = [
        BivariateFunction(lambda z, w: 1 / (z - w), Domain.CONFIG, "1/(z-w)"),
        BivariateFunction(lambda z, w: 1 / (z - w) ** 2, Domain.CONFIG, "1/(z-w)^2"),
        BivariateFunction(lambda z, w: z / (z - w) ** 2, Domain.CONFIG, "z/(z-w)^2"),
        BivariateFunction(lambda z, w: z**2 / (z - w) ** 2, Domain.CONFIG, "z^2/(z-w)^2"),
    ]
    return TestBattery(fs, Domain.CONFIG)


_UNIT_OFFSETS = np.array([0.0, 0.83 + 0.12j, -0.31 + 0.79j, -0.66 - 0.47j, 0.22 - 0.88j])


def omega_grid(center=(0.1, 0.2), radius: float = 0.5, n: int = 5) -> list:
    """``n x n`` product grid inside the bidisk of ``radius`` about ``center``."""
    offs = _grid_offsets(n)
    zs = center[0] + 0.8 * radius * offs
    ws = center[1] + 0.8 * radius * offs[::-1] * np.exp(0.7j)
    return [(complex(z), complex(w)) for z in zs for w in ws]


def config_grid(center=(1.6 + 0.3j, -0.4 - 0.1j), radius: float = 0.4, n: int = 5) -> list:
    offs = _grid_offsets(n)
    zs = center[0] + radius * offs
    ws = center[1] + radius * offs * np.exp(1.3j)
    return [(complex(z), complex(w)) for z in zs for w in ws]


def _grid_offsets(n: int) -> np.ndarray:
    if n <= len(_UNIT_OFFSETS):
        return _UNIT_OFFSETS[:n]
    k = np.arange(n)
    return np.sqrt((k + 0.5) / n) * np.exp(2.399963j * k)


def _point_of(T, z0: complex, w0: complex):
    Z, W = T(np.array([z0]), np.array([w0]))
    return complex(np.asarray(Z)[0]), complex(np.asarray(W)[0])


def laplace_invariance_table(T, battery: TestBattery | None = None, grid=None, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """``|Delta(F o T)(p) - Delta(F)(T(p))|`` for each battery member and grid point.

    ``T`` is a vectorized map of finite arrays ``(z, w) -> (Z, W)``.
    """
    battery = battery or default_omega_battery()
    grid = grid if grid is not None else omega_grid()
    cfg = cfg or QuadratureConfig()
    out = np.zeros((len(battery), len(grid)))
    for j, (z0, w0) in enumerate(grid):
        image = _point_of(T, z0, w0)
        if not (np.isfinite(image[0]) and np.isfinite(image[1])) or abs(1 - image[0] * image[1]) < 1e-12:
            raise ContourError(f"T({z0}, {w0}) = {image} leaves the finite part of Omega")
        for i, F in enumerate(battery):
            F = as_bivariate(F, battery.domain)
            try:
                lhs = laplacian_omega(F.compose(T, Domain.OMEGA), z0, w0, cfg)
                rhs = laplacian_omega(F, image[0], image[1], cfg)
            except ContourError as exc:
                raise ContourError(f"at grid point ({z0}, {w0}): {exc}") from exc
            out[i, j] = abs(lhs - rhs)
    return out


def laplace_invariance_residual(T, battery=None, grid=None, cfg=None) -> float:
    return float(np.max(laplace_invariance_table(T, battery, grid, cfg)))


def config_invariance_table(T, battery: TestBattery | None = None, grid=None, cfg: QuadratureConfig | None = None) -> np.ndarray:
    """``|(z-w)^2 d_z d_w (F o T) - (T1-T2)^2 (d_z d_w F)(T)|`` on the configuration space."""
    battery = battery or default_config_battery()
    grid = grid if grid is not None else config_grid()
    cfg = cfg or QuadratureConfig()
    out = np.zeros((len(battery), len(grid)))
    for j, (z0, w0) in enumerate(grid):
        t1, t2 = _point_of(T, z0, w0)
        if not (np.isfinite(t1) and np.isfinite(t2)) or t1 == t2:
            raise ContourError(f"T({z0}, {w0}) = ({t1}, {t2}) leaves the finite part of G")
        for i, F in enumerate(battery):
            F = as_bivariate(F, Domain.CONFIG)
            try:
                lhs = (z0 - w0) ** 2 * cauchy_partial(F.compose(T, Domain.CONFIG), z0, w0, 1, 1, cfg)
                rhs = (t1 - t2) ** 2 * cauchy_partial(F, t1, t2, 1, 1, cfg)
            except ContourError as exc:
                raise ContourError(f"at grid point ({z0}, {w0}): {exc}") from exc
            out[i, j] = abs(lhs - rhs)
    return out


def config_invariance_residual(T, battery=None, grid=None, cfg=None) -> float:
    return float(np.max(config_invariance_table(T, battery, grid, cfg)))


def aut4_combination(T, z0, w0, cfg: QuadratureConfig | None = None) -> complex:
    """``2 (d_w T1 - d_z T1 - 1) / (w - z) + d_z d_w T1`` at ``(z0, w0)``.

    This is the condition the test function ``z / (z - w)^2`` imposes on a
    map with ``T1 - T2 = w - z``.
    """
    cfg = cfg or QuadratureConfig()
    T1 = BivariateFunction(lambda z, w: T(z, w)[0], Domain.CONFIG)
    dz = cauchy_partial(T1, z0, w0, 1, 0, cfg)
    dw = cauchy_partial(T1, z0, w0, 0, 1, cfg)
    dzw = cauchy_partial(T1, z0, w0, 1, 1, cfg)
    return 2 * (dw - dz - 1) / (w0 - z0) + dzw


def shear_automorphism_G(g: Callable) -> Callable:
    """``(z, w) -> (z + g(1/(z-w)), w + g(1/(z-w)))``, an automorphism of G for entire ``g``."""

    def T(z, w):
        s = g(1 / (z - w))
        return z + s, w + s

    return T


def transport_config_map(Tg: Callable) -> Callable:
    """Conjugate a map of G to a map of Omega through ``(z, w) -> (z, 1/w)``."""

    def T(z, w):
        Z, W = Tg(z, 1 / w)
        return Z, 1 / W

    return T


def shear_omega(g: Callable | None = None) -> Callable:
    """The configuration-space shear seen in Omega coordinates.

    With ``s = g(w / (zw - 1))`` this is ``(z + s, w / (1 + s w))``, written
    without ``1/w`` so it is regular at ``w = 0``.
    """
    g = g or (lambda x: x)

    def T(z, w):
        s = g(w / (z * w - 1))
        return z + s, w / (1 + s * w)

    return T


def config_pair_map(psi: MobiusMap, swap: bool = False) -> Callable:
    """``(z, w) -> (psi(z), psi(w))`` or the swapped pair, on G."""

    def T(z, w):
        if swap:
            return psi(w), psi(z)
        return psi(z), psi(w)

    return T


def polynomial_perturbation(rng: np.random.Generator, eps: float = 0.1) -> Callable:
    """Identity plus ``eps`` times random quadratic polynomials in ``(z, w)``."""
    c = (rng.normal(size=(2, 6)) + 1j * rng.normal(size=(2, 6))) / np.sqrt(2)

    def T(z, w):
        mons = (np.ones_like(z), z, w, z * z, z * w, w * w)
        P1 = sum(c[0, k] * m for k, m in enumerate(mons))
        P2 = sum(c[1, k] * m for k, m in enumerate(mons))
        return z + eps * P1, w + eps * P2

    return T


def random_mobius(rng: np.random.Generator, spread: float = 0.3, keep_out: float = 1.5) -> MobiusMap:
    """A Moebius map near the identity with poles of ``psi`` and ``psi~`` outside ``|z| < keep_out``."""
    while True:
        g = (rng.normal(size=4) + 1j * rng.normal(size=4)) * spread
        a, b, c, d = 1 + g[0], g[1], g[2], 1 + g[3]
        if abs(a * d - b * c) < 0.2:
            continue
        psi = MobiusMap(a, b, c, d)
        if abs(c) * keep_out < abs(d) and abs(b) * keep_out < abs(a):
            return psi


def random_automorphism(rng: np.random.Generator, swap: bool | None = None, spread: float = 0.3, grid=None, margin: float = 0.2) -> OmegaAutomorphism:
    """Random Moebius automorphism keeping ``grid`` well inside Omega.

    The image of every grid point must satisfy ``|1 - ZW| >= margin`` and
    ``|Z|, |W| <= 3``, so that Laplacians at the image are well conditioned.
    """
    grid = grid if grid is not None else omega_grid()
    zs = np.array([p[0] for p in grid])
    ws = np.array([p[1] for p in grid])
    while True:
        s = bool(rng.integers(2)) if swap is None else swap
        T = OmegaAutomorphism(random_mobius(rng, spread), s)
        Z, W = T(zs, ws)
        if np.all(np.abs(1 - Z * W) >= margin) and np.all(np.abs(Z) <= 3) and np.all(np.abs(W) <= 3):
            return T


DETECT_FIT_PROBES = [
    (0.05 + 0.1j, 0.3 - 0.2j),
    (-0.25 + 0.3j, 0.1 + 0.35j),
    (0.4 - 0.2j, -0.15 + 0.05j),
]


def _ext_value(x) -> object:
    x = complex(x)
    return ext(x) if np.isfinite(x) else INF


def detect_mobius(T, probes=None, fit_probes=None, tol: float = 1e-8) -> OmegaAutomorphism | None:
    """Try to recognise ``T`` as an element of the Moebius subgroup.

    For each swap hypothesis a Moebius map is fitted to the first
    coordinate at three probes, and the candidate is accepted if it matches
    ``T`` at every held-out probe to chordal distance ``tol`` in both
    coordinates.
    """
    fit_probes = fit_probes or DETECT_FIT_PROBES
    probes = probes if probes is not None else omega_grid(n=5)[:20]

    def image(z, w):
        Z, W = _point_of(T, z, w)
        return _ext_value(Z), _ext_value(W)

    for swap in (False, True):
        pairs = []
        for z, w in fit_probes:
            src = w if swap else z
            pairs.append((src, image(z, w)[0]))
        try:
            cand = OmegaAutomorphism(mobius_fit_three_points(pairs), swap)
        except (DegenerateMapError, DomainError):
            continue
        err = 0.0
        for z, w in probes:
            got = image(z, w)
            want = cand((z, w))
            err = max(err, chordal_distance(got[0], want[0]), chordal_distance(got[1], want[1]))
        if err < tol:
            return cand
    return None


def verdict(residual: float, accept: float = ACCEPT_THRESHOLD, reject: float = REJECT_THRESHOLD) -> str:
    if residual < accept:
        return "mobius"
    if residual > reject:
        return "not_mobius"
    return "inconclusive"


@dataclass(frozen=True, eq=False)
class BlowupTable:
    k: np.ndarray
    t: np.ndarray
    values: np.ndarray

    def increasing_from(self, k_min: int) -> bool:
        v = self.values[self.k >= k_min]
        return bool(np.all(np.diff(v) > 0))

    @property
    def ratio(self) -> float:
        return float(self.values[-1] / self.values[0])

    def diverges(self, k_min: int = 5, factor: float = 1e3) -> bool:
        return self.increasing_from(k_min) and self.ratio > factor

    def rows(self):
        return list(zip(self.k.tolist(), self.t.tolist(), self.values.tolist()))


def blowup_probe(p: int, q: int, k_max: int = 12) -> BlowupTable:
    """``|f_{p,q}(t, t)|`` at ``t = 1 - 2^-k``, ``k = 1..k_max``, as ``t z`` approaches ``z w = 1``."""
    if (p, q) == (0, 0):
        raise ValueError("f_{0,0} is constant; the probe needs (p, q) != (0, 0)")
    k = np.arange(1, k_max + 1)
    t = 1 - 2.0 ** (-k)
    f = basis_function(p, q)
    vals = np.abs(f(t.astype(complex), t.astype(complex)))
    return BlowupTable(k, t, vals)
