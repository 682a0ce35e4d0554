"""Holomorphic calculus on the complement of the complexified unit circle."""

__version__ = "0.1.0"

from .riemann_core import INF, DegenerateMapError, DomainError, MobiusMap, OmegaPoint, ext
from .models import ComplexRotation, SpherePoint, fit_so3, stereographic_pi, stereographic_S
from .calculus import QuadratureConfig, laplacian_config, laplacian_omega
from .schauder import Basis, CoeffArray, extract_coeffs, series_eval
from .invariance import OmegaAutomorphism, detect_mobius, laplace_invariance_residual

__all__ = [
    "INF", "DegenerateMapError", "DomainError", "MobiusMap", "OmegaPoint", "ext",
    "ComplexRotation", "SpherePoint", "fit_so3", "stereographic_pi", "stereographic_S",
    "QuadratureConfig", "laplacian_config", "laplacian_omega",
    "Basis", "CoeffArray", "extract_coeffs", "series_eval",
    "OmegaAutomorphism", "detect_mobius", "laplace_invariance_residual",
]
