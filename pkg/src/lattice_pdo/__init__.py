"""Pseudo-difference operators on Z^n with weighted symbol classes.

Everything is sampled on a truncated periodic lattice, where each calculus
identity can be checked against an exact kernel computation.
"""

__version__ = "0.1.0"

from .expr import SymbolSyntaxError, parse_symbol
from .fredholm import index_report, nullspace_dims, trace_via_symbol
from .lattice import LatticeBox, LatticeFunction, TorusFunction, dft, idft
from .quantize import (
    adjoint_asymptotic,
    adjoint_exact,
    compose_asymptotic,
    compose_exact,
    materialize,
    parametrix,
    toroidal_duality_check,
    transpose_asymptotic,
    transpose_exact,
)
from .sobolev import SobolevSpec, apriori_probe, compactness_probe, sobolev_norm
from .symbols import (
    NotEllipticError,
    SymbolGrid,
    SymbolZeroError,
    class_report,
    m_ellipticity,
    quotient_symbol,
)
from .weights import make_anisotropic_weight, make_standard_weight, validate_weight

__all__ = [
    "__version__",
    "LatticeBox",
    "LatticeFunction",
    "TorusFunction",
    "dft",
    "idft",
    "make_standard_weight",
    "make_anisotropic_weight",
    "validate_weight",
    "SymbolGrid",
    "SymbolZeroError",
    "NotEllipticError",
    "class_report",
    "m_ellipticity",
    "quotient_symbol",
    "materialize",
    "compose_exact",
    "adjoint_exact",
    "transpose_exact",
    "compose_asymptotic",
    "adjoint_asymptotic",
    "transpose_asymptotic",
    "toroidal_duality_check",
    "parametrix",
    "SobolevSpec",
    "sobolev_norm",
    "apriori_probe",
    "compactness_probe",
    "nullspace_dims",
    "trace_via_symbol",
    "index_report",
    "parse_symbol",
    "SymbolSyntaxError",
]
