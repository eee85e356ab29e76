"""Orlicz and Orlicz-Sobolev space calculus with a radial mountain-pass solver."""
__version__ = "0.1.0"

from .errors import (ConsistencyError, DivergenceError, GeometryError, OracleError,
                     ParameterError, SaturationError)
from .nfunction import (NFunction, NFunctionSpec, SobolevConjugate, build, conjugate_eval,
                        sobolev_conjugate)
from .radial import GridFunction, PotentialSpec, RadialGrid, luxemburg_norm, make_grid, modular

__all__ = [
    "__version__", "NFunction", "NFunctionSpec", "SobolevConjugate", "build", "conjugate_eval",
    "sobolev_conjugate", "GridFunction", "PotentialSpec", "RadialGrid", "luxemburg_norm",
    "make_grid", "modular", "ParameterError", "SaturationError", "DivergenceError",
    "ConsistencyError", "GeometryError", "OracleError",
]
