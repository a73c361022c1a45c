"""Convex polyhedral Cauchy surfaces in flat (2+1)-spacetimes and their Gauss images."""

__version__ = "0.1.0"

from .config import DEFAULT_TOL, HullConfig, SolverConfig, Tolerances  # noqa: E402
from .errors import GeometryError  # noqa: E402

__all__ = ["DEFAULT_TOL", "GeometryError", "HullConfig", "SolverConfig", "Tolerances", "__version__"]
