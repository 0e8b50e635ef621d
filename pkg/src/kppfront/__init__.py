"""Traveling fronts of lattice KPP equations with long-range, sign-changing diffusion.

Fronts are built as a correction to a continuum front inside an
over-localized exponentially weighted space, then checked by direct
substitution and by time integration of the lattice equation.
"""

from .config import RunConfig
from .continuum import choose_theta, decompose_front, solve_continuous_front, spatial_decay_rate
from .front import (FrontSolution, SolverSettings, prepare, solve_decay_rate, solve_front,
                    spectral_probe)
from .grid import Grid, GridFunction, Tail
from .lattice import simulate_profile
from .model import (Kernel, Nonlinearity, named_nonlinearity, polynomial_nonlinearity,
                    taylor_remainder, validate_kernel, validate_nonlinearity)
from .weight import WeightProfile, build_weight

__version__ = "0.1.0"

__all__ = [
    "FrontSolution", "Grid", "GridFunction", "Kernel", "Nonlinearity", "RunConfig",
    "SolverSettings", "Tail", "WeightProfile", "build_weight", "choose_theta", "decompose_front",
    "named_nonlinearity", "polynomial_nonlinearity", "prepare", "simulate_profile",
    "solve_continuous_front", "solve_decay_rate", "solve_front", "spatial_decay_rate",
    "spectral_probe", "taylor_remainder", "validate_kernel", "validate_nonlinearity",
]
