"""Third-order Active Flux solver for the 2D compressible Euler equations."""

from .state import (
    GAMMA,
    BoundarySpec,
    ConsState,
    Grid,
    GridState,
    PrimState,
    cons_to_prim,
    prim_to_cons,
)
from .timestepper import SchemeConfig, advance, stable_dt
from .problems import make_problem, initialize, reference_error, PROBLEM_NAMES

__all__ = [
    "GAMMA",
    "BoundarySpec",
    "ConsState",
    "Grid",
    "GridState",
    "PrimState",
    "PROBLEM_NAMES",
    "SchemeConfig",
    "advance",
    "cons_to_prim",
    "initialize",
    "make_problem",
    "prim_to_cons",
    "reference_error",
    "stable_dt",
]
