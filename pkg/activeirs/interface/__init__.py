"""Interface module for activeirs.

Abstract contracts for conic solver adapters and power-minimisation schemes.
"""

from typing import List

from .conic_solver import ConicSolution, ConicSolver, SolverSettings, SolverStatus
from .scheme import Scheme, SchemeOutcome

__all__: List[str] = [
    "ConicSolution",
    "ConicSolver",
    "Scheme",
    "SchemeOutcome",
    "SolverSettings",
    "SolverStatus",
]
