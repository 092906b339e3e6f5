"""Conic solver interface for activeirs.

This module provides the adapter contract between assembled conic problems
and an interior-point conic solver.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Dict

import numpy as np

if TYPE_CHECKING:
    from activeirs.services.conic_backend import AssembledProblem


class SolverStatus(str, Enum):
    """Outcome of a conic solve."""

    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_LIMIT = "numerical_limit"


@dataclass(frozen=True)
class SolverSettings:
    """Solver knobs shared by every adapter.

    Attributes:
        solver: Name of the backend solver (e.g. ``CLARABEL``, ``SCS``)
        tol: Feasibility and gap tolerance
        max_iter: Iteration cap of the backend
        verify: Re-check cone residuals of optimal results independently
    """

    solver: str = "CLARABEL"
    tol: float = 1e-8
    max_iter: int = 200
    verify: bool = True


@dataclass
class ConicSolution:
    """Primal result of a conic solve.

    ``values`` maps variable-block names to numpy arrays (Hermitian blocks are
    symmetrized). ``max_residual`` is the largest independently recomputed
    cone residual, ``NaN`` when no verification was run.
    """

    status: SolverStatus
    objective: float = float("nan")
    values: Dict[str, np.ndarray] = field(default_factory=dict)
    iterations: int = 0
    solve_seconds: float = 0.0
    max_residual: float = float("nan")
    duals: Dict[str, Any] = field(default_factory=dict)
    diagnostics: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is SolverStatus.OPTIMAL

    def block(self, name: str) -> np.ndarray:
        """Value of a named variable block.

        Raises:
            KeyError: If the block was not part of the problem
        """
        return self.values[name]

    def to_json(self) -> Dict[str, Any]:
        return {
            "status": self.status.value,
            "objective": self.objective,
            "iterations": self.iterations,
            "solve_seconds": self.solve_seconds,
            "max_residual": self.max_residual,
            "diagnostics": self.diagnostics,
        }


class ConicSolver(ABC):
    """Abstract base class for conic solver adapters.

    An adapter takes standard-form data produced by ``assemble`` and returns a
    ``ConicSolution`` with a faithful status. Adapters that wrap a
    non-reentrant backend report ``reentrant = False`` so callers serialize
    their solves.
    """

    name: str = "abstract"
    reentrant: bool = True

    @abstractmethod
    def solve(self, assembled: "AssembledProblem", settings: SolverSettings) -> ConicSolution:
        """Solve an assembled problem.

        Args:
            assembled: Standard-form data of one convex problem
            settings: Tolerances and iteration limits

        Returns:
            ConicSolution: The status, primal values and diagnostics
        """
        pass
