"""Exception hierarchy for activeirs."""

from typing import Optional


class ActiveIrsError(Exception):
    """Base class for all errors raised by activeirs."""


class ContractViolation(ActiveIrsError, ValueError):
    """Raised when an operation is called outside its preconditions."""


class ConfigError(ActiveIrsError):
    """Raised for malformed or unknown configuration entries."""


class AssemblyError(ActiveIrsError):
    """Raised when a conic problem cannot be assembled.

    Args:
        constraint: Name of the offending constraint
        message: Human readable description
    """

    def __init__(self, constraint: str, message: str):
        super().__init__(f"{constraint}: {message}")
        self.constraint = constraint


class IterationError(ActiveIrsError):
    """Raised when a subproblem solve does not return an optimal point.

    Args:
        status: Solver status string (see ``SolverStatus``)
        message: Optional diagnostics
    """

    def __init__(self, status: str, message: Optional[str] = None):
        super().__init__(message or f"subproblem solve ended with status '{status}'")
        self.status = status


class InitializationError(ActiveIrsError):
    """Raised when no feasible starting point can be built for a drop."""


class SweepError(ActiveIrsError):
    """Raised for sweep start-up failures (e.g. unwritable output path)."""
