"""Scheme interface for activeirs.

A scheme turns one channel realisation into a ``SchemeOutcome``: the
proposed IA optimisation and both baselines implement it, so sweeps can run
them side by side on paired draws.
"""

from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np

from activeirs.core.config import SystemConfig
from activeirs.core.types import ChannelSet, Solution


@dataclass
class SchemeOutcome:
    """Result of one scheme on one drop.

    Attributes:
        solution: Beamformers and reflection vector (None on outage)
        feasible: False marks an outage
        bs_power: Σ‖w_k‖² in watts (NaN on outage)
        total_power: BS power plus any IRS allowance charged to the scheme
        iterations: Solver iterations (IA iterations for the proposed scheme)
        solve_seconds: Wall-clock time spent in the scheme
        details: Scheme-specific diagnostics
    """

    solution: Optional[Solution]
    feasible: bool
    bs_power: float = float("nan")
    total_power: float = float("nan")
    iterations: int = 0
    solve_seconds: float = 0.0
    details: Dict[str, Any] = field(default_factory=dict)


class Scheme(ABC):
    """Abstract base class for transmit-power minimisation schemes.

    Class attributes describe how the scheme is charged in the energy
    efficiency metric: ``uses_irs`` adds the per-element circuit power and
    ``active_irs`` adds the amplification allowance P_A.
    """

    name: str = "abstract"
    uses_irs: bool = True
    active_irs: bool = True

    @abstractmethod
    def solve(self, channels: ChannelSet, config: SystemConfig, rng: np.random.Generator) -> SchemeOutcome:
        """Run the scheme on one channel realisation.

        Args:
            channels: The drop's channels
            config: Scenario constants
            rng: Generator for any randomness the scheme needs

        Returns:
            SchemeOutcome: Solution and bookkeeping; never raises for outages
        """
        pass
