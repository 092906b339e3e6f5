"""Comparison schemes.

Baseline 1 deploys no IRS and optimises the beamformers by SDR. Baseline 2
fixes the IRS at equal amplitudes √(P_A/M) with random phases, zero-forces
the effective channels and allocates the user powers with a linear program.
"""

import logging
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional

import numpy as np
from scipy import linalg, optimize

from activeirs.core.config import SystemConfig
from activeirs.core.types import ChannelSet, Solution
from activeirs.interface.scheme import Scheme, SchemeOutcome
from activeirs.services.beamforming import solve_fixed_reflection
from activeirs.services.problem_core import bs_transmit_power, dynamic_noise

logger = logging.getLogger(__name__)


@dataclass
class BaselineResult:
    """Outcome of a baseline on one drop.

    ``solution`` is None on outage; ``bs_power`` is NaN then.
    """

    solution: Optional[Solution]
    feasible: bool
    bs_power: float = float("nan")
    details: Dict[str, Any] = field(default_factory=dict)


def baseline_no_irs(channels: ChannelSet, config: SystemConfig) -> BaselineResult:
    """Transmit-power minimisation with the IRS switched off (Ψ = 0)."""
    result = solve_fixed_reflection(channels, config, psi=None, include_c2=False, name="baseline1")
    details = {
        "status": result.status.value,
        "iterations": result.iterations,
        "rank_ratios": result.rank_ratios,
        "solve_seconds": result.solve_seconds,
    }
    if not result.feasible:
        logger.info("baseline1: outage (%s)", result.status.value)
        return BaselineResult(None, False, details=details)
    return BaselineResult(result.solution, True, result.bs_power, details)


def zero_forcing_directions(hbar: np.ndarray) -> np.ndarray:
    """Unit-norm columns of H̄(H̄^H H̄)^-1 returned as rows, one per user.

    Args:
        hbar: effective channels as rows, shape (K, N_T)

    Raises:
        np.linalg.LinAlgError: If the effective channel matrix is rank deficient
    """
    H = hbar.T
    gram = H.conj().T @ H
    if np.linalg.matrix_rank(H) < H.shape[1]:
        raise np.linalg.LinAlgError("effective channel matrix is rank deficient")
    F = linalg.solve(gram, H.conj().T, assume_a="her").conj().T
    F = F / np.linalg.norm(F, axis=0, keepdims=True)
    return F.T


def random_reflection(config: SystemConfig, rng: np.random.Generator) -> np.ndarray:
    """Equal amplitudes √(P_A/M) with phases uniform on [0, 2π)."""
    phases = rng.uniform(0.0, 2.0 * np.pi, size=config.m)
    return np.sqrt(config.p_a / config.m) * np.exp(1j * phases)


def baseline_zf_random(channels: ChannelSet, config: SystemConfig, rng: np.random.Generator) -> BaselineResult:
    """Random-phase active IRS with ZF beamforming and LP power allocation."""
    psi = random_reflection(config, rng)
    details: Dict[str, Any] = {"status": "optimal"}
    if channels.k > channels.n_t:
        details["status"] = "zf_unavailable"
        logger.info("baseline2: K=%d exceeds N_T=%d, outage", channels.k, channels.n_t)
        return BaselineResult(None, False, details=details)

    hbar = channels.effective(psi)
    try:
        directions = zero_forcing_directions(hbar)
    except np.linalg.LinAlgError:
        details["status"] = "rank_deficient"
        logger.info("baseline2: rank-deficient effective channels, outage")
        return BaselineResult(None, False, details=details)

    # per-user gain |h̄_k^H ŵ_k|² and IRS load ‖Ψ̄ G ŵ_k‖² of a unit-power beam
    gain = np.abs(np.sum(hbar.conj() * directions, axis=1)) ** 2
    load = np.sum(np.abs((channels.G @ directions.T) * psi[:, None]) ** 2, axis=0)
    noise = dynamic_noise(channels, psi, config) + config.sigma_n2

    # powers in units of σ_n²/mean gain, C2 normalised by P_A
    unit = config.sigma_n2 / float(np.mean(gain))
    a_ub = np.vstack([-np.diag(gain * unit / config.sigma_n2), (load * unit / config.p_a)[None, :]])
    b_ub = np.concatenate(
        [-config.gamma_req * noise / config.sigma_n2, [1.0 - config.sigma_d2 * np.sum(np.abs(psi) ** 2) / config.p_a]]
    )
    start = time.perf_counter()
    res = optimize.linprog(np.ones(channels.k), A_ub=a_ub, b_ub=b_ub, bounds=(0, None), method="highs")
    details["solve_seconds"] = time.perf_counter() - start
    if res.status != 0:
        details["status"] = "infeasible" if res.status == 2 else f"lp_status_{res.status}"
        logger.info("baseline2: LP %s, outage", details["status"])
        return BaselineResult(None, False, details=details)

    powers = np.maximum(res.x, 0.0) * unit
    solution = Solution(directions * np.sqrt(powers)[:, None], psi)
    details["powers"] = powers.tolist()
    return BaselineResult(solution, True, bs_transmit_power(solution), details)


class NoIrsScheme(Scheme):
    """Baseline 1 as a sweep scheme."""

    name = "baseline1"
    uses_irs = False
    active_irs = False

    def solve(self, channels: ChannelSet, config: SystemConfig, rng: np.random.Generator) -> SchemeOutcome:
        start = time.perf_counter()
        result = baseline_no_irs(channels, config)
        elapsed = time.perf_counter() - start
        return SchemeOutcome(
            solution=result.solution,
            feasible=result.feasible,
            bs_power=result.bs_power,
            total_power=result.bs_power,
            iterations=int(result.details.get("iterations", 0)),
            solve_seconds=elapsed,
            details=result.details,
        )


class ZfRandomScheme(Scheme):
    """Baseline 2 as a sweep scheme."""

    name = "baseline2"

    def solve(self, channels: ChannelSet, config: SystemConfig, rng: np.random.Generator) -> SchemeOutcome:
        start = time.perf_counter()
        result = baseline_zf_random(channels, config, rng)
        elapsed = time.perf_counter() - start
        return SchemeOutcome(
            solution=result.solution,
            feasible=result.feasible,
            bs_power=result.bs_power,
            total_power=result.bs_power,
            iterations=1 if result.feasible else 0,
            solve_seconds=elapsed,
            details=result.details,
        )
