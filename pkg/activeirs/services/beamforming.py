"""Beamformer design for a fixed reflection vector.

With Ψ fixed, C1 and C2 are linear in W_k = w_k w_k^H, so the SDR of the
power minimisation is an exact convex problem. The same routine serves as
the no-IRS baseline (Ψ = 0, no C2), as the beam update of every IA step and
as the final refinement of the IA solution.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import cvxpy as cp
import numpy as np

from activeirs.core.config import SystemConfig
from activeirs.core.linalg import principal_component
from activeirs.core.types import ChannelSet, Solution
from activeirs.interface.conic_solver import SolverSettings, SolverStatus
from activeirs.services.conic_backend import ConicProblem, MatrixInequality, QuadraticConstraint, settings_for, solve_problem
from activeirs.services.problem_core import check_feasibility, dynamic_noise, link_gains

logger = logging.getLogger(__name__)

RANK_RATIO_WARNING = 1e-4
FEASIBILITY_TOL = 1e-6
# largest relative power increase accepted when lifting beams onto the SINR targets
REPAIR_LIMIT = 1e-3
LIFT_MARGIN = 1e-9


def extract_beamformers(W: Sequence[np.ndarray], warn_above: float = RANK_RATIO_WARNING) -> Tuple[np.ndarray, List[float]]:
    """Principal-eigenpair beamformers w_k = √λ1·u1 of each W_k.

    Returns:
        Tuple[np.ndarray, List[float]]: beamformers as rows (K, N_T) and the
        rank-one ratio λ2/λ1 of every W_k
    """
    beams, ratios = [], []
    for k, Wk in enumerate(W):
        w, ratio = principal_component(Wk)
        if ratio > warn_above:
            logger.warning("W_%d is not rank one: λ2/λ1 = %.2e", k + 1, ratio)
        beams.append(w)
        ratios.append(ratio)
    return np.array(beams, dtype=complex), ratios


@dataclass
class FixedReflectionResult:
    """Outcome of the fixed-reflection SDR."""

    solution: Optional[Solution]
    status: SolverStatus
    bs_power: float = float("nan")
    rank_ratios: List[float] = field(default_factory=list)
    iterations: int = 0
    solve_seconds: float = 0.0
    diagnostics: str = ""

    @property
    def feasible(self) -> bool:
        return self.status is SolverStatus.OPTIMAL and self.solution is not None


def lift_to_targets(
    channels: ChannelSet, sol: Solution, config: SystemConfig, limit: float = REPAIR_LIMIT
) -> Optional[Solution]:
    """Scale all beams by a common c ≥ 1 so every SINR meets Γ_req.

    SINR_k(c·w) = c²S_k / (c²I_k + N_k) grows with c, so the smallest factor is
    c² = max_k Γ N_k / (S_k − Γ I_k). Returns None when some user cannot be
    lifted or c² − 1 exceeds ``limit``.
    """
    gains = link_gains(channels, sol)
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    noise = dynamic_noise(channels, sol.psi, config) + config.sigma_n2
    room = signal - config.gamma_req * interference
    if np.any(room <= 0.0):
        return None
    factor = max(1.0, float(np.max(config.gamma_req * noise / room)) * (1.0 + LIFT_MARGIN))
    if factor - 1.0 > limit:
        return None
    return Solution(sol.w * np.sqrt(factor), sol.psi.copy())


def solve_fixed_reflection(
    channels: ChannelSet,
    config: SystemConfig,
    psi: Optional[np.ndarray] = None,
    include_c2: bool = True,
    settings: Optional[SolverSettings] = None,
    name: str = "fixed_reflection",
) -> FixedReflectionResult:
    """Minimise Σ‖w_k‖² for a fixed Ψ via SDR.

    Each W_k is written as n_k X_k with n_k = Γ N_k/‖h̄_k‖² the power user k
    would need alone, and each SINR row is divided by Γ N_k, so the own-beam
    coefficient is the unit direction ĥ_k and all data are O(1) however far
    apart the user gains are. The extracted beams are lifted by a common
    factor when solver accuracy leaves an SINR marginally short; results that
    still fail ``check_feasibility`` are reported as ``numerical_limit``.

    Args:
        psi: Reflection vector (zeros when omitted)
        include_c2: Add the IRS power constraint C2
        settings: Solver settings (taken from ``config`` when omitted)
        name: Problem name used in logs and dumps
    """
    psi = np.zeros(channels.m, dtype=complex) if psi is None else np.asarray(psi, dtype=complex)
    settings = settings or settings_for(config)
    hbar = channels.effective(psi)
    gains = np.sum(np.abs(hbar) ** 2, axis=1)
    if np.any(gains <= 0.0):
        logger.info("%s: an effective channel vanishes, outage", name)
        return FixedReflectionResult(None, SolverStatus.INFEASIBLE)

    noise = dynamic_noise(channels, psi, config) + config.sigma_n2
    need = config.gamma_req * noise / gains
    unit = float(np.mean(need))
    q = need / unit
    direction = hbar / np.sqrt(gains)[:, None]

    problem = ConicProblem(name)
    X = [problem.add_block(f"W_{k}", "hermitian", (channels.n_t, channels.n_t), symbol=f"W_{k + 1}") for k in range(channels.k)]
    problem.minimize(sum(q[k] * cp.real(cp.trace(Xk)) for k, Xk in enumerate(X)))

    def received(k: int, r: int) -> cp.Expression:
        return cp.real(direction[k].conj() @ X[r] @ direction[k])

    for k in range(channels.k):
        # ĥ_k^H X_k ĥ_k − Σ_{r≠k} (n_r ‖h̄_k‖²/N_k)·ĥ_k^H X_r ĥ_k ≥ 1
        c1 = QuadraticConstraint(f"C1[{k}]", symbol=f"SINR_{k + 1}")
        c1.add_affine(-received(k, k))
        for r in range(channels.k):
            if r != k:
                c1.add_affine((need[r] * gains[k] / noise[k]) * received(k, r))
        c1.add_constant(1.0)
        problem.add(c1)

    if include_c2:
        reflect = channels.G * psi[:, None]
        B = reflect.conj().T @ reflect
        rhs = (config.p_a - config.sigma_d2 * float(np.sum(np.abs(psi) ** 2))) / unit
        norm = max(float(np.max(np.abs(B))) * float(np.max(q)), abs(rhs), np.finfo(float).tiny)
        c2 = QuadraticConstraint("C2", rhs=rhs / norm, symbol="P_IRS")
        for k, Xk in enumerate(X):
            c2.add_affine(cp.real(cp.trace((q[k] * B / norm) @ Xk)))
        problem.add(c2)

    for k, Xk in enumerate(X):
        problem.add(MatrixInequality(f"C3[{k}]", Xk, symbol=f"W_{k + 1} >= 0"))

    result = solve_problem(problem, settings)
    if not result.optimal:
        logger.info("%s: solver status %s", name, result.status.value)
        return FixedReflectionResult(
            None,
            result.status,
            iterations=result.iterations,
            solve_seconds=result.solve_seconds,
            diagnostics=result.diagnostics,
        )

    beams, ratios = extract_beamformers([result.block(f"W_{k}") for k in range(channels.k)])
    solution = lift_to_targets(channels, Solution(beams * np.sqrt(need)[:, None], psi.copy()), config)
    if solution is None or not _meets_constraints(channels, solution, config, include_c2):
        logger.info("%s: solver point fails the constraint check, treating as numerical limit", name)
        return FixedReflectionResult(
            None,
            SolverStatus.NUMERICAL_LIMIT,
            rank_ratios=ratios,
            iterations=result.iterations,
            solve_seconds=result.solve_seconds,
            diagnostics=f"{result.diagnostics}; constraint check failed",
        )
    return FixedReflectionResult(
        solution=solution,
        status=result.status,
        bs_power=float(np.sum(np.abs(solution.w) ** 2)),
        rank_ratios=ratios,
        iterations=result.iterations,
        solve_seconds=result.solve_seconds,
        diagnostics=result.diagnostics,
    )


def _meets_constraints(channels: ChannelSet, sol: Solution, config: SystemConfig, include_c2: bool) -> bool:
    report = check_feasibility(channels, sol, config, FEASIBILITY_TOL)
    if include_c2:
        return report.feasible
    return bool(np.all(report.c1_margins >= -FEASIBILITY_TOL * max(1.0, config.gamma_req)))
