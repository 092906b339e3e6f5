"""Inner-approximation (IA) solver for joint beamforming and active-IRS design.

The products of W_k and Ψ are removed by the bilinear substitutions
Z_r = W_r G^H Ψ^H and U_r = W_r G^H G W_r, V_r = ΨΨ^H, held exact by the
block LMI (C5) together with Tr(U_r) ≤ Tr(W_r G^H G W_r) (C6). Each coupling
term Re Tr(Ψ X) is rewritten with the polarisation identity
Re Tr(C^H D) = ½‖C ± D‖² − ½‖C‖² − ½‖D‖² (sign chosen so the kept square is
convex on the side it appears), and every concave remainder is replaced by
its first-order minorant at the current iterate. The resulting convex
restriction is solved by SDR (rank constraint dropped) and re-expanded until
the relative decrease of Σ Tr(W_k) falls below ε.

In the restriction, C5 and C6bar hold G W_r at its expansion value, so each
step solves it over Ψ with the beams held (``build_reflection_step``) and
then re-solves the beams for the new Ψ (``solve_fixed_reflection``).
``build_subproblem`` assembles the full restriction for inspection and dumps.

All iterations run on the scaled instance of ``problem_core.scale_instance``;
``run`` maps the result back to physical units.
"""

import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

import cvxpy as cp
import numpy as np
import pandas as pd

from activeirs.core.config import SystemConfig
from activeirs.core.errors import ContractViolation, InitializationError, IterationError
from activeirs.core.linalg import fro2, frobenius_inner, hermitian_part, outer
from activeirs.core.types import ChannelSet, Solution
from activeirs.interface.conic_solver import SolverSettings, SolverStatus
from activeirs.interface.scheme import Scheme, SchemeOutcome
from activeirs.services.beamforming import FixedReflectionResult, extract_beamformers, solve_fixed_reflection
from activeirs.services.conic_backend import (
    ConicProblem,
    MatrixInequality,
    QuadraticConstraint,
    assemble,
    settings_for,
    solve,
)
from activeirs.services.problem_core import (
    ScaledInstance,
    bs_transmit_power,
    check_feasibility,
    scale_instance,
    trace_form_report,
)

logger = logging.getLogger(__name__)

__all__ = [
    "AffineMinorant",
    "ConvergenceTrace",
    "IterateState",
    "ProposedScheme",
    "Subproblem",
    "SubproblemVariables",
    "build_c1bar",
    "build_c2bar",
    "build_c5_c6bar",
    "build_reflection_step",
    "build_subproblem",
    "extract_beamformers",
    "initialize",
    "linearize_psi_quadratic",
    "linearize_w_quadratic",
    "linearize_z_quadratic",
    "prepare",
    "run",
    "solve_iteration",
    "subproblem_inventory",
]

MONOTONE_TOL = 1e-7
FEASIBILITY_TOL = 1e-6
C2_INIT_SLACK = 0.5
MAX_BISECTIONS = 60
# upper bound on the common SINR slack of the reflection step
SLACK_CAP = 1e2


@dataclass
class IterateState:
    """One IA expansion point (scaled units).

    Shapes: W (K, N_T, N_T), psi (M,), Z (K, N_T, M), U (K, N_T, N_T),
    V (K, M, M).
    """

    W: np.ndarray
    psi: np.ndarray
    Z: np.ndarray
    U: np.ndarray
    V: np.ndarray
    iteration: int = 0

    @property
    def objective(self) -> float:
        """Σ_k Re Tr(W_k)."""
        return float(np.real(np.einsum("kii->", self.W)))

    @property
    def k(self) -> int:
        return int(self.W.shape[0])

    @classmethod
    def consistent(cls, G: np.ndarray, W: np.ndarray, psi: np.ndarray, iteration: int = 0) -> "IterateState":
        """Expansion point with Z, U, V set from (W, Ψ), so C5 and C6 hold with equality."""
        W = np.stack([hermitian_part(Wk) for Wk in W])
        psi = np.asarray(psi, dtype=complex)
        Psi_h = np.diag(psi.conj())
        GhG = G.conj().T @ G
        Z = np.stack([Wk @ G.conj().T @ Psi_h for Wk in W])
        U = np.stack([hermitian_part(Wk @ GhG @ Wk) for Wk in W])
        V = np.stack([np.diag(np.abs(psi) ** 2).astype(complex) for _ in W])
        return cls(W, psi, Z, U, V, iteration)

    def consistency_gap(self, G: np.ndarray) -> float:
        """max_r ‖Z_r − W_r G^H Ψ^H‖_F."""
        Psi_h = np.diag(self.psi.conj())
        gaps = [np.linalg.norm(Zr - Wr @ G.conj().T @ Psi_h) for Zr, Wr in zip(self.Z, self.W)]
        return float(max(gaps)) if gaps else 0.0


@dataclass(frozen=True)
class AffineMinorant:
    """Affine function L(X) = 2·Re Tr(A^H X) + c."""

    gradient: np.ndarray
    constant: float

    def evaluate(self, x: np.ndarray) -> float:
        return 2.0 * frobenius_inner(self.gradient, x).real + self.constant

    def expression(self, x: cp.Expression) -> cp.Expression:
        return 2.0 * cp.real(cp.sum(cp.multiply(np.conj(self.gradient), x))) + self.constant


def linearize_psi_quadratic(psi_j: np.ndarray) -> AffineMinorant:
    """Minorant of ‖Ψ‖_F² = ‖ψ‖²: 2 Re(ψ_j^H ψ) − ‖ψ_j‖²."""
    psi_j = np.asarray(psi_j, dtype=complex)
    return AffineMinorant(psi_j, -fro2(psi_j))


def linearize_z_quadratic(Z_j: np.ndarray, G: np.ndarray, H: Optional[np.ndarray] = None) -> AffineMinorant:
    """Minorant of ‖G Z H‖_F² at Z_j (H = I when omitted).

    Gradient A = G^H G Z_j H H^H, constant −‖G Z_j H‖_F².
    """
    Z_j = np.asarray(Z_j, dtype=complex)
    H = np.eye(Z_j.shape[1]) if H is None else H
    GZH = G @ Z_j @ H
    return AffineMinorant(G.conj().T @ GZH @ H.conj().T, -fro2(GZH))


def linearize_w_quadratic(W_j: np.ndarray, G: np.ndarray) -> AffineMinorant:
    """Minorant of Tr(W G^H G W^H) = ‖W G^H‖_F² at W_j: 2 Re Tr((G^H G W_j)^H W) − ‖W_j G^H‖_F²."""
    W_j = np.asarray(W_j, dtype=complex)
    return AffineMinorant(G.conj().T @ G @ W_j, -fro2(W_j @ G.conj().T))


def split_weight(x_norm: float, psi_norm: float) -> float:
    """Balanced weight a with a² = ‖X‖/‖ψ‖ (1 when either vanishes)."""
    if x_norm <= 0.0 or psi_norm <= 0.0:
        return 1.0
    return float(np.sqrt(x_norm / psi_norm))


@dataclass
class SubproblemVariables:
    """cvxpy variables of one IA subproblem, registered in a ``ConicProblem``."""

    W: List[cp.Expression]
    psi: cp.Variable
    Z: List[cp.Expression]
    U: List[cp.Variable]
    V: List[cp.Variable]

    @classmethod
    def create(cls, problem: ConicProblem, n_t: int, m: int, k: int) -> "SubproblemVariables":
        W = [problem.add_block(f"W_{r}", "hermitian", (n_t, n_t), symbol=f"W_{r + 1}") for r in range(k)]
        psi = problem.add_block("psi", "complex", (m,), symbol="diag(Psi)")
        Z = [problem.add_block(f"Z_{r}", "complex", (n_t, m), symbol=f"Z_{r + 1}") for r in range(k)]
        U = [problem.add_block(f"U_{r}", "hermitian", (n_t, n_t), symbol=f"U_{r + 1}") for r in range(k)]
        V = [problem.add_block(f"V_{r}", "hermitian", (m, m), symbol=f"V_{r + 1}") for r in range(k)]
        return cls(W, psi, Z, U, V)

    def assign(self, iterate: IterateState) -> None:
        """Set variable values to an iterate (for evaluating constraints)."""
        for r in range(len(self.W)):
            self.W[r].value = hermitian_part(iterate.W[r])
            self.Z[r].value = np.asarray(iterate.Z[r], dtype=complex)
            self.U[r].value = hermitian_part(iterate.U[r])
            self.V[r].value = hermitian_part(iterate.V[r])
        self.psi.value = np.asarray(iterate.psi, dtype=complex)


def _variables_for(channels: ChannelSet, variables: Optional[SubproblemVariables]) -> SubproblemVariables:
    if variables is not None:
        return variables
    return SubproblemVariables.create(ConicProblem("scratch"), channels.n_t, channels.m, channels.k)


def _check_iterate(channels: ChannelSet, iterate: IterateState) -> None:
    n_t, m, k = channels.n_t, channels.m, channels.k
    expected = {
        "W": (k, n_t, n_t),
        "psi": (m,),
        "Z": (k, n_t, m),
        "U": (k, n_t, n_t),
        "V": (k, m, m),
    }
    for name, shape in expected.items():
        actual = np.shape(getattr(iterate, name))
        if actual != shape:
            raise ContractViolation(f"iterate field {name} has shape {actual}, expected {shape}")


def build_c1bar(
    channels: ChannelSet,
    config: SystemConfig,
    iterate: IterateState,
    k: int,
    variables: Optional[SubproblemVariables] = None,
) -> QuadraticConstraint:
    """Convex restriction of the SINR constraint of user ``k`` at ``iterate``.

    Interference beams r ≠ k contribute
    Γ[Tr(H_D W_r) + ½‖aΨ^H + G Z_r H_R/a‖² − ½a²L_Ψ − ½a⁻²L_Z(Z_r) + 2Re(h_D^H Z_r h_R)],
    the desired beam contributes
    −Tr(H_D W_k) + ½‖bΨ^H − G Z_k H_R/b‖² − ½b²L_Ψ − ½b⁻²L_Z(Z_k) − 2Re(h_D^H Z_k h_R),
    plus Γσ_d²‖h_R^H Ψ‖² + Γσ_n² ≤ 0.
    """
    var = _variables_for(channels, variables)
    gamma = config.gamma_req
    h_d, h_r, G = channels.h_d[k], channels.h_r[k], channels.G
    H = outer(h_r)
    Psi_h = cp.diag(cp.conj(var.psi))
    psi_norm = float(np.linalg.norm(iterate.psi))
    lin_psi = linearize_psi_quadratic(iterate.psi).expression(var.psi)

    con = QuadraticConstraint(f"C1bar[{k}]", symbol=f"SINR_{k + 1}")
    for r in range(channels.k):
        X_j = G @ iterate.Z[r] @ H
        a = split_weight(float(np.linalg.norm(X_j)), psi_norm)
        lin_z = linearize_z_quadratic(iterate.Z[r], G, H).expression(var.Z[r])
        direct = cp.real(h_d.conj() @ var.W[r] @ h_d)
        cross = 2.0 * cp.real(h_d.conj() @ var.Z[r] @ h_r)
        reflected = G @ var.Z[r] @ H / a
        if r == k:
            con.add_affine(-direct - cross - 0.5 * a ** 2 * lin_psi - 0.5 / a ** 2 * lin_z)
            con.add_square(0.5, a * Psi_h - reflected)
        else:
            con.add_affine(gamma * (direct + cross - 0.5 * a ** 2 * lin_psi - 0.5 / a ** 2 * lin_z))
            con.add_square(0.5 * gamma, a * Psi_h + reflected)
    con.add_square(gamma * config.sigma_d2, cp.multiply(np.abs(h_r), var.psi))
    con.add_constant(gamma * config.sigma_n2)
    return con


def build_c2bar(
    channels: ChannelSet,
    config: SystemConfig,
    iterate: IterateState,
    variables: Optional[SubproblemVariables] = None,
) -> QuadraticConstraint:
    """Convex restriction of the IRS power constraint at ``iterate``:
    Σ_k [½‖cΨ^H + G Z_k/c‖² − ½c²L_Ψ − ½c⁻²L_GZ(Z_k)] + σ_d²‖ψ‖² ≤ P_A.
    """
    var = _variables_for(channels, variables)
    G = channels.G
    Psi_h = cp.diag(cp.conj(var.psi))
    psi_norm = float(np.linalg.norm(iterate.psi))
    lin_psi = linearize_psi_quadratic(iterate.psi).expression(var.psi)

    con = QuadraticConstraint("C2bar", rhs=config.p_a, symbol="P_IRS")
    for r in range(channels.k):
        c = split_weight(float(np.linalg.norm(G @ iterate.Z[r])), psi_norm)
        lin_z = linearize_z_quadratic(iterate.Z[r], G).expression(var.Z[r])
        con.add_square(0.5, c * Psi_h + G @ var.Z[r] / c)
        con.add_affine(-0.5 * c ** 2 * lin_psi - 0.5 / c ** 2 * lin_z)
    con.add_square(config.sigma_d2, var.psi)
    return con


def build_c5_c6bar(
    iterate: IterateState,
    G: np.ndarray,
    variables: SubproblemVariables,
) -> List[Tuple[MatrixInequality, QuadraticConstraint]]:
    """Per beam r: the block LMI
    [[U_r, Z_r, W_r G^H], [Z_r^H, V_r, Ψ], [G W_r, Ψ^H, I_M]] ⪰ 0
    and Tr(U_r) − L_W(W_r) ≤ 0.
    """
    m = G.shape[0]
    Psi = cp.diag(variables.psi)
    Psi_h = cp.diag(cp.conj(variables.psi))
    pairs = []
    for r in range(len(variables.W)):
        W, Z, U, V = variables.W[r], variables.Z[r], variables.U[r], variables.V[r]
        block = cp.bmat(
            [
                [U, Z, W @ G.conj().T],
                [Z.H, V, Psi],
                [G @ W, Psi_h, np.eye(m)],
            ]
        )
        lmi = MatrixInequality(f"C5[{r}]", block, symbol=f"LMI block {r + 1}")
        c6 = QuadraticConstraint(f"C6bar[{r}]", symbol=f"Tr U_{r + 1}")
        c6.add_affine(cp.real(cp.trace(U)) - linearize_w_quadratic(iterate.W[r], G).expression(W))
        pairs.append((lmi, c6))
    return pairs


@dataclass
class Subproblem:
    """One assembled-ready convex restriction and the handles to its parts.

    With ``fixed_beams`` the W blocks are the constants of ``expansion`` and
    only ψ (and the SINR slack) are decision variables.
    """

    problem: ConicProblem
    variables: SubproblemVariables
    expansion: IterateState
    c1bar: List[QuadraticConstraint]
    c2bar: QuadraticConstraint
    c5: List[MatrixInequality]
    c6bar: List[QuadraticConstraint]
    G: Optional[np.ndarray] = None
    fixed_beams: bool = False


def build_subproblem(
    channels: ChannelSet, config: SystemConfig, iterate: IterateState
) -> Subproblem:
    """Convex restriction solved in one IA step.

    Objective Σ Re Tr(W_k); constraints C1bar (per user), C2bar, W_k ⪰ 0,
    C5 and C6bar (per beam) and, with ``bound_aux_v``, Tr(V_r) ≤ P_A/σ_d².
    The rank-one constraint on W_k is dropped.
    """
    _check_iterate(channels, iterate)
    problem = ConicProblem(f"ia_step_{iterate.iteration + 1}")
    var = SubproblemVariables.create(problem, channels.n_t, channels.m, channels.k)
    problem.minimize(sum(cp.real(cp.trace(W)) for W in var.W))

    c1bar = [build_c1bar(channels, config, iterate, k, var) for k in range(channels.k)]
    c2bar = build_c2bar(channels, config, iterate, var)
    for con in c1bar:
        problem.add(con)
    problem.add(c2bar)
    for k, W in enumerate(var.W):
        problem.add(MatrixInequality(f"C3[{k}]", W, symbol=f"W_{k + 1} >= 0"))

    pairs = build_c5_c6bar(iterate, channels.G, var)
    for lmi, c6 in pairs:
        problem.add(lmi)
        problem.add(c6)

    if config.bound_aux_v:
        cap = config.p_a / config.sigma_d2
        for r, V in enumerate(var.V):
            vcap = QuadraticConstraint(f"Vcap[{r}]", rhs=cap, symbol=f"Tr V_{r + 1}")
            vcap.add_affine(cp.real(cp.trace(V)))
            problem.add(vcap)

    return Subproblem(problem, var, iterate, c1bar, c2bar, [p[0] for p in pairs], [p[1] for p in pairs])


def build_reflection_step(channels: ChannelSet, config: SystemConfig, iterate: IterateState) -> Subproblem:
    """Convex restriction over ψ with the beams held at ``iterate``.

    C5 gives Tr(U_r) ≥ ‖G W_r‖² ≥ L_W(W_r), so together with C6bar it pins
    G W_r = G W_r^(j) on the whole feasible set of ``build_subproblem``; the
    objective there is constant and only ψ can move. Substituting W_r = W_r^(j)
    and Z_r = W_r^(j) G^H Ψ^H leaves C1bar and C2bar over ψ alone (the same
    ψ-set when G has full column rank, a restriction of it otherwise).

    A common slack t inflates every noise term to Γσ_n²(1 + t), and t is
    maximised so the SINR targets gain room for the next beam update. ψ_j
    with t = 0 is feasible.
    """
    _check_iterate(channels, iterate)
    G = channels.G
    problem = ConicProblem(f"ia_reflection_{iterate.iteration + 1}")
    psi = problem.add_block("psi", "complex", (channels.m,), symbol="diag(Psi)")
    slack = problem.add_block("t", "real", (), symbol="SINR slack")
    Psi_h = cp.diag(cp.conj(psi))
    var = SubproblemVariables(
        W=[cp.Constant(hermitian_part(Wr)) for Wr in iterate.W],
        psi=psi,
        Z=[cp.Constant(Wr @ G.conj().T) @ Psi_h for Wr in iterate.W],
        U=[],
        V=[],
    )
    problem.minimize(-slack)

    c1bar = [build_c1bar(channels, config, iterate, k, var) for k in range(channels.k)]
    for con in c1bar:
        con.add_affine(config.gamma_req * config.sigma_n2 * slack)
        problem.add(con)
    c2bar = build_c2bar(channels, config, iterate, var)
    problem.add(c2bar)
    cap = QuadraticConstraint("slack_cap", rhs=SLACK_CAP, symbol="t")
    cap.add_affine(slack)
    problem.add(cap)
    return Subproblem(problem, var, iterate, c1bar, c2bar, [], [], G=G, fixed_beams=True)


def subproblem_inventory(n_t: int, k: int, m: int, bound_aux_v: bool = False) -> Dict[str, Any]:
    """Closed-form size of ``build_subproblem`` for (N_T, K, M).

    Decision variables: K N² (W) + 2M (ψ) + 2KNM (Z) + K N² (U) + K M² (V)
    real degrees of freedom; (K+1)² epigraph scalars, one per squared norm.
    """
    return {
        "variables": k * n_t ** 2 + 2 * m + 2 * k * n_t * m + k * n_t ** 2 + k * m ** 2,
        "epigraphs": (k + 1) ** 2,
        "soc": (k + 1) ** 2,
        "psd": [2 * n_t] * k + [2 * (n_t + 2 * m)] * k,
        "nonneg": k + 1 + k + (k if bound_aux_v else 0),
    }


def solve_iteration(subproblem: Subproblem, settings: SolverSettings) -> IterateState:
    """Solve one convex restriction.

    Raises:
        IterationError: If the solver does not report an optimal point
    """
    assembled = assemble(subproblem.problem, settings.solver)
    result = solve(assembled, settings)
    if result.status is not SolverStatus.OPTIMAL:
        raise IterationError(result.status.value, f"{subproblem.problem.name}: {result.diagnostics}")

    expansion = subproblem.expansion
    psi = np.asarray(result.block("psi"), dtype=complex)
    if subproblem.fixed_beams:
        return IterateState.consistent(subproblem.G, expansion.W, psi, expansion.iteration + 1)

    k = len(subproblem.variables.W)
    new = IterateState(
        W=np.stack([result.block(f"W_{r}") for r in range(k)]),
        psi=psi,
        Z=np.stack([np.asarray(result.block(f"Z_{r}"), dtype=complex) for r in range(k)]),
        U=np.stack([result.block(f"U_{r}") for r in range(k)]),
        V=np.stack([result.block(f"V_{r}") for r in range(k)]),
        iteration=expansion.iteration + 1,
    )
    previous = expansion.objective
    if new.objective > previous + MONOTONE_TOL * max(1.0, abs(previous)):
        logger.debug("%s: objective rose from %.9g to %.9g", subproblem.problem.name, previous, new.objective)
    return new


def initialize(
    channels: ChannelSet,
    config: SystemConfig,
    rng: Optional[np.random.Generator] = None,
    beamformers: Optional[np.ndarray] = None,
) -> IterateState:
    """Feasible starting point for the IA loop.

    W_k = (1+δ) w_k w_k^H from the no-IRS optimum; Ψ = ρ·diag(e^{jθ}) with
    random phases and ρ set so C2 has 50% slack, halved until every SINR
    constraint holds; Z, U, V consistent with (W, Ψ).

    Args:
        beamformers: No-IRS optimum as rows; solved here when omitted

    Raises:
        InitializationError: If the no-IRS problem is infeasible
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    if beamformers is None:
        base = solve_fixed_reflection(channels, config, include_c2=False, name="ia_init")
        if not base.feasible:
            raise InitializationError(f"no-IRS problem has status '{base.status.value}'")
        beamformers = base.solution.w
    W = (1.0 + config.init_margin) * np.stack([outer(w) for w in beamformers])

    theta = np.exp(1j * rng.uniform(0.0, 2.0 * np.pi, size=channels.m))
    # unit-modulus phases leave Tr(ΘGW_kG^HΘ^H) = Tr(GW_kG^H)
    reflect = sum(float(np.real(np.trace(channels.G @ Wk @ channels.G.conj().T))) for Wk in W)
    load = reflect + config.sigma_d2 * channels.m
    rho = np.sqrt(C2_INIT_SLACK * config.p_a / load)

    for _ in range(MAX_BISECTIONS):
        psi = rho * theta
        report = trace_form_report(channels, W, psi, config, tol=1e-12)
        if np.all(report.c1_margins >= 0.0) and report.c2_margin >= 0.0:
            return IterateState.consistent(channels.G, W, psi)
        rho *= 0.5
    logger.info("initial reflection shrunk to zero")
    return IterateState.consistent(channels.G, W, np.zeros(channels.m, dtype=complex))


@dataclass
class TraceRow:
    iteration: int
    objective_W: float
    max_violation: float
    solver_status: str
    seconds: float


TRACE_COLUMNS = ["iteration", "objective_W", "max_violation", "solver_status", "seconds"]


@dataclass
class ConvergenceTrace:
    """Per-iteration record of one IA run (objective in physical watts)."""

    rows: List[TraceRow] = field(default_factory=list)
    converged: bool = False
    max_iter_reached: bool = False
    stop_reason: str = ""
    retries: int = 0
    polished: bool = False
    fallback: bool = False
    selected: str = ""
    rank_ratios: List[float] = field(default_factory=list)

    def record(self, iteration: int, objective: float, violation: float, status: str, seconds: float) -> None:
        self.rows.append(TraceRow(iteration, objective, violation, status, seconds))

    @property
    def objectives(self) -> np.ndarray:
        return np.array([row.objective_W for row in self.rows if np.isfinite(row.objective_W)])

    @property
    def iterations(self) -> int:
        """Accepted IA steps (the initial point is row 0)."""
        return sum(1 for row in self.rows if row.solver_status == "optimal")

    def is_monotone(self, rel_tol: float = MONOTONE_TOL) -> bool:
        obj = self.objectives
        return bool(np.all(obj[1:] <= obj[:-1] + rel_tol * np.abs(obj[:-1])))

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.__dict__ for row in self.rows], columns=TRACE_COLUMNS)

    def write_csv(self, path: Union[str, Path]) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.9g", encoding="utf-8")


def _physical_objective(instance: ScaledInstance, iterate: IterateState) -> float:
    return instance.power_scale * iterate.objective


def _violation(instance: ScaledInstance, iterate: IterateState) -> float:
    report = trace_form_report(instance.channels, iterate.W, iterate.psi, instance.config, FEASIBILITY_TOL)
    return report.max_violation(instance.config.gamma_req, instance.config.p_a)


def _feasible(instance: ScaledInstance, iterate: IterateState) -> bool:
    return trace_form_report(instance.channels, iterate.W, iterate.psi, instance.config, FEASIBILITY_TOL).feasible


def _step(
    instance: ScaledInstance, expansion: IterateState, settings: SolverSettings
) -> Tuple[IterateState, IterateState, List[float]]:
    """One IA step at ``expansion``.

    Ψ moves within the restriction with the beams held, then the beams are
    re-solved exactly for the new Ψ. The held beams stay feasible for the new
    Ψ, so the re-solved power is never above Σ Tr(W_k^(j)).

    Returns:
        Tuple: (reflection iterate, consistent iterate with the new beams,
        rank-one ratios of the beam SDR)

    Raises:
        IterationError: If either solve does not reach a feasible optimum
    """
    channels, config = instance.channels, instance.config
    moved = solve_iteration(build_reflection_step(channels, config, expansion), settings)
    beams = solve_fixed_reflection(
        channels, config, psi=moved.psi, include_c2=True, settings=settings, name=f"ia_beams_{moved.iteration}"
    )
    if not beams.feasible:
        raise IterationError(beams.status.value, f"beam update {moved.iteration}: {beams.diagnostics}")
    W = np.stack([outer(w) for w in beams.solution.w])
    return moved, IterateState.consistent(channels.G, W, moved.psi, moved.iteration), beams.rank_ratios


def prepare(
    channels: ChannelSet,
    config: SystemConfig,
    rng: Optional[np.random.Generator] = None,
    settings: Optional[SolverSettings] = None,
) -> Tuple[ScaledInstance, IterateState, FixedReflectionResult]:
    """Scaled instance, starting iterate and no-IRS optimum of an IA run.

    The no-IRS optimum sets the power scale and seeds the beamformers.

    Raises:
        InitializationError: If the no-IRS problem is infeasible
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    settings = settings or settings_for(config)
    base = solve_fixed_reflection(channels, config, include_c2=False, settings=settings, name="ia_init")
    if not base.feasible:
        raise InitializationError(f"no-IRS problem has status '{base.status.value}'")
    instance = scale_instance(channels, config, base.bs_power)
    w0 = instance.to_scaled(base.solution).w
    return instance, initialize(instance.channels, instance.config, rng, beamformers=w0), base


def run(
    channels: ChannelSet,
    config: SystemConfig,
    rng: Optional[np.random.Generator] = None,
) -> Tuple[Solution, ConvergenceTrace]:
    """Run the IA algorithm on one drop.

    Stops when (F_prev − F)/F ≤ ε or after ``max_iter`` steps. A step whose
    objective rises is retried once from the midpoint of the old and new
    points; otherwise the loop stops with the best iterate. The result is
    the cheapest feasible point among the last iterate, its refinement for
    the final Ψ and the no-IRS optimum.

    Raises:
        InitializationError: If no feasible starting point exists
    """
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    settings = settings_for(config)
    trace = ConvergenceTrace()

    start = time.perf_counter()
    instance, iterate, base = prepare(channels, config, rng, settings)
    trace.rank_ratios = list(base.rank_ratios)
    trace.record(0, _physical_objective(instance, iterate), _violation(instance, iterate), "initial", time.perf_counter() - start)
    initial = iterate

    for j in range(1, config.max_iter + 1):
        tick = time.perf_counter()
        try:
            _, candidate, ratios = _step(instance, iterate, settings)
        except IterationError as exc:
            trace.record(j, float("nan"), float("nan"), exc.status, time.perf_counter() - tick)
            trace.stop_reason = f"solver_{exc.status}"
            logger.warning("IA step %d failed (%s); keeping iterate %d", j, exc.status, iterate.iteration)
            break

        previous = iterate.objective
        if candidate.objective > previous * (1.0 + MONOTONE_TOL) or not _feasible(instance, candidate):
            trace.retries += 1
            middle = IterateState.consistent(
                instance.channels.G, 0.5 * (iterate.W + candidate.W), 0.5 * (iterate.psi + candidate.psi), iterate.iteration
            )
            logger.info("IA step %d did not descend; retrying from the midpoint", j)
            retried = None
            if _feasible(instance, middle):
                try:
                    _, retried, ratios = _step(instance, middle, settings)
                except IterationError as exc:
                    logger.info("midpoint retry failed (%s)", exc.status)
            if retried is None or retried.objective > previous * (1.0 + MONOTONE_TOL) or not _feasible(instance, retried):
                trace.record(j, float("nan"), float("nan"), "stalled", time.perf_counter() - tick)
                trace.stop_reason = "stalled"
                break
            candidate = retried

        candidate.iteration = j
        iterate = candidate
        trace.rank_ratios = list(ratios)
        trace.record(
            j, _physical_objective(instance, iterate), _violation(instance, iterate), "optimal", time.perf_counter() - tick
        )
        decrease = (previous - iterate.objective) / max(iterate.objective, np.finfo(float).tiny)
        if decrease <= config.epsilon:
            trace.converged = True
            trace.stop_reason = "converged"
            break
    else:
        trace.max_iter_reached = True
        trace.stop_reason = "max_iter"
        logger.warning("IA stopped after max_iter=%d without meeting epsilon=%g", config.max_iter, config.epsilon)

    solution = _finalize(instance, iterate, initial, base, settings, trace)
    return solution, trace


def _finalize(
    instance: ScaledInstance,
    iterate: IterateState,
    initial: IterateState,
    base: FixedReflectionResult,
    settings: SolverSettings,
    trace: ConvergenceTrace,
) -> Solution:
    """Map the best iterate to a feasible physical solution."""
    channels, config = instance.channels, instance.config
    beams, _ = extract_beamformers(iterate.W)
    candidates = {"iterate": (Solution(beams, iterate.psi.copy()), trace.rank_ratios)}

    if config.polish:
        refined = solve_fixed_reflection(channels, config, psi=iterate.psi, include_c2=True, settings=settings, name="ia_polish")
        if refined.feasible:
            candidates["polished"] = (refined.solution, refined.rank_ratios)
    candidates["no_irs"] = (instance.to_scaled(base.solution), base.rank_ratios)

    feasible = {
        label: entry
        for label, entry in candidates.items()
        if check_feasibility(channels, entry[0], config, FEASIBILITY_TOL).feasible
    }
    if feasible:
        # dict order breaks ties toward the IA iterate
        label = min(feasible, key=lambda name: bs_transmit_power(feasible[name][0]))
        best, trace.rank_ratios = feasible[label]
    else:
        logger.warning("IA result failed the feasibility check; falling back to the initial point")
        label = "initial"
        init_beams, _ = extract_beamformers(initial.W)
        best = Solution(init_beams, initial.psi.copy())
    trace.selected = label
    trace.polished = label == "polished"
    trace.fallback = label == "initial"
    if label == "no_irs":
        logger.info("IA did not improve on the no-IRS optimum; keeping it")
    return instance.to_physical(best)


class ProposedScheme(Scheme):
    """Joint beamforming and active-IRS design as a sweep scheme."""

    name = "proposed"

    def solve(self, channels: ChannelSet, config: SystemConfig, rng: np.random.Generator) -> SchemeOutcome:
        start = time.perf_counter()
        try:
            solution, trace = run(channels, config, rng)
        except InitializationError as exc:
            logger.info("proposed: outage (%s)", exc)
            return SchemeOutcome(None, False, solve_seconds=time.perf_counter() - start, details={"status": "init_failed"})
        elapsed = time.perf_counter() - start
        if not check_feasibility(channels, solution, config, FEASIBILITY_TOL).feasible:
            logger.info("proposed: result violates the constraints, outage")
            return SchemeOutcome(None, False, solve_seconds=elapsed, details={"status": "infeasible_result"})
        power = bs_transmit_power(solution)
        return SchemeOutcome(
            solution=solution,
            feasible=True,
            bs_power=power,
            total_power=power + config.p_a,
            iterations=trace.iterations,
            solve_seconds=elapsed,
            details={
                "status": trace.stop_reason,
                "converged": trace.converged,
                "max_iter_reached": trace.max_iter_reached,
                "polished": trace.polished,
                "selected": trace.selected,
                "max_rank_ratio": max(trace.rank_ratios) if trace.rank_ratios else 0.0,
            },
        )
