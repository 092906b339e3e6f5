"""Numerical self-checks run by ``activeirs verify``.

Every suite draws its own random instances from a seeded generator and
returns a ``VerificationRecord`` with the worst observed deviation, so a
failing check points at a concrete magnitude rather than a bare flag.
"""

import logging
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, Optional

import cvxpy as cp
import numpy as np

from activeirs.core.config import SystemConfig
from activeirs.core.linalg import fro2, hermitian_real_embedding, outer
from activeirs.core.types import ChannelSet, Solution
from activeirs.interface.conic_solver import SolverSettings
from activeirs.services.conic_backend import ConicProblem, MatrixInequality, QuadraticConstraint, solve_problem
from activeirs.services.ia_solver import (
    IterateState,
    SubproblemVariables,
    build_c1bar,
    build_c2bar,
    build_c5_c6bar,
    linearize_psi_quadratic,
    linearize_w_quadratic,
    linearize_z_quadratic,
)
from activeirs.services.problem_core import c1_residual, c2_residual, compute_sinrs, trace_form_report

logger = logging.getLogger(__name__)

EMBEDDING_TOL = 1e-10
MINORANT_TOL = 1e-9
TIGHTNESS_TOL = 1e-9
IDENTITY_TOL = 1e-9
LMI_SOLVER_TOL = 1e-10
# interior-point accuracy on the pinning SDPs, which have no strictly feasible point
LMI_TOL = 1e-5


@dataclass
class VerificationRecord:
    """Outcome of one suite."""

    name: str
    passed: bool
    samples: int
    worst: float
    tolerance: float
    seconds: float = 0.0
    detail: str = ""

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "passed": self.passed,
            "samples": self.samples,
            "worst": self.worst,
            "tolerance": self.tolerance,
            "seconds": self.seconds,
            "detail": self.detail,
        }


def _crandn(rng: np.random.Generator, *shape: int) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _random_hermitian(rng: np.random.Generator, n: int) -> np.ndarray:
    a = _crandn(rng, n, n)
    return (a + a.conj().T) / 2.0


def _random_instance(rng: np.random.Generator, n_t: int = 3, k: int = 2, m: int = 4) -> ChannelSet:
    return ChannelSet(G=_crandn(rng, m, n_t), h_d=_crandn(rng, k, n_t), h_r=_crandn(rng, k, m))


def _unit_config(n_t: int, k: int, m: int) -> SystemConfig:
    return SystemConfig(n_t=n_t, k=k, m=m, sigma_n2=1.0, sigma_d2=0.1, gamma_req=2.0, p_a=1.0)


def check_embedding_equivalence(rng: np.random.Generator, samples: int = 1000) -> VerificationRecord:
    """λ_min of a Hermitian matrix equals λ_min of its real embedding."""
    worst = 0.0
    sign_mismatch = 0
    for _ in range(samples):
        n = int(rng.integers(1, 6))
        x = _random_hermitian(rng, n)
        # shift so roughly half the samples are PSD
        x = x - rng.uniform(-1.0, 1.0) * np.linalg.norm(x, 2) * np.eye(n)
        lam = float(np.linalg.eigvalsh(x)[0])
        lam_emb = float(np.linalg.eigvalsh(hermitian_real_embedding(x))[0])
        worst = max(worst, abs(lam - lam_emb) / max(1.0, abs(lam)))
        if abs(lam) > EMBEDDING_TOL and np.sign(lam) != np.sign(lam_emb):
            sign_mismatch += 1
    passed = worst <= EMBEDDING_TOL and sign_mismatch == 0
    return VerificationRecord(
        "embedding", passed, samples, worst, EMBEDDING_TOL, detail=f"{sign_mismatch} sign mismatches"
    )


def check_minorants(rng: np.random.Generator, samples: int = 1000) -> VerificationRecord:
    """Each affine underestimator stays below its quadratic and touches it at the expansion point."""
    worst = 0.0
    for _ in range(samples):
        n_t, m = int(rng.integers(1, 5)), int(rng.integers(1, 6))
        G = _crandn(rng, m, n_t)
        h_r = _crandn(rng, m)
        H = outer(h_r)

        psi_j, psi = _crandn(rng, m), _crandn(rng, m)
        Z_j, Z = _crandn(rng, n_t, m), _crandn(rng, n_t, m)
        W_j, W = _random_hermitian(rng, n_t), _random_hermitian(rng, n_t)

        cases = [
            (linearize_psi_quadratic(psi_j), lambda x: fro2(x), psi_j, psi),
            (linearize_z_quadratic(Z_j, G, H), lambda x: fro2(G @ x @ H), Z_j, Z),
            (linearize_z_quadratic(Z_j, G), lambda x: fro2(G @ x), Z_j, Z),
            (linearize_w_quadratic(W_j, G), lambda x: fro2(x @ G.conj().T), W_j, W),
        ]
        for minorant, f, x_j, x in cases:
            scale = max(1.0, f(x_j), f(x))
            worst = max(worst, (minorant.evaluate(x) - f(x)) / scale)
            worst = max(worst, abs(minorant.evaluate(x_j) - f(x_j)) / scale)
    return VerificationRecord("minorants", worst <= MINORANT_TOL, samples, worst, MINORANT_TOL)


def check_tightness(rng: np.random.Generator, samples: int = 100) -> VerificationRecord:
    """Restricted constraints equal the original ones at a consistent expansion point.

    Also checks the block LMI is PSD there and the trace condition is tight.
    """
    worst = 0.0
    for _ in range(samples):
        n_t, k, m = 3, int(rng.integers(1, 4)), 4
        channels = _random_instance(rng, n_t, k, m)
        config = _unit_config(n_t, k, m)
        W = np.stack([outer(_crandn(rng, n_t)) for _ in range(k)])
        psi = _crandn(rng, m) * rng.uniform(0.1, 2.0)
        iterate = IterateState.consistent(channels.G, W, psi)

        var = SubproblemVariables.create(ConicProblem("tightness"), n_t, m, k)
        var.assign(iterate)
        for user in range(k):
            con = build_c1bar(channels, config, iterate, user, var)
            ref = c1_residual(channels, W, psi, config, user)
            worst = max(worst, abs(con.value() - ref) / max(1.0, con.scale()))
        c2 = build_c2bar(channels, config, iterate, var)
        ref = c2_residual(channels, W, psi, config)
        worst = max(worst, abs(c2.value() - ref) / max(1.0, c2.scale()))
        for lmi, c6 in build_c5_c6bar(iterate, channels.G, var):
            scale = max(1.0, float(np.max(np.abs(lmi.expr.value))))
            worst = max(worst, -lmi.min_eigenvalue() / scale, abs(c6.value()) / max(1.0, c6.scale()))
    return VerificationRecord("tightness", worst <= TIGHTNESS_TOL, samples, worst, TIGHTNESS_TOL)


def check_trace_identities(rng: np.random.Generator, samples: int = 1000) -> VerificationRecord:
    """Polarisation identities behind the restricted constraints.

    Checks ½‖C+D‖² − ½‖C‖² − ½‖D‖² = Re Tr(C^H D), the weighted split
    ½‖aΨ^H + X/a‖² − ½a²‖Ψ‖² − ½a⁻²‖X‖² = Tr(Ψ G W G^H Ψ^H H_R) with
    X = G Z H_R and Z = W G^H Ψ^H, and that direct SINRs match their trace forms.
    """
    worst = 0.0
    for _ in range(samples):
        rows, cols = int(rng.integers(1, 6)), int(rng.integers(1, 6))
        C, D = _crandn(rng, rows, cols), _crandn(rng, rows, cols)
        lhs = 0.5 * fro2(C + D) - 0.5 * fro2(C) - 0.5 * fro2(D)
        rhs = float(np.real(np.trace(C.conj().T @ D)))
        worst = max(worst, abs(lhs - rhs) / max(1.0, fro2(C) + fro2(D)))

        n_t, k, m = 3, 2, 4
        channels = _random_instance(rng, n_t, k, m)
        W = outer(_crandn(rng, n_t))
        psi = _crandn(rng, m)
        Psi = np.diag(psi)
        H = outer(channels.h_r[0])
        G = channels.G
        X = G @ W @ G.conj().T @ Psi.conj().T @ H
        a = np.sqrt(max(np.linalg.norm(X), 1e-300) / max(np.linalg.norm(psi), 1e-300))
        split = 0.5 * fro2(a * Psi.conj().T + X / a) - 0.5 * a ** 2 * fro2(psi) - 0.5 / a ** 2 * fro2(X)
        direct = float(np.real(np.trace(Psi @ G @ W @ G.conj().T @ Psi.conj().T @ H)))
        worst = max(worst, abs(split - direct) / max(1.0, abs(direct)))

        config = _unit_config(n_t, k, m)
        sol = Solution(_crandn(rng, k, n_t), _crandn(rng, m))
        sinr = compute_sinrs(channels, sol, config)
        W = np.stack([outer(w) for w in sol.w])
        traced = trace_form_report(channels, W, sol.psi, config).sinr
        worst = max(worst, float(np.max(np.abs(sinr - traced) / np.maximum(1.0, sinr))))
    return VerificationRecord("trace_identity", worst <= IDENTITY_TOL, samples, worst, IDENTITY_TOL)


def check_block_lmi(rng: np.random.Generator, samples: int = 20, n_t: int = 2, m: int = 2) -> VerificationRecord:
    """The block LMI with the exact trace condition pins Z to W G^H Ψ^H.

    For fixed rank-one W and Ψ, every real and imaginary part of every Z
    entry is maximised and minimised over (Z, U, V); each optimum must sit at
    the product W G^H Ψ^H.
    """
    settings = SolverSettings(solver="CLARABEL", tol=LMI_SOLVER_TOL, max_iter=500, verify=False)
    worst = 0.0
    failures = 0
    for idx in range(samples):
        G = _crandn(rng, m, n_t)
        W = outer(_crandn(rng, n_t))
        psi = _crandn(rng, m)
        target = W @ G.conj().T @ np.diag(psi.conj())
        scale = max(1.0, float(np.linalg.norm(target)))

        for i in range(n_t):
            for j in range(m):
                for part in (cp.real, cp.imag):
                    for sense in (1.0, -1.0):
                        problem = ConicProblem(f"lmi_pinning_{idx}")
                        Z = problem.add_block("Z", "complex", (n_t, m))
                        U = problem.add_block("U", "hermitian", (n_t, n_t))
                        V = problem.add_block("V", "hermitian", (m, m))
                        block = cp.bmat(
                            [
                                [U, Z, W @ G.conj().T],
                                [Z.H, V, np.diag(psi)],
                                [G @ W, np.diag(psi.conj()), np.eye(m)],
                            ]
                        )
                        problem.add(MatrixInequality("C5", block))
                        trace_cap = QuadraticConstraint("C6", rhs=fro2(W @ G.conj().T))
                        trace_cap.add_affine(cp.real(cp.trace(U)))
                        problem.add(trace_cap)
                        problem.minimize(sense * part(Z[i, j]))
                        result = solve_problem(problem, settings)
                        if not result.optimal:
                            failures += 1
                            continue
                        worst = max(worst, float(np.abs(result.block("Z") - target).max()) / scale)
    passed = failures == 0 and worst <= LMI_TOL
    return VerificationRecord(
        "lmi_pinning", passed, samples, worst, LMI_TOL, detail=f"{failures} extremal solves without an optimal status"
    )


SUITES: Dict[str, Callable[..., VerificationRecord]] = {
    "embedding": check_embedding_equivalence,
    "minorants": check_minorants,
    "tightness": check_tightness,
    "trace_identity": check_trace_identities,
    "lmi_pinning": check_block_lmi,
}


def run_suites(
    names: Optional[Iterable[str]] = None, seed: int = 0, samples: Optional[int] = None
) -> List[VerificationRecord]:
    """Run the named suites (all when omitted) from one seed.

    Args:
        samples: Override every suite's default sample count

    Raises:
        KeyError: If a suite name is unknown
    """
    selected = list(names) if names else list(SUITES)
    for name in selected:
        if name not in SUITES:
            raise KeyError(name)
    records = []
    order = list(SUITES)
    for name in selected:
        rng = np.random.default_rng([seed, order.index(name)])
        kwargs = {"samples": samples} if samples else {}
        start = time.perf_counter()
        record = SUITES[name](rng, **kwargs)
        record.seconds = time.perf_counter() - start
        logger.info("%s: %s (worst %.3e, tol %.1e)", name, "pass" if record.passed else "FAIL", record.worst, record.tolerance)
        records.append(record)
    return records
