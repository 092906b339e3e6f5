"""Conic problems over named variable blocks, assembled and solved with cvxpy.

A ``ConicProblem`` is a catalog of variable blocks (real, complex, Hermitian
and epigraph scalars), a linear objective and a list of cone constraints.
Hermitian PSD constraints are lowered through the real embedding
[[Re X, -Im X], [Im X, Re X]] into a real PSD slack; squared norms enter
through rotated second-order-cone epigraphs. ``assemble`` turns the catalog
into the standard-form data (c, A, b, cones) of the chosen solver and
``solve`` hands that data to the solver, maps its status and re-verifies
optimal results against the recorded cones.
"""

import hashlib
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, TextIO, Tuple, Union

import cvxpy as cp
import numpy as np
import scipy.sparse as sp
from cvxpy.error import DCPError, SolverError

from activeirs.core.config import SystemConfig
from activeirs.core.errors import AssemblyError, ContractViolation
from activeirs.core.linalg import hermitian_part, min_eigenvalue
from activeirs.interface.conic_solver import ConicSolution, ConicSolver, SolverSettings, SolverStatus

logger = logging.getLogger(__name__)

BLOCK_KINDS = ("real", "complex", "hermitian", "epigraph")
CONE_KINDS = ("zero", "nonneg", "soc", "psd")
VERIFY_FACTOR = 10.0
# residual tolerance for accepting a solver result flagged optimal_inaccurate
INACCURATE_TOL = 1e-6

# Serializes solves of backends that are not reentrant.
_SOLVER_GATE = threading.Lock()

Operand = Union[cp.Expression, float, np.ndarray]


def embed_expression(x: cp.Expression) -> cp.Expression:
    """Real embedding [[Re X, -Im X], [Im X, Re X]] of a square expression."""
    if x.is_real():
        re = x
        im = np.zeros(x.shape)
    else:
        re, im = cp.real(x), cp.imag(x)
    return cp.bmat([[re, -im], [im, re]])


def real_stack(x: Operand) -> cp.Expression:
    """Flatten a (possibly complex) expression into one real vector [Re; Im]."""
    x = cp.Expression.cast_to_const(x) if not isinstance(x, cp.Expression) else x
    size = int(np.prod(x.shape)) if x.shape else 1
    if x.is_real():
        return cp.reshape(x, (size,), order="F")
    return cp.hstack(
        [cp.reshape(cp.real(x), (size,), order="F"), cp.reshape(cp.imag(x), (size,), order="F")]
    )


def _real_size(x: cp.Expression) -> int:
    size = int(np.prod(x.shape)) if x.shape else 1
    return size if x.is_real() else 2 * size


@dataclass
class VariableBlock:
    """One named block of the variable catalog."""

    name: str
    kind: str
    shape: Tuple[int, ...]
    var: cp.Variable
    symbol: str = ""

    @property
    def real_dim(self) -> int:
        """Real degrees of freedom (n² for an n x n Hermitian block)."""
        size = int(np.prod(self.shape)) if self.shape else 1
        return 2 * size if self.kind == "complex" else size


@dataclass
class ConeConstraint:
    """A recorded cone constraint together with its cvxpy lowering."""

    name: str
    cone: str
    size: int
    expr: cp.Expression
    cvx: List[cp.Constraint] = field(default_factory=list)
    t: Optional[cp.Expression] = None
    slack: Optional[cp.Variable] = None

    def residual(self) -> float:
        """Cone violation at the current variable values (0 when satisfied)."""
        value = self.expr.value
        if value is None:
            raise ContractViolation(f"constraint '{self.name}' has unassigned variables")
        if self.cone == "zero":
            return float(np.max(np.abs(value))) if np.size(value) else 0.0
        if self.cone == "nonneg":
            return max(0.0, -float(np.min(value))) if np.size(value) else 0.0
        if self.cone == "soc":
            t = float(self.t.value)
            return max(0.0, float(np.linalg.norm(np.ravel(value))) - t)
        # psd: solver cone variable plus the linking equalities
        matrix = hermitian_part(value)
        if self.slack is not None and self.slack.value is not None:
            slack = np.asarray(self.slack.value)
            link = float(np.max(np.abs(slack - embed_value(matrix))))
            sym = 0.5 * (slack + slack.T)
            lam = float(np.linalg.eigvalsh(sym)[0])
            return max(0.0, -lam, link)
        return max(0.0, -min_eigenvalue(matrix))


def embed_value(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    return np.block([[x.real, -x.imag], [x.imag, x.real]])


class QuadraticConstraint:
    """Convex constraint ``affine + Σ w_i ‖x_i‖² ≤ rhs`` with w_i > 0.

    The affine part must be a real scalar expression; each ``x_i`` is an
    affine (possibly complex) expression. The constraint can be evaluated at
    any assignment of its variables and attached to a ``ConicProblem``, where
    every squared norm becomes an epigraph scalar.
    """

    def __init__(self, name: str, rhs: float = 0.0, symbol: str = ""):
        self.name = name
        self.rhs = float(rhs)
        self.symbol = symbol or name
        self.affine_terms: List[cp.Expression] = []
        self.constant = 0.0
        self.squares: List[Tuple[float, cp.Expression]] = []

    def add_affine(self, expr: Operand) -> "QuadraticConstraint":
        if not isinstance(expr, cp.Expression):
            value = complex(np.asarray(expr).item())
            self.constant += value.real
            return self
        if expr.shape not in ((), (1,)):
            raise AssemblyError(self.name, f"affine term must be scalar, got shape {expr.shape}")
        if not expr.is_affine():
            raise AssemblyError(self.name, "affine term is not affine")
        if not expr.is_real():
            raise AssemblyError(self.name, "affine term must be real (take the real part)")
        self.affine_terms.append(cp.sum(expr) if expr.shape else expr)
        return self

    def add_constant(self, value: float) -> "QuadraticConstraint":
        self.constant += float(value)
        return self

    def add_square(self, weight: float, x: Operand) -> "QuadraticConstraint":
        if weight < 0:
            raise AssemblyError(self.name, f"squared-norm weight must be >= 0, got {weight}")
        if weight == 0:
            return self
        if not isinstance(x, cp.Expression):
            self.constant += float(weight) * float(np.sum(np.abs(np.asarray(x)) ** 2))
            return self
        if not x.is_affine():
            raise AssemblyError(self.name, "squared-norm argument is not affine")
        self.squares.append((float(weight), x))
        return self

    def value(self) -> float:
        """``lhs - rhs`` at the current variable values (<= 0 when satisfied)."""
        total = self.constant - self.rhs
        for term in self.affine_terms:
            if term.value is None:
                raise ContractViolation(f"constraint '{self.name}' has unassigned variables")
            total += float(np.real(term.value))
        for weight, x in self.squares:
            if x.value is None:
                raise ContractViolation(f"constraint '{self.name}' has unassigned variables")
            total += weight * float(np.sum(np.abs(np.asarray(x.value)) ** 2))
        return total

    def scale(self) -> float:
        """Magnitude of the largest term at the current values."""
        parts = [abs(self.constant), abs(self.rhs)]
        parts.extend(abs(float(np.real(term.value))) for term in self.affine_terms)
        parts.extend(w * float(np.sum(np.abs(np.asarray(x.value)) ** 2)) for w, x in self.squares)
        return max(parts) if parts else 0.0

    def attach(self, problem: "ConicProblem") -> None:
        lhs: Any = self.constant
        for term in self.affine_terms:
            lhs = lhs + term
        for idx, (weight, x) in enumerate(self.squares):
            t = problem.add_square_epigraph(f"{self.name}.sq{idx}", x)
            lhs = lhs + weight * t
        problem.add_nonneg(self.name, self.rhs - lhs)


class MatrixInequality:
    """Hermitian linear matrix inequality ``X ⪰ 0``."""

    def __init__(self, name: str, expr: cp.Expression, symbol: str = ""):
        if len(expr.shape) != 2 or expr.shape[0] != expr.shape[1]:
            raise AssemblyError(name, f"matrix inequality needs a square expression, got {expr.shape}")
        if not expr.is_affine():
            raise AssemblyError(name, "matrix inequality is not affine")
        self.name = name
        self.expr = expr
        self.symbol = symbol or name

    @property
    def size(self) -> int:
        return int(self.expr.shape[0])

    def min_eigenvalue(self) -> float:
        if self.expr.value is None:
            raise ContractViolation(f"constraint '{self.name}' has unassigned variables")
        return min_eigenvalue(hermitian_part(np.asarray(self.expr.value)))

    def attach(self, problem: "ConicProblem") -> None:
        problem.add_psd(self.name, self.expr)


class ConicProblem:
    """Solver-agnostic convex conic problem over named variable blocks."""

    def __init__(self, name: str = "problem"):
        self.name = name
        self.blocks: Dict[str, VariableBlock] = {}
        self.constraints: List[ConeConstraint] = []
        self.objective: Optional[cp.Expression] = None
        self.metadata: Dict[str, str] = {}
        self._slack_ids: set = set()

    # catalog

    def add_block(self, name: str, kind: str, shape: Sequence[int] = (), symbol: str = "") -> cp.Variable:
        """Create a variable block.

        Args:
            name: Unique block name
            kind: One of ``real``, ``complex``, ``hermitian``, ``epigraph``
            shape: Block shape (``(n, n)`` for Hermitian blocks)
            symbol: Human-readable symbol recorded in the metadata
        """
        if name in self.blocks:
            raise AssemblyError(name, "duplicate variable block")
        if kind not in BLOCK_KINDS:
            raise AssemblyError(name, f"unknown block kind '{kind}'")
        shape = tuple(int(s) for s in shape)
        if any(s < 1 for s in shape):
            raise AssemblyError(name, f"invalid block shape {shape}")
        if kind == "hermitian":
            if len(shape) != 2 or shape[0] != shape[1]:
                raise AssemblyError(name, f"Hermitian block must be square, got {shape}")
            var = cp.Variable(shape, hermitian=True, name=name)
        elif kind == "complex":
            var = cp.Variable(shape, complex=True, name=name)
        else:
            var = cp.Variable(shape, name=name)
        self.blocks[name] = VariableBlock(name, kind, shape, var, symbol)
        if symbol:
            self.metadata[name] = symbol
        return var

    def variable(self, name: str) -> cp.Variable:
        return self.blocks[name].var

    def variable_count(self, include_epigraph: bool = False) -> int:
        """Real degrees of freedom of the catalog."""
        return sum(
            b.real_dim for b in self.blocks.values() if include_epigraph or b.kind != "epigraph"
        )

    # objective and constraints

    def minimize(self, expr: cp.Expression) -> None:
        if expr.shape not in ((), (1,)) or not expr.is_affine() or not expr.is_real():
            raise AssemblyError("objective", "objective must be a real affine scalar")
        self.objective = expr

    def add_zero(self, name: str, expr: cp.Expression) -> None:
        """``expr == 0`` (real and imaginary parts for complex expressions)."""
        flat = real_stack(expr)
        self.constraints.append(ConeConstraint(name, "zero", _real_size(expr), flat, [flat == 0]))

    def add_nonneg(self, name: str, expr: Operand) -> None:
        """``expr >= 0`` for a real expression."""
        expr = cp.Expression.cast_to_const(expr) if not isinstance(expr, cp.Expression) else expr
        if not expr.is_real():
            raise AssemblyError(name, "nonnegative-cone expression must be real")
        size = int(np.prod(expr.shape)) if expr.shape else 1
        self.constraints.append(ConeConstraint(name, "nonneg", size, expr, [expr >= 0]))

    def add_soc(self, name: str, t: cp.Expression, x: cp.Expression) -> None:
        """``‖x‖₂ <= t`` with x a real vector expression."""
        if t.shape not in ((), (1,)):
            raise AssemblyError(name, f"cone height must be scalar, got shape {t.shape}")
        if len(x.shape) != 1:
            raise AssemblyError(name, f"cone body must be a vector, got shape {x.shape}")
        record = ConeConstraint(name, "soc", int(x.shape[0]) + 1, x, [cp.SOC(t, x)], t=t)
        self.constraints.append(record)

    def add_square_epigraph(self, name: str, x: cp.Expression) -> cp.Variable:
        """Return a new epigraph scalar ``t`` with ``‖x‖² <= t``.

        Lowered as ‖(2x, t - 1)‖ <= t + 1.
        """
        t = self.add_block(name, "epigraph", ())
        body = cp.hstack([2 * real_stack(x), cp.reshape(t - 1, (1,), order="F")])
        self.add_soc(name, t + 1, body)
        return t

    def add_psd(self, name: str, expr: cp.Expression) -> None:
        """Hermitian ``expr ⪰ 0`` lowered to a real PSD slack of twice the size."""
        if len(expr.shape) != 2 or expr.shape[0] != expr.shape[1]:
            raise AssemblyError(name, f"PSD constraint needs a square expression, got {expr.shape}")
        n = int(expr.shape[0])
        emb = embed_expression(expr)
        slack = cp.Variable((2 * n, 2 * n), PSD=True, name=f"{name}.slack")
        self._slack_ids.add(slack.id)
        cons = [cp.diag(slack) == cp.diag(emb), cp.upper_tri(slack) == cp.upper_tri(emb)]
        self.constraints.append(ConeConstraint(name, "psd", 2 * n, expr, cons, slack=slack))

    def add(self, constraint: Union[QuadraticConstraint, MatrixInequality]) -> None:
        constraint.attach(self)
        self.metadata.setdefault(constraint.name, constraint.symbol)

    # inventory and checks

    def cone_inventory(self) -> Dict[str, Any]:
        """Cone counts of the catalog: rows of zero/nonneg cones, SOC and PSD sizes."""
        inventory: Dict[str, Any] = {"zero": 0, "nonneg": 0, "soc": [], "psd": []}
        for con in self.constraints:
            if con.cone in ("zero", "nonneg"):
                inventory[con.cone] += con.size
            else:
                inventory[con.cone].append(con.size)
        return inventory

    def constraint(self, name: str) -> ConeConstraint:
        for con in self.constraints:
            if con.name == name:
                return con
        raise KeyError(name)

    def check_references(self) -> None:
        """Raise ``AssemblyError`` for variables missing from the catalog."""
        known = {b.var.id for b in self.blocks.values()} | self._slack_ids
        if self.objective is not None:
            for var in self.objective.variables():
                if var.id not in known:
                    raise AssemblyError("objective", f"variable '{var.name()}' is not in the catalog")
        for con in self.constraints:
            for cvx_con in con.cvx:
                for var in cvx_con.variables():
                    if var.id not in known:
                        raise AssemblyError(con.name, f"variable '{var.name()}' is not in the catalog")

    def block_values(self) -> Dict[str, np.ndarray]:
        values: Dict[str, np.ndarray] = {}
        for name, block in self.blocks.items():
            value = block.var.value
            if value is None:
                continue
            value = np.asarray(value)
            if block.kind == "hermitian":
                value = hermitian_part(value)
            values[name] = value
        return values

    def max_residual(self) -> Tuple[float, str]:
        """Largest cone violation over all constraints and its constraint name."""
        worst, worst_name = 0.0, ""
        for con in self.constraints:
            res = con.residual()
            if res > worst:
                worst, worst_name = res, con.name
        return worst, worst_name

    def value_scale(self) -> float:
        """Largest magnitude among the current variable values (at least 1)."""
        scale = 1.0
        for block in self.blocks.values():
            if block.var.value is not None and np.size(block.var.value):
                scale = max(scale, float(np.max(np.abs(block.var.value))))
        return scale

    def to_cvxpy(self) -> cp.Problem:
        if self.objective is None:
            raise AssemblyError("objective", "no objective set")
        constraints = [c for con in self.constraints for c in con.cvx]
        return cp.Problem(cp.Minimize(self.objective), constraints)


def _cone_dims(dims: Any) -> Dict[str, Any]:
    return {
        "zero": int(getattr(dims, "zero", getattr(dims, "eq", 0))),
        "nonneg": int(getattr(dims, "nonneg", getattr(dims, "leq", 0))),
        "soc": [int(s) for s in getattr(dims, "soc", [])],
        "psd": [int(s) for s in getattr(dims, "psd", [])],
        "exp": int(getattr(dims, "exp", 0)),
    }


@dataclass
class AssembledProblem:
    """Standard-form data ``min c'x s.t. b - Ax ∈ K`` of one ``ConicProblem``."""

    problem: ConicProblem
    cvx: cp.Problem
    data: Dict[str, Any]
    chain: Any
    inverse_data: Any
    solver: str

    @property
    def c(self) -> np.ndarray:
        return np.asarray(self.data["c"], dtype=float)

    @property
    def A(self) -> sp.csc_matrix:
        return sp.csc_matrix(self.data["A"])

    @property
    def b(self) -> np.ndarray:
        return np.asarray(self.data["b"], dtype=float)

    @property
    def dims(self) -> Dict[str, Any]:
        return _cone_dims(self.data["dims"])

    def digest(self) -> str:
        """sha256 over the numeric standard-form data."""
        sha = hashlib.sha256()
        a = self.A
        a.sort_indices()
        for arr in (self.c, a.indptr, a.indices, a.data, self.b):
            sha.update(np.ascontiguousarray(arr).tobytes())
        sha.update(repr(sorted(self.dims.items())).encode("utf-8"))
        return sha.hexdigest()

    def dump(self, stream: TextIO) -> None:
        """Write the data in the plain-text conic interchange format.

        Layout: a comment header, ``dims`` lines, then ``c``, ``A`` (row, col,
        value triplets, 0-based) and ``b`` sections each led by its count.
        """
        a = self.A.tocoo()
        dims = self.dims
        c = self.c
        b = self.b
        stream.write("# activeirs conic interchange v1\n")
        stream.write("# minimize c'x subject to b - A x in K\n")
        stream.write(f"name {self.problem.name}\n")
        stream.write(f"solver {self.solver}\n")
        stream.write(f"vars {a.shape[1]}\n")
        stream.write(f"rows {a.shape[0]}\n")
        stream.write(f"dims zero {dims['zero']}\n")
        stream.write(f"dims nonneg {dims['nonneg']}\n")
        stream.write("dims soc " + " ".join(str(s) for s in dims["soc"]) + "\n")
        stream.write("dims psd " + " ".join(str(s) for s in dims["psd"]) + "\n")
        nz = np.flatnonzero(c)
        stream.write(f"c {nz.size}\n")
        for idx in nz:
            stream.write(f"{idx} {c[idx]:.17g}\n")
        order = np.lexsort((a.col, a.row))
        stream.write(f"A {a.nnz}\n")
        for idx in order:
            stream.write(f"{a.row[idx]} {a.col[idx]} {a.data[idx]:.17g}\n")
        stream.write(f"b {b.size}\n")
        for value in b:
            stream.write(f"{value:.17g}\n")


def assemble(problem: ConicProblem, solver: str = "CLARABEL") -> AssembledProblem:
    """Lower a ``ConicProblem`` to the standard-form data of ``solver``.

    Raises:
        AssemblyError: For dangling variables or data the solver chain rejects
    """
    problem.check_references()
    cvx_problem = problem.to_cvxpy()
    try:
        data, chain, inverse_data = cvx_problem.get_problem_data(solver)
    except (SolverError, DCPError, ValueError) as exc:
        raise AssemblyError(problem.name, str(exc)) from exc
    logger.debug(
        "assembled %s: %d variables, cones %s", problem.name, problem.variable_count(), problem.cone_inventory()
    )
    return AssembledProblem(problem, cvx_problem, data, chain, inverse_data, solver.upper())


_STATUS_MAP = {
    cp.OPTIMAL: SolverStatus.OPTIMAL,
    cp.INFEASIBLE: SolverStatus.INFEASIBLE,
    cp.INFEASIBLE_INACCURATE: SolverStatus.INFEASIBLE,
    cp.UNBOUNDED: SolverStatus.UNBOUNDED,
    cp.UNBOUNDED_INACCURATE: SolverStatus.UNBOUNDED,
}


class CvxpyConicSolver(ConicSolver):
    """Adapter running an assembled problem through its cvxpy solving chain."""

    REENTRANT_SOLVERS = frozenset({"CLARABEL", "SCS", "ECOS"})

    def __init__(self, solver: str = "CLARABEL"):
        self.name = solver.upper()
        self.reentrant = self.name in self.REENTRANT_SOLVERS

    def solver_options(self, settings: SolverSettings) -> Dict[str, Any]:
        if self.name == "CLARABEL":
            return {
                "tol_feas": settings.tol,
                "tol_gap_abs": settings.tol,
                "tol_gap_rel": settings.tol,
                "max_iter": settings.max_iter,
            }
        if self.name == "SCS":
            return {"eps_abs": settings.tol, "eps_rel": settings.tol, "max_iters": settings.max_iter}
        return {}

    def _run(self, assembled: AssembledProblem, opts: Dict[str, Any]) -> Any:
        return assembled.chain.solve_via_data(
            assembled.cvx, assembled.data, warm_start=False, verbose=False, solver_opts=opts
        )

    def solve(self, assembled: AssembledProblem, settings: SolverSettings) -> ConicSolution:
        opts = self.solver_options(settings)
        start = time.perf_counter()
        try:
            if self.reentrant:
                raw = self._run(assembled, opts)
            else:
                with _SOLVER_GATE:
                    raw = self._run(assembled, opts)
            assembled.cvx.unpack_results(raw, assembled.chain, assembled.inverse_data)
        except SolverError as exc:
            elapsed = time.perf_counter() - start
            logger.warning("%s: solver %s failed: %s", assembled.problem.name, self.name, exc)
            return ConicSolution(
                status=SolverStatus.NUMERICAL_LIMIT, solve_seconds=elapsed, diagnostics=f"solver error: {exc}"
            )
        elapsed = time.perf_counter() - start

        raw_status = assembled.cvx.status
        inaccurate = raw_status == cp.OPTIMAL_INACCURATE
        status = SolverStatus.OPTIMAL if inaccurate else _STATUS_MAP.get(raw_status, SolverStatus.NUMERICAL_LIMIT)
        stats = getattr(assembled.cvx, "solver_stats", None)
        iterations = int(getattr(stats, "num_iters", 0) or 0) if stats is not None else 0

        solution = ConicSolution(
            status=status,
            objective=float(assembled.cvx.value) if assembled.cvx.value is not None else float("nan"),
            iterations=iterations,
            solve_seconds=elapsed,
            diagnostics=f"{self.name}: {raw_status}",
        )
        if status is not SolverStatus.OPTIMAL:
            if raw_status not in _STATUS_MAP:
                logger.info("%s: solver status '%s' mapped to numerical_limit", assembled.problem.name, raw_status)
            return solution

        solution.values = assembled.problem.block_values()
        solution.duals = {
            con.name: con.cvx[0].dual_value for con in assembled.problem.constraints if con.cone == "nonneg"
        }
        if settings.verify or inaccurate:
            # inaccurate results are always checked against the assembled constraints
            tol = max(settings.tol, INACCURATE_TOL) if inaccurate else settings.tol
            residual, worst = assembled.problem.max_residual()
            gate = VERIFY_FACTOR * tol * assembled.problem.value_scale()
            solution.max_residual = residual
            if residual > gate:
                solution.status = SolverStatus.NUMERICAL_LIMIT
                solution.diagnostics = (
                    f"{self.name}: {raw_status} rejected, residual {residual:.3e} on '{worst}' exceeds {gate:.3e}"
                )
                logger.warning("%s: %s", assembled.problem.name, solution.diagnostics)
            elif inaccurate:
                solution.diagnostics = f"{self.name}: {raw_status} accepted, residual {residual:.3e}"
                logger.info("%s: %s", assembled.problem.name, solution.diagnostics)
        return solution


def solve(assembled: AssembledProblem, settings: Optional[SolverSettings] = None) -> ConicSolution:
    """Solve assembled data with the solver it was assembled for."""
    settings = settings or SolverSettings(solver=assembled.solver)
    return CvxpyConicSolver(assembled.solver).solve(assembled, settings)


def solve_problem(problem: ConicProblem, settings: Optional[SolverSettings] = None) -> ConicSolution:
    """Assemble and solve in one step."""
    settings = settings or SolverSettings()
    return solve(assemble(problem, settings.solver), settings)


def settings_for(config: SystemConfig) -> SolverSettings:
    """Solver settings carried by a scenario configuration."""
    return SolverSettings(solver=config.solver.upper(), tol=config.solver_tol, max_iter=config.solver_max_iter)
