"""Complex linear algebra helpers shared by every module.

All eigenvalue work goes through the real symmetric embedding of a Hermitian
matrix, so only ``scipy.linalg.eigh`` on real input is ever needed.
"""

from typing import Tuple

import numpy as np
from scipy import linalg

from activeirs.core.errors import ContractViolation

HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-9


def _as_square(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=complex)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        raise ContractViolation(f"expected a square matrix, got shape {x.shape}")
    return x


def hermitian_part(x: np.ndarray) -> np.ndarray:
    """Return (X + X^H)/2."""
    x = np.asarray(x, dtype=complex)
    return 0.5 * (x + x.conj().T)


def is_hermitian(x: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    """Check entry-wise conjugate symmetry within an absolute tolerance."""
    x = np.asarray(x)
    if x.ndim != 2 or x.shape[0] != x.shape[1]:
        return False
    if x.size == 0:
        return True
    return float(np.max(np.abs(x - x.conj().T))) <= tol


def hermitian_real_embedding(x: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Embed a Hermitian n x n matrix as the real symmetric 2n x 2n matrix
    [[Re X, -Im X], [Im X, Re X]].

    Every eigenvalue of X appears twice in the embedding, so the embedding is
    PSD exactly when X is.

    Args:
        x: Hermitian matrix
        tol: Absolute tolerance on max |X - X^H|

    Returns:
        np.ndarray: Real symmetric matrix of size 2n

    Raises:
        ContractViolation: If the input is not square or not Hermitian
    """
    x = _as_square(x)
    if not is_hermitian(x, tol):
        raise ContractViolation(
            f"matrix is not Hermitian (max deviation {np.max(np.abs(x - x.conj().T)):.3e})"
        )
    x = hermitian_part(x)
    re, im = x.real, x.imag
    return np.block([[re, -im], [im, re]])


def embedded_eigh(x: np.ndarray, tol: float = HERMITIAN_TOL) -> Tuple[np.ndarray, np.ndarray]:
    """Eigen-decompose a Hermitian matrix through its real embedding.

    Returns:
        Tuple[np.ndarray, np.ndarray]: ``(eigenvalues, eigenvectors)`` of X in
        descending order; eigenvectors are complex columns of unit norm.
    """
    emb = hermitian_real_embedding(x, tol)
    n = emb.shape[0] // 2
    values, vectors = linalg.eigh(emb)
    order = np.argsort(values)[::-1]
    values, vectors = values[order], vectors[:, order]
    # each eigenvalue appears twice; one vector of each pair suffices
    picked_values = values[0::2]
    picked_vectors = vectors[:n, 0::2] + 1j * vectors[n:, 0::2]
    return picked_values, picked_vectors


def eigvalsh_hermitian(x: np.ndarray, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Eigenvalues of a Hermitian matrix in descending order."""
    emb = hermitian_real_embedding(x, tol)
    values = linalg.eigvalsh(emb)[::-1]
    return values[0::2]


def min_eigenvalue(x: np.ndarray, tol: float = HERMITIAN_TOL) -> float:
    """Smallest eigenvalue of a Hermitian matrix."""
    return float(eigvalsh_hermitian(x, tol)[-1])


def is_psd(x: np.ndarray, tol: float = PSD_TOL) -> bool:
    """PSD check relative to the spectral scale: λ_min ≥ -tol·max(1, |λ|_max)."""
    values = eigvalsh_hermitian(x)
    scale = max(1.0, float(np.max(np.abs(values)))) if values.size else 1.0
    return bool(values.size == 0 or values[-1] >= -tol * scale)


def rank_one_ratio(x: np.ndarray, tol: float = PSD_TOL) -> float:
    """Return λ2/λ1 for a Hermitian PSD matrix (0 when λ1 = 0 or n = 1).

    Raises:
        ContractViolation: If the matrix is indefinite beyond tolerance
    """
    values = eigvalsh_hermitian(x)
    if not is_psd(x, tol):
        raise ContractViolation(f"matrix is indefinite (λ_min = {values[-1]:.3e})")
    if values.size < 2 or values[0] <= 0.0:
        return 0.0
    return float(max(values[1], 0.0) / values[0])


def frobenius_inner(a: np.ndarray, b: np.ndarray) -> complex:
    """Tr(A^H B)."""
    return complex(np.sum(np.conj(a) * b))


def fro2(a: np.ndarray) -> float:
    """Squared Frobenius norm."""
    return float(np.sum(np.abs(a) ** 2))


def outer(v: np.ndarray) -> np.ndarray:
    """v v^H for a complex vector."""
    v = np.asarray(v, dtype=complex).reshape(-1)
    return np.outer(v, v.conj())


def principal_component(x: np.ndarray) -> Tuple[np.ndarray, float]:
    """Best rank-one factor of a Hermitian PSD matrix.

    Returns:
        Tuple[np.ndarray, float]: ``(v, ratio)`` with v = √λ1·u1 and
        ratio = λ2/λ1
    """
    x = hermitian_part(_as_square(x))
    values, vectors = embedded_eigh(x)
    lam1 = max(float(values[0]), 0.0)
    ratio = 0.0
    if values.size > 1 and lam1 > 0.0:
        ratio = max(float(values[1]), 0.0) / lam1
    return np.sqrt(lam1) * vectors[:, 0], ratio


def db_to_linear(db: float) -> float:
    return float(10.0 ** (np.asarray(db) / 10.0))


def linear_to_db(value: float) -> float:
    return float(10.0 * np.log10(value))


def dbm_to_watts(dbm: float) -> float:
    return db_to_linear(dbm) * 1e-3


def watts_to_dbm(watts: float) -> float:
    return linear_to_db(watts * 1e3)
