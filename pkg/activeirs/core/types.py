"""Domain value types: geometry, channel realisations and solutions."""

import hashlib
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from activeirs.core.errors import ContractViolation


@dataclass(frozen=True)
class Geometry:
    """Node positions of one drop (metres, 2-D)."""

    bs_position: np.ndarray
    irs_position: np.ndarray
    user_positions: np.ndarray  # shape (K, 2)

    def user_distances(self) -> np.ndarray:
        """Distances BS -> user k."""
        return np.linalg.norm(self.user_positions - self.bs_position, axis=1)

    def irs_user_distances(self) -> np.ndarray:
        """Distances IRS -> user k."""
        return np.linalg.norm(self.user_positions - self.irs_position, axis=1)

    def bs_irs_distance(self) -> float:
        return float(np.linalg.norm(self.irs_position - self.bs_position))


@dataclass(frozen=True)
class ChannelSet:
    """One channel realisation.

    Attributes:
        G: BS -> IRS channel, shape (M, N_T)
        h_d: direct channels, shape (K, N_T); row k is h_D,k
        h_r: reflected channels, shape (K, M); row k is h_R,k
    """

    G: np.ndarray
    h_d: np.ndarray
    h_r: np.ndarray

    def __post_init__(self) -> None:
        m, n_t = self.G.shape
        if self.h_d.ndim != 2 or self.h_d.shape[1] != n_t:
            raise ContractViolation(f"h_d shape {self.h_d.shape} does not match N_T={n_t}")
        if self.h_r.shape != (self.h_d.shape[0], m):
            raise ContractViolation(f"h_r shape {self.h_r.shape} does not match (K, M)=({self.h_d.shape[0]}, {m})")
        for name in ("G", "h_d", "h_r"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ContractViolation(f"channel '{name}' has non-finite entries")

    @property
    def n_t(self) -> int:
        return int(self.G.shape[1])

    @property
    def m(self) -> int:
        return int(self.G.shape[0])

    @property
    def k(self) -> int:
        return int(self.h_d.shape[0])

    def effective(self, psi: np.ndarray) -> np.ndarray:
        """Effective channels h̄_k = h_D,k + G^H Ψ^H h_R,k as rows, so that
        h̄_k^H = h_D,k^H + h_R,k^H Ψ G."""
        psi = np.asarray(psi, dtype=complex)
        # h_R^H Ψ G as a row: (conj(h_R) * psi) @ G
        rows = (self.h_r.conj() * psi) @ self.G
        return self.h_d + rows.conj()

    def digest(self) -> str:
        """Stable short hash of the realisation (paired-draw bookkeeping)."""
        sha = hashlib.sha256()
        for arr in (self.G, self.h_d, self.h_r):
            sha.update(np.ascontiguousarray(arr, dtype=np.complex128).tobytes())
        return sha.hexdigest()[:16]


@dataclass(frozen=True)
class Solution:
    """Physical decision variables.

    Attributes:
        w: beamformers, shape (K, N_T); row k is w_k (units √W)
        psi: diagonal of Ψ = AΘ, shape (M,)
    """

    w: np.ndarray
    psi: np.ndarray

    @property
    def Psi(self) -> np.ndarray:
        return np.diag(self.psi)

    def amplitudes(self) -> np.ndarray:
        """a_m = |Ψ_mm|."""
        return np.abs(self.psi)

    def phases(self) -> np.ndarray:
        """ψ_m = arg(Ψ_mm)."""
        return np.angle(self.psi)

    @classmethod
    def zeros(cls, k: int, n_t: int, m: int) -> "Solution":
        return cls(np.zeros((k, n_t), dtype=complex), np.zeros(m, dtype=complex))


@dataclass
class FeasibilityReport:
    """Check of the SINR (C1) and IRS power (C2) constraints for one solution."""

    sinr: np.ndarray
    c1_margins: np.ndarray
    c2_lhs: float
    c2_margin: float
    feasible: bool
    tol: float = 0.0

    def max_violation(self, gamma_req: float, p_a: float) -> float:
        """Largest violation normalised by each constraint's scale (0 if none)."""
        worst = 0.0
        if self.c1_margins.size:
            worst = max(worst, float(np.max(-self.c1_margins)) / max(1.0, gamma_req))
        worst = max(worst, -self.c2_margin / max(1.0, p_a))
        return max(worst, 0.0)

    def to_json(self) -> Dict[str, Any]:
        return {
            "sinr": [float(s) for s in self.sinr],
            "c1_margins": [float(m) for m in self.c1_margins],
            "c2_lhs_w": float(self.c2_lhs),
            "c2_margin_w": float(self.c2_margin),
            "feasible": bool(self.feasible),
        }
