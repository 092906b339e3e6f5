"""Physical-layer metrics of the power-minimisation problem.

SINR (C1), IRS amplification power (C2), BS transmit power, energy
efficiency, and the trace-form evaluations in terms of W_k = w_k w_k^H used to
cross-check the reformulated constraints. ``scale_instance`` builds the
equivalent well-conditioned instance the IA solver works on.
"""

import dataclasses
from dataclasses import dataclass
from typing import Optional

import numpy as np

from activeirs.core.config import PowerModel, SystemConfig
from activeirs.core.errors import ContractViolation
from activeirs.core.linalg import outer
from activeirs.core.types import ChannelSet, FeasibilityReport, Solution


def _check_dims(channels: ChannelSet, sol: Solution) -> None:
    if sol.w.shape != (channels.k, channels.n_t):
        raise ContractViolation(f"beamformers have shape {sol.w.shape}, expected {(channels.k, channels.n_t)}")
    if sol.psi.shape != (channels.m,):
        raise ContractViolation(f"reflection vector has shape {sol.psi.shape}, expected {(channels.m,)}")


def link_gains(channels: ChannelSet, sol: Solution) -> np.ndarray:
    """Matrix of |h̄_k^H w_r|², user k on rows, beam r on columns."""
    hbar = channels.effective(sol.psi)
    return np.abs(hbar.conj() @ sol.w.T) ** 2


def dynamic_noise(channels: ChannelSet, psi: np.ndarray, config: SystemConfig) -> np.ndarray:
    """σ_d²‖h_R,k^H Ψ‖² for every user."""
    return config.sigma_d2 * (np.abs(channels.h_r) ** 2 @ (np.abs(psi) ** 2))


def compute_sinrs(channels: ChannelSet, sol: Solution, config: SystemConfig) -> np.ndarray:
    """SINR of every user (linear)."""
    _check_dims(channels, sol)
    gains = link_gains(channels, sol)
    signal = np.diag(gains)
    interference = gains.sum(axis=1) - signal
    return signal / (interference + dynamic_noise(channels, sol.psi, config) + config.sigma_n2)


def compute_sinr(channels: ChannelSet, sol: Solution, config: SystemConfig, k: int) -> float:
    """SINR of user ``k``: |h̄_k^H w_k|² / (Σ_{r≠k}|h̄_k^H w_r|² + σ_d²‖h_R,k^H Ψ‖² + σ_n²)."""
    if not 0 <= k < channels.k:
        raise ContractViolation(f"user index {k} out of range")
    return float(compute_sinrs(channels, sol, config)[k])


def irs_output_power(channels: ChannelSet, sol: Solution, config: SystemConfig) -> float:
    """Σ_k ‖Ψ G w_k‖² + σ_d²‖Ψ‖_F²."""
    _check_dims(channels, sol)
    reflected = (channels.G @ sol.w.T) * sol.psi[:, None]
    return float(np.sum(np.abs(reflected) ** 2) + config.sigma_d2 * np.sum(np.abs(sol.psi) ** 2))


def bs_transmit_power(sol: Solution) -> float:
    """Σ_k ‖w_k‖²."""
    return float(np.sum(np.abs(sol.w) ** 2))


def check_feasibility(
    channels: ChannelSet, sol: Solution, config: SystemConfig, tol: float = 1e-6
) -> FeasibilityReport:
    """Check C1 (SINR ≥ Γ_req for all users) and C2 (IRS power ≤ P_A).

    Margins are compared against ``-tol·max(1, Γ_req)`` and ``-tol·max(1, P_A)``.
    """
    if tol <= 0:
        raise ContractViolation(f"tolerance must be > 0, got {tol}")
    sinr = compute_sinrs(channels, sol, config)
    c1_margins = sinr - config.gamma_req
    c2_lhs = irs_output_power(channels, sol, config)
    c2_margin = config.p_a - c2_lhs
    feasible = bool(
        np.all(c1_margins >= -tol * max(1.0, config.gamma_req)) and c2_margin >= -tol * max(1.0, config.p_a)
    )
    return FeasibilityReport(sinr, c1_margins, c2_lhs, c2_margin, feasible, tol)


def energy_efficiency(
    channels: ChannelSet,
    sol: Solution,
    config: SystemConfig,
    power_model: PowerModel,
    irs_elements: Optional[int] = None,
) -> float:
    """Sum rate over consumed power, in bits/J/Hz.

    Args:
        irs_elements: Elements charged with P_I (defaults to M; 0 without an IRS)
    """
    rates = np.log2(1.0 + compute_sinrs(channels, sol, config))
    m = channels.m if irs_elements is None else irs_elements
    p_a = config.p_a if power_model.p_a is None else power_model.p_a
    if power_model.passive:
        p_a = 0.0
    consumed = (
        bs_transmit_power(sol) / power_model.eta
        + channels.n_t * power_model.p_t
        + power_model.p_c
        + m * power_model.p_i
        + p_a / power_model.eta
    )
    if consumed <= 0:
        raise ContractViolation("consumed power must be positive")
    return float(np.sum(rates) / consumed)


# trace forms over W_k = w_k w_k^H


def beam_matrices(sol: Solution) -> np.ndarray:
    """Stack of W_k = w_k w_k^H, shape (K, N_T, N_T)."""
    return np.stack([outer(w) for w in sol.w])


def received_power_trace_form(channels: ChannelSet, W: np.ndarray, psi: np.ndarray, k: int, r: int) -> float:
    """|h̄_k^H w_r|² as Tr(H_D,k W_r) + Tr(Ψ G W_r G^H Ψ^H H_R,k) + 2 Re(h_D,k^H W_r G^H Ψ^H h_R,k)."""
    h_d, h_r, G = channels.h_d[k], channels.h_r[k], channels.G
    Psi = np.diag(psi)
    direct = np.real(np.trace(outer(h_d) @ W[r]))
    reflected = np.real(np.trace(Psi @ G @ W[r] @ G.conj().T @ Psi.conj().T @ outer(h_r)))
    cross = 2.0 * np.real(h_d.conj() @ W[r] @ G.conj().T @ Psi.conj().T @ h_r)
    return float(direct + reflected + cross)


def c1_residual(channels: ChannelSet, W: np.ndarray, psi: np.ndarray, config: SystemConfig, k: int) -> float:
    """Γ_req·(interference + noise) − signal for user k in trace form (≤ 0 when C1 holds)."""
    interference = sum(
        received_power_trace_form(channels, W, psi, k, r) for r in range(channels.k) if r != k
    )
    h_r = channels.h_r[k]
    Psi = np.diag(psi)
    noise = config.sigma_d2 * float(np.real(np.trace(Psi.conj().T @ outer(h_r) @ Psi))) + config.sigma_n2
    return config.gamma_req * (interference + noise) - received_power_trace_form(channels, W, psi, k, k)


def c2_residual(channels: ChannelSet, W: np.ndarray, psi: np.ndarray, config: SystemConfig) -> float:
    """Σ_k Tr(Ψ G W_k G^H Ψ^H) + σ_d² Tr(ΨΨ^H) − P_A (≤ 0 when C2 holds)."""
    Psi = np.diag(psi)
    G = channels.G
    total = sum(float(np.real(np.trace(Psi @ G @ Wk @ G.conj().T @ Psi.conj().T))) for Wk in W)
    total += config.sigma_d2 * float(np.real(np.trace(Psi @ Psi.conj().T)))
    return total - config.p_a


@dataclass(frozen=True)
class ScaledInstance:
    """Equivalent instance with unit user noise and a unit-peak BS→IRS channel.

    With p = ``power_scale`` and s = ``gain_scale``: h' = h·√p/σ_n,
    G' = G/s, σ_d'² = σ_d²/(p s²), P_A' = P_A/p. A scaled solution (w', Ψ')
    maps back as w = √p·w', Ψ = Ψ'/s with every SINR unchanged and the IRS
    power and BS power multiplied by p.
    """

    channels: ChannelSet
    config: SystemConfig
    power_scale: float
    gain_scale: float

    def to_physical(self, sol: Solution) -> Solution:
        return Solution(sol.w * np.sqrt(self.power_scale), sol.psi / self.gain_scale)

    def to_scaled(self, sol: Solution) -> Solution:
        return Solution(sol.w / np.sqrt(self.power_scale), sol.psi * self.gain_scale)


def scale_instance(channels: ChannelSet, config: SystemConfig, power_scale: float) -> ScaledInstance:
    """Build the scaled instance for a reference power (typically the no-IRS optimum)."""
    if not power_scale > 0 or not np.isfinite(power_scale):
        raise ContractViolation(f"power scale must be positive and finite, got {power_scale}")
    peak = float(np.max(np.abs(channels.G))) if channels.G.size else 0.0
    gain_scale = peak if peak > 0 else 1.0
    user_scale = np.sqrt(power_scale / config.sigma_n2)
    scaled_channels = ChannelSet(
        G=channels.G / gain_scale,
        h_d=channels.h_d * user_scale,
        h_r=channels.h_r * user_scale,
    )
    scaled_config = dataclasses.replace(
        config,
        sigma_n2=1.0,
        sigma_d2=config.sigma_d2 / (power_scale * gain_scale ** 2),
        p_a=config.p_a / power_scale,
    )
    return ScaledInstance(scaled_channels, scaled_config, float(power_scale), gain_scale)


def trace_form_report(
    channels: ChannelSet, W: np.ndarray, psi: np.ndarray, config: SystemConfig, tol: float = 1e-6
) -> FeasibilityReport:
    """``check_feasibility`` for beam matrices W_k that need not be rank one."""
    received = np.array(
        [[received_power_trace_form(channels, W, psi, k, r) for r in range(channels.k)] for k in range(channels.k)]
    )
    signal = np.diag(received)
    interference = received.sum(axis=1) - signal
    sinr = signal / (interference + dynamic_noise(channels, psi, config) + config.sigma_n2)
    c1_margins = sinr - config.gamma_req
    c2_lhs = c2_residual(channels, W, psi, config) + config.p_a
    c2_margin = config.p_a - c2_lhs
    feasible = bool(
        np.all(c1_margins >= -tol * max(1.0, config.gamma_req)) and c2_margin >= -tol * max(1.0, config.p_a)
    )
    return FeasibilityReport(sinr, c1_margins, c2_lhs, c2_margin, feasible, tol)
