"""Scenario geometry and Rician channel realisations.

The BS sits at the origin and serves one 120° sector bisected by the x-axis.
The IRS is on the sector edge at (R, 0); users are dropped area-uniformly in
the sector. Each channel mixes a ULA line-of-sight component with i.i.d.
circular Gaussian scattering at Rician factor κ and is scaled by the
distance-dependent path loss.
"""

import logging
from typing import Tuple

import numpy as np
from scipy import constants

from activeirs.core.config import SystemConfig
from activeirs.core.errors import ContractViolation
from activeirs.core.types import ChannelSet, Geometry

logger = logging.getLogger(__name__)

SECTOR_HALF_ANGLE = np.pi / 3
MIN_DISTANCE = 1.0


def reference_gain(f_c: float) -> float:
    """Free-space gain at 1 m, β0 = (c / (4π f_c))²."""
    return (constants.c / (4.0 * np.pi * f_c)) ** 2


def path_loss(d: float, alpha: float, f_c: float) -> float:
    """Linear power gain β0·d^-α; distances below 1 m are clamped to 1 m."""
    if not np.isfinite(d) or d < 0:
        raise ContractViolation(f"distance must be finite and non-negative, got {d}")
    if d < MIN_DISTANCE:
        logger.debug("distance %.3f m below %.0f m, clamped", d, MIN_DISTANCE)
        d = MIN_DISTANCE
    return reference_gain(f_c) * float(d) ** (-alpha)


def steering_vector(n: int, angle: float) -> np.ndarray:
    """Half-wavelength ULA response, entries exp(jπ·i·sin θ) for i = 0..n-1."""
    return np.exp(1j * np.pi * np.arange(n) * np.sin(angle))


def place_nodes(config: SystemConfig, rng: np.random.Generator) -> Geometry:
    """Drop K users area-uniformly in the sector of radius R."""
    radius = config.radius * np.sqrt(rng.uniform(0.0, 1.0, size=config.k))
    theta = rng.uniform(-SECTOR_HALF_ANGLE, SECTOR_HALF_ANGLE, size=config.k)
    users = np.column_stack([radius * np.cos(theta), radius * np.sin(theta)])
    return Geometry(
        bs_position=np.zeros(2),
        irs_position=np.array([config.radius, 0.0]),
        user_positions=users,
    )


def _angle(src: np.ndarray, dst: np.ndarray) -> float:
    delta = np.asarray(dst, dtype=float) - np.asarray(src, dtype=float)
    return float(np.arctan2(delta[1], delta[0]))


def _scattering(rng: np.random.Generator, shape: Tuple[int, ...]) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def _mix(los: np.ndarray, nlos: np.ndarray, kappa: float) -> np.ndarray:
    if np.isinf(kappa):
        return los.astype(complex)
    return np.sqrt(kappa / (1.0 + kappa)) * los + np.sqrt(1.0 / (1.0 + kappa)) * nlos


def generate_channels(config: SystemConfig, geometry: Geometry, rng: np.random.Generator) -> ChannelSet:
    """Draw one Rician realisation for the given geometry.

    α_d applies to the direct links h_D,k and α_r to G and h_R,k. The
    scattering parts are always drawn (G, then h_D, then h_R) so the random
    stream does not depend on κ.
    """
    kappa = config.rician_factor
    n_t, m, k = config.n_t, config.m, config.k
    bs, irs = geometry.bs_position, geometry.irs_position

    nlos_g = _scattering(rng, (m, n_t))
    nlos_d = _scattering(rng, (k, n_t))
    nlos_r = _scattering(rng, (k, m))

    depart = _angle(bs, irs)
    arrive = _angle(irs, bs)
    los_g = np.outer(steering_vector(m, arrive), steering_vector(n_t, depart).conj())
    G = np.sqrt(path_loss(geometry.bs_irs_distance(), config.alpha_r, config.f_c)) * _mix(los_g, nlos_g, kappa)

    h_d = np.empty((k, n_t), dtype=complex)
    h_r = np.empty((k, m), dtype=complex)
    d_direct = geometry.user_distances()
    d_reflect = geometry.irs_user_distances()
    for user in range(k):
        pos = geometry.user_positions[user]
        los_d = steering_vector(n_t, _angle(bs, pos))
        los_r = steering_vector(m, _angle(irs, pos))
        h_d[user] = np.sqrt(path_loss(d_direct[user], config.alpha_d, config.f_c)) * _mix(los_d, nlos_d[user], kappa)
        h_r[user] = np.sqrt(path_loss(d_reflect[user], config.alpha_r, config.f_c)) * _mix(los_r, nlos_r[user], kappa)

    return ChannelSet(G=G, h_d=h_d, h_r=h_r)


def draw_drop(config: SystemConfig, rng: np.random.Generator) -> Tuple[Geometry, ChannelSet]:
    """Geometry plus channels of one Monte Carlo drop."""
    geometry = place_nodes(config, rng)
    return geometry, generate_channels(config, geometry, rng)
