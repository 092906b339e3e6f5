"""Tests for the comparison schemes."""

import unittest

import numpy as np

from activeirs.core.config import SystemConfig
from activeirs.core.types import ChannelSet, Solution
from activeirs.interface.conic_solver import SolverStatus
from activeirs.services.baselines import (
    NoIrsScheme,
    ZfRandomScheme,
    baseline_no_irs,
    baseline_zf_random,
    random_reflection,
    zero_forcing_directions,
)
from activeirs.services.beamforming import lift_to_targets
from activeirs.services.channel_model import draw_drop
from activeirs.services.experiments import cell_seed, cell_streams
from activeirs.services.problem_core import bs_transmit_power, check_feasibility


def crandn(rng, *shape):
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def orthogonal_users(k=3, m=4):
    """Users on orthogonal direct channels with the IRS links switched off."""
    return ChannelSet(
        G=np.zeros((m, k), dtype=complex),
        h_d=np.eye(k, dtype=complex),
        h_r=np.zeros((k, m), dtype=complex),
    )


def unit_config(n_t, k, m, **changes):
    base = SystemConfig(n_t=n_t, k=k, m=m, sigma_n2=1.0, sigma_d2=0.1, gamma_req=2.0, p_a=1.0)
    return base.replace(**changes)


class TestZeroForcing(unittest.TestCase):
    def test_directions_null_other_users(self):
        rng = np.random.default_rng(0)
        hbar = crandn(rng, 2, 3)
        directions = zero_forcing_directions(hbar)
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)
        cross = np.abs(hbar.conj() @ directions.T)
        self.assertLess(cross[0, 1], 1e-12)
        self.assertLess(cross[1, 0], 1e-12)
        self.assertGreater(cross[0, 0], 0.0)

    def test_rank_deficient(self):
        row = np.array([1.0, 1j, 0.5])
        with self.assertRaises(np.linalg.LinAlgError):
            zero_forcing_directions(np.stack([row, 2.0 * row]))

    def test_random_reflection_amplitudes(self):
        config = SystemConfig(m=8, p_a=0.02)
        psi = random_reflection(config, np.random.default_rng(1))
        np.testing.assert_allclose(np.abs(psi), np.sqrt(0.02 / 8))
        np.testing.assert_allclose(np.sum(np.abs(psi) ** 2), 0.02)


class TestNoIrs(unittest.TestCase):
    def test_orthogonal_users(self):
        channels = orthogonal_users()
        config = unit_config(3, 3, 4)
        result = baseline_no_irs(channels, config)
        self.assertTrue(result.feasible)
        self.assertAlmostEqual(result.bs_power, 3 * config.gamma_req * config.sigma_n2, places=5)
        self.assertTrue(np.all(result.solution.psi == 0))

    def test_scheme_charges_no_irs(self):
        rng = np.random.default_rng(2)
        channels = ChannelSet(G=crandn(rng, 4, 3), h_d=crandn(rng, 2, 3), h_r=crandn(rng, 2, 4))
        config = unit_config(3, 2, 4)
        outcome = NoIrsScheme().solve(channels, config, rng)
        self.assertTrue(outcome.feasible)
        self.assertEqual(outcome.total_power, outcome.bs_power)
        self.assertFalse(NoIrsScheme.uses_irs)
        self.assertTrue(check_feasibility(channels, outcome.solution, config, tol=1e-5).feasible)

    def test_default_drops_solve(self):
        config = SystemConfig()
        for drop in range(6):
            channel_rng, _ = cell_streams(cell_seed(config.seed, 2, drop))
            _, channels = draw_drop(config, channel_rng)
            with self.subTest(drop=drop):
                result = baseline_no_irs(channels, config)
                self.assertEqual(result.status, SolverStatus.OPTIMAL, result.diagnostics)
                self.assertTrue(check_feasibility(channels, result.solution, config).feasible)
                self.assertLess(max(result.rank_ratios), 1e-4)

    def test_unequal_user_gains(self):
        rng = np.random.default_rng(5)
        h_d = crandn(rng, 3, 4) * np.array([[1e-6], [1e-5], [1e-4]])
        channels = ChannelSet(G=np.zeros((2, 4), dtype=complex), h_d=h_d, h_r=np.zeros((3, 2), dtype=complex))
        config = unit_config(4, 3, 2, sigma_n2=1e-11)
        result = baseline_no_irs(channels, config)
        self.assertTrue(result.feasible, result.diagnostics)
        sinr = check_feasibility(channels, result.solution, config).sinr
        np.testing.assert_array_less(config.gamma_req * (1.0 - 1e-6), sinr)
        np.testing.assert_allclose(sinr, config.gamma_req, rtol=1e-3)

    def test_lift_to_targets(self):
        channels = orthogonal_users()
        config = unit_config(3, 3, 4)
        beams = np.eye(3, dtype=complex) * np.sqrt(config.gamma_req * (1.0 - 1e-5))
        short = Solution(beams, np.zeros(4, dtype=complex))
        lifted = lift_to_targets(channels, short, config)
        self.assertTrue(check_feasibility(channels, lifted, config, tol=1e-9).feasible)
        self.assertAlmostEqual(bs_transmit_power(lifted), 3 * config.gamma_req, places=6)
        self.assertIsNone(lift_to_targets(channels, Solution(short.w * 0.5, short.psi), config))


class TestZfRandom(unittest.TestCase):
    def test_orthogonal_users(self):
        channels = orthogonal_users()
        config = unit_config(3, 3, 4)
        result = baseline_zf_random(channels, config, np.random.default_rng(3))
        self.assertTrue(result.feasible)
        self.assertAlmostEqual(result.bs_power, 3 * config.gamma_req * config.sigma_n2, places=6)
        self.assertTrue(check_feasibility(channels, result.solution, config).feasible)

    def test_random_drop_is_feasible(self):
        rng = np.random.default_rng(4)
        channels = ChannelSet(G=crandn(rng, 4, 3), h_d=crandn(rng, 2, 3), h_r=crandn(rng, 2, 4))
        config = unit_config(3, 2, 4, p_a=0.5)
        outcome = ZfRandomScheme().solve(channels, config, rng)
        if outcome.feasible:
            self.assertTrue(check_feasibility(channels, outcome.solution, config, tol=1e-5).feasible)
            self.assertEqual(outcome.iterations, 1)
        else:
            self.assertIn(outcome.details["status"], ("infeasible", "rank_deficient"))

    def test_more_users_than_antennas(self):
        rng = np.random.default_rng(5)
        channels = ChannelSet(G=crandn(rng, 4, 2), h_d=crandn(rng, 3, 2), h_r=crandn(rng, 3, 4))
        result = baseline_zf_random(channels, unit_config(2, 3, 4), rng)
        self.assertFalse(result.feasible)
        self.assertIsNone(result.solution)
        self.assertEqual(result.details["status"], "zf_unavailable")
        self.assertTrue(np.isnan(result.bs_power))

    def test_irs_budget_too_small_for_noise(self):
        channels = orthogonal_users()
        # the amplified thermal noise alone exceeds the IRS budget
        config = unit_config(3, 3, 4, sigma_d2=2.0)
        result = baseline_zf_random(channels, config, np.random.default_rng(6))
        self.assertFalse(result.feasible)
        self.assertEqual(result.details["status"], "infeasible")


if __name__ == "__main__":
    unittest.main()
