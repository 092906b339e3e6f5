"""Tests for SINR, power and feasibility evaluation."""

import unittest

import numpy as np

from activeirs.core.config import PowerModel, SystemConfig
from activeirs.core.errors import ContractViolation
from activeirs.core.types import ChannelSet, Solution
from activeirs.services.channel_model import draw_drop
from activeirs.services.problem_core import (
    beam_matrices,
    bs_transmit_power,
    c1_residual,
    c2_residual,
    check_feasibility,
    compute_sinr,
    compute_sinrs,
    energy_efficiency,
    irs_output_power,
    scale_instance,
    trace_form_report,
)


def scalar_instance():
    channels = ChannelSet(
        G=np.array([[1.0 + 0j]]),
        h_d=np.array([[1.0 + 0j]]),
        h_r=np.array([[1.0 + 0j]]),
    )
    solution = Solution(w=np.array([[2.0 + 0j]]), psi=np.array([1.0 + 0j]))
    config = SystemConfig(n_t=1, k=1, m=1, sigma_n2=1.0, sigma_d2=0.5, gamma_req=10.0, p_a=5.0)
    return channels, solution, config


def random_solution(rng, config):
    w = rng.standard_normal((config.k, config.n_t)) + 1j * rng.standard_normal((config.k, config.n_t))
    psi = rng.standard_normal(config.m) + 1j * rng.standard_normal(config.m)
    return Solution(w=w, psi=psi)


class TestScalarInstance(unittest.TestCase):
    def test_sinr_and_irs_power(self):
        channels, solution, config = scalar_instance()
        self.assertAlmostEqual(compute_sinr(channels, solution, config, 0), 16.0 / 1.5)
        self.assertAlmostEqual(irs_output_power(channels, solution, config), 4.5)
        self.assertAlmostEqual(bs_transmit_power(solution), 4.0)

    def test_feasibility(self):
        channels, solution, config = scalar_instance()
        report = check_feasibility(channels, solution, config)
        self.assertTrue(report.feasible)
        self.assertAlmostEqual(report.c2_margin, 0.5)
        self.assertEqual(report.max_violation(config.gamma_req, config.p_a), 0.0)

        tight = check_feasibility(channels, solution, config.replace(p_a=4.4))
        self.assertFalse(tight.feasible)
        self.assertAlmostEqual(tight.max_violation(10.0, 4.4), 0.1 / 4.4)

        demanding = check_feasibility(channels, solution, config.replace(gamma_req=11.0))
        self.assertFalse(demanding.feasible)

    def test_feasibility_rejects_bad_tolerance(self):
        channels, solution, config = scalar_instance()
        with self.assertRaises(ContractViolation):
            check_feasibility(channels, solution, config, tol=0.0)

    def test_energy_efficiency(self):
        channels, solution, config = scalar_instance()
        rate = np.log2(1.0 + 16.0 / 1.5)
        active = energy_efficiency(channels, solution, config, PowerModel())
        self.assertAlmostEqual(active, rate / (8.0 + 0.1 + 0.085 + 0.002 + 10.0))
        passive = energy_efficiency(channels, solution, config, PowerModel(passive=True), irs_elements=0)
        self.assertAlmostEqual(passive, rate / (8.0 + 0.1 + 0.085))

    def test_trace_form_residuals(self):
        channels, solution, config = scalar_instance()
        W = beam_matrices(solution)
        self.assertAlmostEqual(c1_residual(channels, W, solution.psi, config, 0), -1.0)
        self.assertAlmostEqual(c1_residual(channels, W, solution.psi, config.replace(gamma_req=11.0), 0), 0.5)
        self.assertAlmostEqual(c2_residual(channels, W, solution.psi, config), -0.5)

    def test_dimension_mismatch(self):
        channels, _, config = scalar_instance()
        bad = Solution(w=np.ones((1, 2), dtype=complex), psi=np.ones(1, dtype=complex))
        with self.assertRaises(ContractViolation):
            compute_sinrs(channels, bad, config)
        with self.assertRaises(ContractViolation):
            compute_sinr(channels, Solution(np.ones((1, 1)), np.ones(1)), config, 1)


class TestRandomInstances(unittest.TestCase):
    def setUp(self):
        self.config = SystemConfig()
        self.rng = np.random.default_rng(11)
        _, self.channels = draw_drop(self.config, self.rng)

    def test_trace_form_matches_direct_evaluation(self):
        solution = random_solution(self.rng, self.config)
        solution = Solution(solution.w * 1e-2, solution.psi)
        direct = check_feasibility(self.channels, solution, self.config)
        traced = trace_form_report(self.channels, beam_matrices(solution), solution.psi, self.config)
        np.testing.assert_allclose(traced.sinr, direct.sinr, rtol=1e-9)
        self.assertAlmostEqual(traced.c2_lhs / direct.c2_lhs, 1.0, places=9)

    def test_scaling_preserves_sinr(self):
        p = 3e-3
        instance = scale_instance(self.channels, self.config, p)
        self.assertEqual(instance.config.sigma_n2, 1.0)
        self.assertAlmostEqual(float(np.max(np.abs(instance.channels.G))), 1.0)

        scaled = random_solution(self.rng, self.config)
        physical = instance.to_physical(scaled)
        np.testing.assert_allclose(
            compute_sinrs(self.channels, physical, self.config),
            compute_sinrs(instance.channels, scaled, instance.config),
            rtol=1e-9,
        )
        self.assertAlmostEqual(
            irs_output_power(self.channels, physical, self.config)
            / (p * irs_output_power(instance.channels, scaled, instance.config)),
            1.0,
            places=9,
        )
        self.assertAlmostEqual(instance.config.p_a, self.config.p_a / p)
        round_trip = instance.to_scaled(physical)
        np.testing.assert_allclose(round_trip.w, scaled.w)
        np.testing.assert_allclose(round_trip.psi, scaled.psi)

    def test_scaling_rejects_bad_power(self):
        with self.assertRaises(ContractViolation):
            scale_instance(self.channels, self.config, 0.0)


if __name__ == "__main__":
    unittest.main()
