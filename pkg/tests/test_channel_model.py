"""Tests for geometry and channel generation."""

import unittest

import numpy as np

from activeirs.core.config import SystemConfig
from activeirs.core.errors import ContractViolation
from activeirs.services.channel_model import (
    SECTOR_HALF_ANGLE,
    draw_drop,
    generate_channels,
    path_loss,
    place_nodes,
    reference_gain,
    steering_vector,
)


class TestGeometry(unittest.TestCase):
    def test_nodes_lie_in_sector(self):
        config = SystemConfig(k=50, radius=100.0)
        geometry = place_nodes(config, np.random.default_rng(1))
        np.testing.assert_allclose(geometry.irs_position, [100.0, 0.0])
        np.testing.assert_allclose(geometry.bs_position, [0.0, 0.0])
        self.assertEqual(geometry.user_positions.shape, (50, 2))
        self.assertTrue(np.all(geometry.user_distances() <= 100.0))
        angles = np.arctan2(geometry.user_positions[:, 1], geometry.user_positions[:, 0])
        self.assertTrue(np.all(np.abs(angles) <= SECTOR_HALF_ANGLE + 1e-12))
        self.assertAlmostEqual(geometry.bs_irs_distance(), 100.0)

    def test_area_uniform_mean_distance(self):
        config = SystemConfig(k=100, radius=60.0)
        rng = np.random.default_rng(3)
        distances = np.concatenate([place_nodes(config, rng).user_distances() for _ in range(100)])
        self.assertAlmostEqual(distances.mean() / (2.0 * 60.0 / 3.0), 1.0, delta=0.02)


class TestPathLoss(unittest.TestCase):
    def test_inverse_power_law(self):
        f_c = 2.4e9
        self.assertAlmostEqual(path_loss(10.0, 2.0, f_c) / (reference_gain(f_c) / 100.0), 1.0, places=12)
        self.assertAlmostEqual(reference_gain(f_c), (299792458.0 / (4 * np.pi * f_c)) ** 2, places=15)

    def test_clamps_short_distances(self):
        self.assertEqual(path_loss(0.5, 3.0, 2.4e9), path_loss(1.0, 3.0, 2.4e9))
        self.assertEqual(path_loss(0.0, 3.0, 2.4e9), path_loss(1.0, 3.0, 2.4e9))

    def test_rejects_bad_distances(self):
        with self.assertRaises(ContractViolation):
            path_loss(-1.0, 2.0, 2.4e9)
        with self.assertRaises(ContractViolation):
            path_loss(float("nan"), 2.0, 2.4e9)

    def test_steering_vector(self):
        a = steering_vector(4, np.pi / 6)
        np.testing.assert_allclose(np.abs(a), 1.0)
        np.testing.assert_allclose(a, np.exp(1j * np.pi * np.arange(4) * 0.5))


class TestChannels(unittest.TestCase):
    def test_shapes(self):
        config = SystemConfig(n_t=3, k=2, m=5)
        _, channels = draw_drop(config, np.random.default_rng(0))
        self.assertEqual(channels.G.shape, (5, 3))
        self.assertEqual(channels.h_d.shape, (2, 3))
        self.assertEqual(channels.h_r.shape, (2, 5))
        self.assertEqual((channels.n_t, channels.k, channels.m), (3, 2, 5))

    def test_same_seed_same_drop(self):
        config = SystemConfig()
        first = draw_drop(config, np.random.default_rng(42))[1]
        second = draw_drop(config, np.random.default_rng(42))[1]
        third = draw_drop(config, np.random.default_rng(43))[1]
        self.assertEqual(first.digest(), second.digest())
        self.assertNotEqual(first.digest(), third.digest())
        np.testing.assert_array_equal(first.G, second.G)

    def test_pure_line_of_sight_is_deterministic_in_magnitude(self):
        config = SystemConfig(rician_factor=float("inf"))
        geometry = place_nodes(config, np.random.default_rng(0))
        a = generate_channels(config, geometry, np.random.default_rng(1))
        b = generate_channels(config, geometry, np.random.default_rng(2))
        expected = np.sqrt(path_loss(config.radius, config.alpha_r, config.f_c))
        np.testing.assert_allclose(np.abs(a.G), expected, rtol=1e-12)
        np.testing.assert_allclose(a.G, b.G)
        np.testing.assert_allclose(a.h_d, b.h_d)

    def test_effective_channel(self):
        config = SystemConfig(n_t=2, k=2, m=3)
        _, channels = draw_drop(config, np.random.default_rng(5))
        psi = np.array([1.0, 1j, -0.5])
        hbar = channels.effective(psi)
        for k in range(channels.k):
            row = channels.h_d[k].conj() + channels.h_r[k].conj() @ np.diag(psi) @ channels.G
            np.testing.assert_allclose(hbar[k].conj(), row, rtol=1e-9, atol=1e-20)


if __name__ == "__main__":
    unittest.main()
