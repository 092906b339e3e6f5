"""Tests for configuration loading."""

import math
import os
import tempfile
import unittest

from activeirs.core.config import ConfigFile, PowerModel, SweepSettings, SystemConfig
from activeirs.core.errors import ConfigError


class TestSystemConfig(unittest.TestCase):
    def test_defaults(self):
        config = SystemConfig()
        self.assertEqual((config.n_t, config.k, config.m), (4, 3, 10))
        self.assertAlmostEqual(config.gamma_req, 10 ** 0.4)
        self.assertAlmostEqual(config.sigma_n2 / 10 ** -14.4, 1.0)
        self.assertAlmostEqual(config.sigma_d2 / 10 ** -13.0, 1.0)
        self.assertAlmostEqual(config.rician_factor, 10 ** 0.3)
        self.assertEqual(config.p_a, 0.01)
        self.assertEqual(config.solver, "CLARABEL")
        self.assertFalse(config.bound_aux_v)
        self.assertFalse(SweepSettings().record_timing)

    def test_validation(self):
        with self.assertRaises(ConfigError):
            SystemConfig(n_t=0)
        with self.assertRaises(ConfigError):
            SystemConfig(p_a=-1.0)
        with self.assertRaises(ConfigError):
            SystemConfig(epsilon=1.5)
        with self.assertRaises(ConfigError):
            PowerModel(eta=0.0)
        with self.assertRaises(ConfigError):
            SweepSettings(sweep_parameter="radius")
        with self.assertRaises(ConfigError):
            SweepSettings(schemes=("proposed", "oracle"))

    def test_replace(self):
        config = SystemConfig().replace(m=16)
        self.assertEqual(config.m, 16)


class TestConfigFile(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmpdir.cleanup()

    def write(self, name, text):
        path = os.path.join(self.tmpdir.name, name)
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
        return path

    def test_key_value_file(self):
        path = self.write(
            "scenario.conf",
            "# comment line\n"
            "m = 12\n"
            "gamma_req = 2.5   # linear\n"
            "polish = false\n"
            "\n"
            "values = 0, 4, 8\n"
            "schemes = proposed, baseline2\n",
        )
        cfg = ConfigFile(path, environ={})
        system = cfg.system_config()
        self.assertEqual(system.m, 12)
        self.assertEqual(system.gamma_req, 2.5)
        self.assertFalse(system.polish)
        sweep = cfg.sweep_settings()
        self.assertEqual(sweep.values, (0.0, 4.0, 8.0))
        self.assertEqual(sweep.schemes, ("proposed", "baseline2"))

    def test_unknown_key_names_line(self):
        path = self.write("bad.conf", "m = 4\nantennas = 8\n")
        with self.assertRaises(ConfigError) as ctx:
            ConfigFile(path, environ={})
        self.assertIn(":2:", str(ctx.exception))
        self.assertIn("antennas", str(ctx.exception))

    def test_line_without_equals(self):
        path = self.write("bad.conf", "m 4\n")
        with self.assertRaises(ConfigError):
            ConfigFile(path, environ={})

    def test_environment_override(self):
        path = self.write("scenario.conf", "m = 12\n")
        cfg = ConfigFile(path, environ={"ACTIVEIRS_M": "6", "ACTIVEIRS_DROPS": "3"})
        self.assertEqual(cfg.system_config().m, 6)
        self.assertEqual(cfg.sweep_settings().drops, 3)

    def test_yaml_file(self):
        path = self.write("scenario.yaml", "k: 2\nrician_factor: .inf\nvalues: [4, 8]\n")
        cfg = ConfigFile(path, environ={})
        self.assertEqual(cfg.system_config().k, 2)
        self.assertTrue(math.isinf(cfg.system_config().rician_factor))
        self.assertEqual(cfg.sweep_settings().values, (4.0, 8.0))

    def test_overrides_skip_none(self):
        path = self.write("scenario.conf", "seed = 99\n")
        cfg = ConfigFile(path, environ={})
        self.assertEqual(cfg.system_config(seed=None).seed, 99)
        self.assertEqual(cfg.system_config(seed=5).seed, 5)

    def test_bad_value(self):
        path = self.write("scenario.conf", "m = 2.5\n")
        with self.assertRaises(ConfigError):
            ConfigFile(path, environ={}).system_config()

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            ConfigFile(os.path.join(self.tmpdir.name, "absent.conf"), environ={})


if __name__ == "__main__":
    unittest.main()
