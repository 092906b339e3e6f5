"""Tests for Monte Carlo sweeps and their aggregation."""

import math
import os
import tempfile
import unittest
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd

from activeirs.core.config import ConfigFile, SweepSettings, SystemConfig
from activeirs.core.errors import ConfigError, SweepError
from activeirs.core.types import Solution
from activeirs.interface.scheme import Scheme, SchemeOutcome
from activeirs.services import experiments
from activeirs.services.experiments import (
    RESULT_COLUMNS,
    SUMMARY_COLUMNS,
    ResultTable,
    SweepSpec,
    aggregate,
    cell_seed,
    cell_streams,
    ensure_writable,
    run_cell,
    run_sweep,
)


class MatchedFilterScheme(Scheme):
    """Matched filters sized from the direct channels; no optimisation."""

    name = "proposed"

    def solve(self, channels, config, rng):
        gains = np.sum(np.abs(channels.h_d) ** 2, axis=1)
        power = config.gamma_req * config.sigma_n2 / gains * (1.0 + rng.uniform())
        w = channels.h_d / np.sqrt(gains)[:, None] * np.sqrt(power)[:, None]
        solution = Solution(w, np.zeros(channels.m, dtype=complex))
        total = float(np.sum(power))
        return SchemeOutcome(solution, True, bs_power=total, total_power=total + config.p_a, iterations=3)


class NoIrsMatchedFilter(MatchedFilterScheme):
    name = "baseline1"
    uses_irs = False
    active_irs = False


class BrokenScheme(Scheme):
    name = "baseline2"

    def solve(self, channels, config, rng):
        raise RuntimeError("solver crashed")


DUMMY_SCHEMES = {
    "proposed": MatchedFilterScheme,
    "baseline1": NoIrsMatchedFilter,
    "baseline2": BrokenScheme,
}


def small_spec(**changes):
    base = SystemConfig(n_t=2, k=2, m=3, seed=17)
    fields = dict(base=base, values=(0.0, 3.0), drops=3, schemes=("baseline1", "proposed"), record_timing=False)
    fields.update(changes)
    return SweepSpec(**fields)


class TestSeeding(unittest.TestCase):
    def test_cell_streams_are_independent_of_selection(self):
        channel_a, rngs_a = cell_streams(cell_seed(5, 1, 2))
        channel_b, rngs_b = cell_streams(cell_seed(5, 1, 2))
        self.assertEqual(channel_a.uniform(), channel_b.uniform())
        self.assertEqual(list(rngs_a), ["proposed", "baseline1", "baseline2"])
        self.assertEqual(rngs_a["baseline2"].uniform(), rngs_b["baseline2"].uniform())
        other, _ = cell_streams(cell_seed(5, 1, 3))
        self.assertNotEqual(other.uniform(), cell_streams(cell_seed(5, 1, 2))[0].uniform())


@mock.patch.dict(experiments.SCHEMES, DUMMY_SCHEMES)
class TestRunSweep(unittest.TestCase):
    def test_rows_are_paired_and_ordered(self):
        table = run_sweep(small_spec())
        frame = table.frame
        self.assertEqual(list(frame.columns), RESULT_COLUMNS)
        self.assertEqual(len(table), 2 * 2 * 3)
        self.assertEqual(list(frame["scheme"].iloc[:6]), ["proposed"] * 6)
        self.assertEqual(list(frame["value"].iloc[:6]), [0.0, 0.0, 0.0, 3.0, 3.0, 3.0])
        self.assertEqual(list(frame["drop"].iloc[:3]), [0, 1, 2])

        for _, cell in frame.groupby(["value", "drop"]):
            self.assertEqual(cell["channel_hash"].nunique(), 1)
            self.assertEqual(cell["seed"].nunique(), 1)
        self.assertEqual(frame["channel_hash"].nunique(), 6)
        self.assertTrue(frame["feasible"].all())
        self.assertTrue((frame["solve_seconds"] == 0.0).all())

    def test_reproducible(self):
        first = run_sweep(small_spec()).frame
        second = run_sweep(small_spec()).frame
        pd.testing.assert_frame_equal(first, second)

    def test_energy_efficiency_charges_irs_only_when_used(self):
        rows = run_cell(small_spec(), 0, 0)
        by_scheme = {row["scheme"]: row for row in rows}
        self.assertGreater(by_scheme["baseline1"]["ee_bits_per_j_hz"], 0.0)
        self.assertGreater(by_scheme["proposed"]["ee_bits_per_j_hz"], 0.0)
        self.assertAlmostEqual(by_scheme["proposed"]["total_power_w"] - by_scheme["proposed"]["bs_power_w"], 0.01)

    def test_failing_scheme_is_recorded_as_outage(self):
        table = run_sweep(small_spec(schemes=("proposed", "baseline2")))
        broken = table.frame[table.frame["scheme"] == "baseline2"]
        self.assertEqual(len(broken), 6)
        self.assertFalse(broken["feasible"].any())
        self.assertTrue(broken["bs_power_w"].isna().all())

    def test_writes_output(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "out", "sweep.csv")
            run_sweep(small_spec(output=path))
            written = pd.read_csv(path)
        self.assertEqual(list(written.columns), RESULT_COLUMNS)
        self.assertEqual(len(written), 12)

    def test_progress_callback(self):
        calls = []
        run_sweep(small_spec(drops=2), progress=lambda done, total: calls.append((done, total)))
        self.assertEqual(calls[-1], (4, 4))
        self.assertEqual(len(calls), 4)


class TestSweepSpec(unittest.TestCase):
    def test_validation(self):
        base = SystemConfig()
        with self.assertRaises(ConfigError):
            SweepSpec(base, parameter="radius")
        with self.assertRaises(ConfigError):
            SweepSpec(base, values=())
        with self.assertRaises(ConfigError):
            SweepSpec(base, schemes=("oracle",))
        with self.assertRaises(ConfigError):
            SweepSpec(base, drops=0)

    def test_validation_matches_config_file_keys(self):
        for changes in ({"drops": 0}, {"workers": 0}, {"sinr_units": "mw"}, {"schemes": ("oracle",)}):
            with self.subTest(**changes):
                with self.assertRaises(ConfigError) as spec_error:
                    SweepSpec(SystemConfig(), **changes)
                with self.assertRaises(ConfigError) as settings_error:
                    SweepSettings(**changes)
                self.assertEqual(str(spec_error.exception), str(settings_error.exception))

    def test_shipped_configs_disable_timing(self):
        root = Path(__file__).resolve().parents[2] / "configs"
        for path in sorted(root.glob("*.conf")):
            with self.subTest(config=path.name):
                self.assertFalse(ConfigFile(path, environ={}).sweep_settings().record_timing)

    def test_config_for(self):
        base = SystemConfig()
        self.assertAlmostEqual(SweepSpec(base).config_for(10.0).gamma_req, 10.0)
        self.assertEqual(SweepSpec(base, sinr_units="linear").config_for(3.0).gamma_req, 3.0)
        self.assertEqual(SweepSpec(base, parameter="m", values=(8.0,)).config_for(8.0).m, 8)
        self.assertEqual(SweepSpec(base, parameter="p_a", values=(0.02,)).config_for(0.02).p_a, 0.02)
        with self.assertRaises(ConfigError):
            SweepSpec(base, parameter="m", values=(8.5,)).config_for(8.5)


def result_row(scheme, value, drop, bs, feasible=True):
    return {
        "scheme": scheme,
        "value": value,
        "drop": drop,
        "seed": 1,
        "channel_hash": "abc",
        "bs_power_w": bs if feasible else float("nan"),
        "total_power_w": bs + 0.01 if feasible else float("nan"),
        "ee_bits_per_j_hz": 1.0 if feasible else float("nan"),
        "feasible": feasible,
        "iterations": 4 if feasible else 0,
        "solve_seconds": 0.0,
    }


class TestAggregate(unittest.TestCase):
    def test_means_in_watts_then_dbm(self):
        table = ResultTable.from_rows(
            [
                result_row("proposed", 4.0, 0, 0.01),
                result_row("proposed", 4.0, 1, 0.1),
                result_row("proposed", 4.0, 2, 0.0, feasible=False),
            ]
        )
        summary = aggregate(table)
        self.assertEqual(list(summary.columns), SUMMARY_COLUMNS)
        row = summary.iloc[0]
        self.assertAlmostEqual(row["mean_bs_power_dbm"], 17.4036, places=4)
        self.assertAlmostEqual(row["outage_rate"], 1.0 / 3.0)
        self.assertEqual(row["feasible_drops"], 2)
        self.assertGreater(row["ci95_bs_power_db"], 0.0)
        self.assertFalse(row["all_outage"])

    def test_single_drop_has_zero_interval(self):
        summary = aggregate(ResultTable.from_rows([result_row("baseline1", 0.0, 0, 0.02)]))
        self.assertEqual(summary.iloc[0]["ci95_bs_power_db"], 0.0)
        self.assertEqual(summary.iloc[0]["mean_iterations"], 4.0)

    def test_all_outage(self):
        rows = [result_row("baseline2", 8.0, d, 0.0, feasible=False) for d in range(3)]
        with self.assertLogs("activeirs.services.experiments", level="WARNING"):
            summary = aggregate(ResultTable.from_rows(rows))
        row = summary.iloc[0]
        self.assertTrue(row["all_outage"])
        self.assertEqual(row["outage_rate"], 1.0)
        self.assertTrue(math.isnan(row["mean_bs_power_dbm"]))

    def test_bootstrap_is_seeded(self):
        rows = [result_row("proposed", 0.0, d, 0.01 * (d + 1)) for d in range(5)]
        table = ResultTable.from_rows(rows)
        pd.testing.assert_frame_equal(aggregate(table, seed=3), aggregate(table, seed=3))


class TestOutput(unittest.TestCase):
    def test_empty_table_writes_header(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "empty.csv")
            ResultTable().write_csv(path)
            with open(path, encoding="utf-8") as fh:
                self.assertEqual(fh.read().strip(), ",".join(RESULT_COLUMNS))

    def test_directory_is_not_writable_output(self):
        with tempfile.TemporaryDirectory() as tmp:
            with self.assertRaises(SweepError):
                ensure_writable(tmp)


if __name__ == "__main__":
    unittest.main()
