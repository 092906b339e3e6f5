"""Tests for the command-line interface."""

import contextlib
import io
import json
import os
import tempfile
import unittest
from unittest import mock

import pandas as pd

from activeirs.cli.main import main, setup_parsers
from activeirs.cmds.cmd_service import CmdService
from activeirs.cmds.cmd_single import SingleCmd
from activeirs.cmds.cmd_sweep import SweepCmd
from activeirs.core.sim_env import SimEnv
from activeirs.services import experiments
from tests.services.test_experiments import DUMMY_SCHEMES


def run_main(argv):
    """Run the CLI and return (exit code, stdout, stderr)."""
    out, err = io.StringIO(), io.StringIO()
    code = 0
    with contextlib.redirect_stdout(out), contextlib.redirect_stderr(err):
        try:
            main(argv)
        except SystemExit as exc:
            code = exc.code if isinstance(exc.code, int) else 1
    return code, out.getvalue(), err.getvalue()


class TestParser(unittest.TestCase):
    def test_sweep_arguments(self):
        args = setup_parsers().parse_args(
            ["sweep", "--config", "a.conf", "-o", "out.csv", "--seed", "0x10", "-n", "5", "-j", "2", "--sinr-units", "linear"]
        )
        self.assertEqual(args.command, "sweep")
        self.assertEqual(args.config, "a.conf")
        self.assertEqual(args.out, "out.csv")
        self.assertEqual(args.seed, 16)
        self.assertEqual((args.drops, args.workers), (5, 2))
        self.assertEqual(args.sinr_units, "linear")

    def test_single_and_verify_arguments(self):
        parser = setup_parsers()
        single = parser.parse_args(["single", "--drop", "3", "--trace-out", "t.csv", "--dump-problem", "p.txt"])
        self.assertEqual((single.drop, single.trace_out, single.dump_problem), (3, "t.csv", "p.txt"))
        verify = parser.parse_args(["verify", "embedding", "minorants", "--samples", "10"])
        self.assertEqual(verify.suites, ["embedding", "minorants"])
        self.assertEqual(verify.samples, 10)

    def test_usage_errors_exit_with_one(self):
        for argv in ([], ["sweep", "--drops", "0"], ["sweep", "--sinr-units", "dB"], ["single", "--seed", "-1"], ["plot"]):
            with self.subTest(argv=argv):
                code, _, _ = run_main(argv)
                self.assertEqual(code, 1)


class TestMain(unittest.TestCase):
    def test_debug_mode_prints_command(self):
        with mock.patch.dict(os.environ, {"ACTIVEIRS_CLI_DEBUG": "1"}):
            code, out, _ = run_main(["verify", "embedding"])
        self.assertEqual(code, 0)
        payload = json.loads(out)
        self.assertEqual(payload["command"], "verify")
        self.assertEqual(payload["args"]["suites"], ["embedding"])

    def test_unknown_suite_is_usage_error(self):
        code, _, _ = run_main(["verify", "nonsense"])
        self.assertEqual(code, 1)

    def test_verify_runs(self):
        code, _, _ = run_main(["verify", "embedding", "minorants", "--samples", "10"])
        self.assertEqual(code, 0)

    def test_missing_config_is_usage_error(self):
        code, _, _ = run_main(["sweep", "--config", "/nonexistent/activeirs.conf"])
        self.assertEqual(code, 1)


@mock.patch.dict(experiments.SCHEMES, DUMMY_SCHEMES)
class TestSweepCommand(unittest.TestCase):
    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.config = os.path.join(self.tmpdir.name, "tiny.conf")
        with open(self.config, "w", encoding="utf-8") as fh:
            fh.write(
                "scenario = tiny\n"
                "sweep_parameter = gamma_req\n"
                "values = 0, 3\n"
                "drops = 2\n"
                "schemes = proposed, baseline1\n"
                "record_timing = false\n"
                "n_t = 2\n"
                "k = 2\n"
                "m = 3\n"
            )

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_sweep_writes_results_and_summary(self):
        out = os.path.join(self.tmpdir.name, "results", "tiny.csv")
        code, _, _ = run_main(["sweep", "-c", self.config, "-o", out, "--seed", "5"])
        self.assertEqual(code, 0)
        rows = pd.read_csv(out)
        self.assertEqual(len(rows), 2 * 2 * 2)
        summary = pd.read_csv(os.path.join(self.tmpdir.name, "results", "tiny_summary.csv"))
        self.assertEqual(len(summary), 4)
        self.assertEqual(list(summary["scheme"]), ["proposed", "proposed", "baseline1", "baseline1"])

    def test_drops_override(self):
        out = os.path.join(self.tmpdir.name, "override.csv")
        service = CmdService(SimEnv(self.tmpdir.name, environ={}))
        service.add_cmd(SweepCmd("sweep", {"config": self.config, "out": out, "drops": 1}))
        result = service.execute_all()[0]
        self.assertTrue(result.success, result.message)
        self.assertEqual(result.data["rows"], 2 * 2 * 1)
        self.assertEqual(result.data["sinr_units"], "db")
        self.assertEqual(result.data["outages"], {"proposed": 0, "baseline1": 0})


class TestSingleCommand(unittest.TestCase):
    def test_single_drop_outputs(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = os.path.join(tmp, "small.yaml")
            with open(config, "w", encoding="utf-8") as fh:
                fh.write("n_t: 2\nk: 1\nm: 2\nmax_iter: 3\n")
            service = CmdService(SimEnv(tmp, environ={}))
            args = {
                "config": config,
                "drop": 1,
                "out": "single.json",
                "trace_out": "trace.csv",
                "dump_problem": "problem.txt",
            }
            service.add_cmd(SingleCmd("single", args))
            result = service.execute_all()[0]

            data = result.data
            self.assertEqual(result.exit_code, 0 if data["feasible"] else 2)
            self.assertEqual(data["drop"], 1)
            self.assertEqual(len(data["sinr"]), 1)
            self.assertEqual(data["trace"][0]["solver_status"], "initial")
            with open(os.path.join(tmp, "problem.txt"), encoding="utf-8") as fh:
                self.assertEqual(fh.readline().strip(), "# activeirs conic interchange v1")
            self.assertTrue(os.path.exists(os.path.join(tmp, "trace.csv")))
            with open(os.path.join(tmp, "single.json"), encoding="utf-8") as fh:
                self.assertEqual(json.load(fh)["channel_hash"], data["channel_hash"])


if __name__ == "__main__":
    unittest.main()
