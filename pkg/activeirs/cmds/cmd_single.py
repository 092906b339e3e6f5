"""Implementation of the 'single' command."""

import copy
import json
from typing import TYPE_CHECKING, Any, Dict

import numpy as np

from activeirs.cmds.base_cmd import EXIT_RUNTIME, BaseCmd, CmdResult
from activeirs.core.linalg import linear_to_db, watts_to_dbm
from activeirs.core.sim_env import SimEnv
from activeirs.services.baselines import baseline_no_irs
from activeirs.services.channel_model import draw_drop
from activeirs.services.conic_backend import assemble
from activeirs.services.experiments import cell_seed, cell_streams
from activeirs.services.ia_solver import build_subproblem, prepare, run
from activeirs.services.problem_core import check_feasibility

if TYPE_CHECKING:
    from activeirs.cmds.cmd_service import CmdService


class SingleCmd(BaseCmd):
    """Run the proposed design on one drop and report its feasibility and trace.

    The drop is drawn from the same seed stream a sweep uses for its first
    swept value, so ``single --drop d`` reproduces cell (0, d) of a sweep over
    the same base configuration.
    """

    def _execute_impl(self, cmd_service: "CmdService", sim_env: SimEnv) -> CmdResult:
        env = sim_env.with_config(self.args["config"]) if self.args.get("config") else sim_env
        config = env.config.system_config(seed=self.args.get("seed"))
        drop = int(self.args.get("drop") or 0)
        in_db = (self.args.get("sinr_units") or "db") == "db"

        seq = cell_seed(config.seed, 0, drop)
        channel_rng, rngs = cell_streams(seq)
        _, channels = draw_drop(config, channel_rng)

        data: Dict[str, Any] = {"drop": drop, "seed": int(seq.generate_state(1, np.uint64)[0])}
        data["channel_hash"] = channels.digest()

        if self.args.get("dump_problem"):
            instance, iterate, _ = prepare(channels, config, copy.deepcopy(rngs["proposed"]))
            sub = build_subproblem(instance.channels, instance.config, iterate)
            assembled = assemble(sub.problem, config.solver)
            path = env.resolve_output(self.args["dump_problem"])
            with open(path, "w", encoding="utf-8") as fh:
                assembled.dump(fh)
            data["problem_dump"] = str(path)
            data["problem_digest"] = assembled.digest()

        solution, trace = run(channels, config, rngs["proposed"])
        report = check_feasibility(channels, solution, config)
        reference = baseline_no_irs(channels, config)

        if self.args.get("trace_out"):
            path = env.resolve_output(self.args["trace_out"])
            trace.write_csv(path)
            data["trace_output"] = str(path)

        power = float(np.sum(np.abs(solution.w) ** 2))
        sinr = [linear_to_db(s) if in_db else float(s) for s in report.sinr]
        data.update(
            {
                "feasible": report.feasible,
                "bs_power_w": power,
                "bs_power_dbm": watts_to_dbm(power),
                "no_irs_power_dbm": watts_to_dbm(reference.bs_power) if reference.feasible else None,
                "sinr": sinr,
                "sinr_units": "db" if in_db else "linear",
                "irs_power_w": report.c2_lhs,
                "amplitudes": solution.amplitudes().tolist(),
                "iterations": trace.iterations,
                "converged": trace.converged,
                "stop_reason": trace.stop_reason,
                "polished": trace.polished,
                "selected": trace.selected,
                "rank_ratios": trace.rank_ratios,
                "report": report.to_json(),
                "trace": trace.to_frame().to_dict("records"),
            }
        )

        if self.args.get("out"):
            path = env.resolve_output(self.args["out"])
            path.write_text(json.dumps(data, indent=2, default=str), encoding="utf-8")
            data["output"] = str(path)

        return CmdResult(
            success=report.feasible,
            message=(
                f"Drop {drop}: BS power {watts_to_dbm(power):.2f} dBm after {trace.iterations} IA iterations"
                f" ({trace.stop_reason})"
            ),
            data=data,
            exit_code=0 if report.feasible else EXIT_RUNTIME,
        )
