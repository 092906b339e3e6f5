"""Implementation of the 'sweep' command."""

import dataclasses
import logging
from typing import TYPE_CHECKING

from activeirs.cmds.base_cmd import BaseCmd, CmdResult
from activeirs.core.config import PowerModel
from activeirs.core.sim_env import SimEnv
from activeirs.services.experiments import SweepSpec, aggregate, run_sweep, write_csv

if TYPE_CHECKING:
    from activeirs.cmds.cmd_service import CmdService

logger = logging.getLogger(__name__)


class SweepCmd(BaseCmd):
    """Run a Monte Carlo sweep described by a configuration file."""

    def _execute_impl(self, cmd_service: "CmdService", sim_env: SimEnv) -> CmdResult:
        env = sim_env.with_config(self.args["config"]) if self.args.get("config") else sim_env
        system = env.config.system_config(seed=self.args.get("seed"))
        settings = env.config.sweep_settings(
            drops=self.args.get("drops"),
            workers=self.args.get("workers"),
            sinr_units=self.args.get("sinr_units"),
            output=self.args.get("out"),
        )
        output = env.resolve_output(settings.output)
        spec = SweepSpec.from_settings(dataclasses.replace(settings, output=str(output)), system, PowerModel())

        total_cells = len(spec.values) * spec.drops
        step = max(1, total_cells // 10)

        def progress(done: int, total: int) -> None:
            if done % step == 0 or done == total:
                logger.info("%d/%d drops finished", done, total)

        table = run_sweep(spec, progress=progress)
        summary = aggregate(table, seed=system.seed)
        summary_path = output.with_name(f"{output.stem}_summary{output.suffix or '.csv'}")
        write_csv(summary, summary_path)

        frame = table.frame
        outages = {
            scheme: int((~frame[frame["scheme"] == scheme]["feasible"].astype(bool)).sum()) for scheme in spec.schemes
        }
        return CmdResult(
            success=True,
            message=f"Sweep '{spec.scenario}' over {spec.parameter}: {len(table)} rows written to {output}",
            data={
                "scenario": spec.scenario,
                "parameter": spec.parameter,
                "sinr_units": spec.sinr_units,
                "rows": len(table),
                "output": str(output),
                "summary_output": str(summary_path),
                "outages": outages,
                "summary": summary.to_dict("records"),
            },
        )
