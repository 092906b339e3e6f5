"""Implementation of the 'verify' command."""

from typing import TYPE_CHECKING

from activeirs.cmds.base_cmd import EXIT_RUNTIME, BaseCmd, CmdResult
from activeirs.core.errors import ConfigError
from activeirs.core.sim_env import SimEnv
from activeirs.services.verification import SUITES, run_suites

if TYPE_CHECKING:
    from activeirs.cmds.cmd_service import CmdService


class VerifyCmd(BaseCmd):
    """Run the numerical self-check suites."""

    def _execute_impl(self, cmd_service: "CmdService", sim_env: SimEnv) -> CmdResult:
        names = self.args.get("suites") or list(SUITES)
        unknown = [name for name in names if name not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)} (available: {', '.join(SUITES)})")

        seed = self.args.get("seed")
        records = run_suites(names, seed=0 if seed is None else int(seed), samples=self.args.get("samples"))
        failed = [r.name for r in records if not r.passed]
        return CmdResult(
            success=not failed,
            message=f"{len(records) - len(failed)}/{len(records)} suites passed"
            + (f"; failed: {', '.join(failed)}" if failed else ""),
            data={"suites": [r.to_json() for r in records]},
            exit_code=EXIT_RUNTIME if failed else 0,
        )
