"""Base command class for the activeirs command queue."""

import abc
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any, Dict, Optional, TextIO

from activeirs.core.errors import ActiveIrsError, ConfigError

if TYPE_CHECKING:
    from activeirs.cmds.cmd_service import CmdService
    from activeirs.core.sim_env import SimEnv

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_RUNTIME = 2


@dataclass
class CmdResult:
    """Result of a command execution.

    ``data`` carries structured output for the formatters; ``exit_code`` is
    the process exit status the CLI reports (0 success, 1 usage error,
    2 runtime failure).
    """

    success: bool = True
    message: str = ""
    data: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = EXIT_OK
    command: str = ""
    command_args: Dict[str, Any] = field(default_factory=dict)

    def to_json(self) -> Dict[str, Any]:
        """Convert the result to a JSON-serializable dictionary."""
        return {
            "success": self.success,
            "message": self.message,
            "data": self.data,
            "exit_code": self.exit_code,
            "command": self.command,
            "command_args": self.command_args,
        }

    def __str__(self) -> str:
        return json.dumps(self.to_json(), indent=2, default=str)


class BaseCmd(abc.ABC):
    """Base class for all commands in the command queue."""

    def __init__(
        self,
        command: str,
        args: Dict[str, Any],
        stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None,
    ):
        """Initialize a command.

        Args:
            command: The command name
            args: The command arguments
            stdout: Output stream (defaults to sys.stdout)
            stderr: Error stream (defaults to sys.stderr)
        """
        self.command = command
        self.args = args
        self.stdout = stdout or sys.stdout
        self.stderr = stderr or sys.stderr

    @abc.abstractmethod
    def _execute_impl(self, cmd_service: "CmdService", sim_env: "SimEnv") -> CmdResult:
        """Implementation of the command execution.

        Args:
            cmd_service: The command service to use for executing additional commands
            sim_env: The simulation environment (configuration, output directory)

        Returns:
            CmdResult: The result of the command execution
        """
        pass

    def execute(self, cmd_service: "CmdService", sim_env: "SimEnv") -> CmdResult:
        """Execute the command and populate the result with command information.

        Configuration errors become usage failures (exit code 1); any other
        error raised by the command becomes a runtime failure (exit code 2).
        """
        try:
            result = self._execute_impl(cmd_service, sim_env)
        except ConfigError as exc:
            result = CmdResult(success=False, message=str(exc), exit_code=EXIT_USAGE)
        except ActiveIrsError as exc:
            result = CmdResult(success=False, message=str(exc), exit_code=EXIT_RUNTIME)
        except Exception as exc:
            logger.debug("%s failed", self.command, exc_info=True)
            result = CmdResult(success=False, message=f"{type(exc).__name__}: {exc}", exit_code=EXIT_RUNTIME)

        result.command = self.command
        result.command_args = self.args.copy()
        return result

    def to_json(self) -> Dict[str, Any]:
        """Convert the command to a JSON-serializable dictionary."""
        return {
            "command": self.command,
            "args": self.args,
            "stdout": "<stdout>" if self.stdout is sys.stdout else "<custom>",
            "stderr": "<stderr>" if self.stderr is sys.stderr else "<custom>",
        }

    def __str__(self) -> str:
        return json.dumps(self.to_json(), indent=2, default=str)
