"""Factory for creating command objects from CLI arguments."""

import argparse
from typing import Dict, Optional, TextIO, Type

from activeirs.cmds.base_cmd import BaseCmd


class CommandFactory:
    """Factory for creating command objects from CLI arguments."""

    def __init__(self):
        self.cmd_registry: Dict[str, Type[BaseCmd]] = {}

    def register_cmd(self, cmd_name: str, cmd_class: Type[BaseCmd]) -> None:
        self.cmd_registry[cmd_name] = cmd_class

    def create_from_args(
        self,
        command: str,
        args: argparse.Namespace,
        stdout: Optional[TextIO] = None,
        stderr: Optional[TextIO] = None,
    ) -> Optional[BaseCmd]:
        """Create a command instance from parsed CLI arguments.

        Returns:
            Optional[BaseCmd]: The command, or None if the name is not registered
        """
        cmd_class = self.cmd_registry.get(command)
        if cmd_class is None:
            return None
        return cmd_class(command, vars(args), stdout=stdout, stderr=stderr)


cmd_factory = CommandFactory()


def register_all_commands() -> None:
    """Register all command implementations."""
    from activeirs.cmds.cmd_single import SingleCmd
    from activeirs.cmds.cmd_sweep import SweepCmd
    from activeirs.cmds.cmd_verify import VerifyCmd

    cmd_factory.register_cmd("sweep", SweepCmd)
    cmd_factory.register_cmd("single", SingleCmd)
    cmd_factory.register_cmd("verify", VerifyCmd)
