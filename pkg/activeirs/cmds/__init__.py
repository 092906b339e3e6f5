"""Command queue package for activeirs.

Each CLI subcommand is a ``BaseCmd`` executed through a ``CmdService``, so
commands can be queued and tested without going through argparse.
"""

from activeirs.cmds.base_cmd import BaseCmd, CmdResult
from activeirs.cmds.cmd_service import CmdService

__all__ = ["BaseCmd", "CmdResult", "CmdService"]
