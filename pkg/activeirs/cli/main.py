"""Main entry point for the activeirs CLI."""

import argparse
import json
import logging
import os
import re
import sys
from typing import Any, Callable, Dict, List, NoReturn, Optional

from activeirs.core.sim_env import RICH_DISABLED, SimEnv, configure_logging

if not RICH_DISABLED:
    try:
        from rich.console import Console
        from rich.text import Text

        RICH_AVAILABLE = True
    except ImportError:
        RICH_AVAILABLE = False
else:
    RICH_AVAILABLE = False

from activeirs.cmds.base_cmd import EXIT_RUNTIME, EXIT_USAGE, CmdResult
from activeirs.cmds.cmd_factory import cmd_factory, register_all_commands
from activeirs.cmds.cmd_service import CmdService

if RICH_AVAILABLE:
    console = Console()
else:

    class SimpleConsole:
        def print(self, *args: Any, file: Any = None, **kwargs: Any) -> None:
            text = re.sub(r"\[([^\]]+)\]", "", str(args[0]))
            print(text, file=file)

    console = SimpleConsole()

formatters: Dict[str, Callable[[CmdResult, Any, bool], None]] = {}


def register_formatter(command: str, formatter_func: Callable[[CmdResult, Any, bool], None]) -> None:
    """Register a formatter function for a specific command."""
    formatters[command] = formatter_func


def format_and_display_result(result: CmdResult) -> None:
    """Format and display a command result.

    Failed results still go through their formatter when they carry data
    (e.g. a verify run with failing suites), followed by the error message.
    """
    if result.success or result.data:
        formatter = formatters.get(result.command, default_formatter)
        formatter(result, console, RICH_AVAILABLE)
    if not result.success:
        if RICH_AVAILABLE:
            console.print(Text(f"Error: {result.message}", style="bold red"))
        else:
            print(f"Error: {result.message}", file=sys.stderr)


def default_formatter(result: CmdResult, console: Any, rich_available: bool) -> None:
    if rich_available:
        console.print(f"[green]{result.message}[/green]")
        if result.data:
            console.print(json.dumps(result.data, indent=2, default=str))
    else:
        print(result.message)
        if result.data:
            print(json.dumps(result.data, indent=2, default=str))


from activeirs.cli.cmd_single import format_single_result, setup_single_parser  # noqa: E402
from activeirs.cli.cmd_sweep import format_sweep_result, setup_sweep_parser  # noqa: E402
from activeirs.cli.cmd_verify import format_verify_result, setup_verify_parser  # noqa: E402

register_formatter("sweep", format_sweep_result)
register_formatter("single", format_single_result)
register_formatter("verify", format_verify_result)


def is_debug_mode() -> bool:
    """True when ``ACTIVEIRS_CLI_DEBUG`` is set: commands are printed, not run."""
    return os.environ.get("ACTIVEIRS_CLI_DEBUG", "") != ""


class CliParser(argparse.ArgumentParser):
    """Argument parser whose usage errors exit with status 1."""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def setup_parsers() -> argparse.ArgumentParser:
    """Set up the main parser and all subparsers."""
    parser = CliParser(
        prog="activeirs",
        description="Joint BS beamforming and active-IRS design: sweeps, single drops and self-checks.",
        epilog="Set ACTIVEIRS_CLI_DEBUG to print the parsed command instead of running it.",
    )
    parser.add_argument("--version", action="version", version="%(prog)s 0.1.0")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")

    subparsers = parser.add_subparsers(
        title="commands",
        dest="command",
        description="valid commands",
        help="command help",
        required=True,
    )
    setup_sweep_parser(subparsers)
    setup_single_parser(subparsers)
    setup_verify_parser(subparsers)
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    """Main entry point for the CLI."""
    register_all_commands()
    parser = setup_parsers()
    args = parser.parse_args(argv)
    configure_logging(logging.DEBUG if args.verbose else logging.INFO)

    cmd_service = CmdService(SimEnv(os.getcwd()))
    cmd = cmd_factory.create_from_args(args.command, args)
    if cmd is None:
        print(f"Error: Unknown command '{args.command}'", file=sys.stderr)
        sys.exit(EXIT_USAGE)

    if is_debug_mode():
        print(json.dumps(cmd.to_json(), indent=2, default=str))
        return

    cmd_service.add_cmd(cmd)
    for result in cmd_service.execute_all():
        format_and_display_result(result)
        if not result.success:
            sys.exit(result.exit_code or EXIT_RUNTIME)


if __name__ == "__main__":
    main()
