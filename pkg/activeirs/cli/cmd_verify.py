"""Command module for 'verify' command."""

from typing import Any

from activeirs.cli.options import positive_int, u64
from activeirs.cmds.base_cmd import CmdResult


def setup_verify_parser(subparsers: Any) -> None:
    """Set up the parser for the 'verify' command.

    Args:
        subparsers: The subparsers object from the main parser
    """
    parser = subparsers.add_parser(
        "verify",
        help="Run the numerical self-checks",
        description="Check the PSD embedding, the minorants, the restricted constraints and the block LMI.",
    )
    parser.add_argument(
        "suites",
        metavar="SUITE",
        nargs="*",
        help="Suites to run (default: all)",
    )
    parser.add_argument("--seed", type=u64, metavar="U64", help="Seed of the random instances (default: 0)")
    parser.add_argument("--samples", type=positive_int, metavar="N", help="Samples per suite")


def format_verify_result(result: CmdResult, console: Any, rich_available: bool) -> None:
    """Format the result of the verify command.

    Args:
        result: The CmdResult object to format
        console: The console to print to
        rich_available: Whether Rich is available for enhanced output
    """
    suites = result.data.get("suites", [])
    if rich_available:
        from rich.table import Table

        table = Table(title=result.message)
        table.add_column("Suite", style="cyan")
        table.add_column("Result")
        table.add_column("Samples", justify="right")
        table.add_column("Worst", justify="right")
        table.add_column("Tolerance", justify="right")
        table.add_column("Seconds", justify="right")
        for suite in suites:
            verdict = "[green]pass[/green]" if suite["passed"] else "[bold red]FAIL[/bold red]"
            table.add_row(
                suite["name"],
                verdict,
                str(suite["samples"]),
                f"{suite['worst']:.2e}",
                f"{suite['tolerance']:.0e}",
                f"{suite['seconds']:.2f}",
            )
        console.print(table)
    else:
        print(result.message)
        for suite in suites:
            verdict = "pass" if suite["passed"] else "FAIL"
            print(f"{suite['name']:<16} {verdict:<5} worst={suite['worst']:.2e} tol={suite['tolerance']:.0e}")
