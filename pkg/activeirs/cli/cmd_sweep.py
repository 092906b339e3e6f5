"""Command module for 'sweep' command."""

from typing import Any

from activeirs.cli.options import add_common_arguments, positive_int
from activeirs.cmds.base_cmd import CmdResult


def setup_sweep_parser(subparsers: Any) -> None:
    """Set up the parser for the 'sweep' command.

    Args:
        subparsers: The subparsers object from the main parser
    """
    parser = subparsers.add_parser(
        "sweep",
        help="Run a Monte Carlo sweep",
        description="Sweep the SINR target, the IRS size or the IRS power budget over random drops.",
    )
    add_common_arguments(parser)
    parser.add_argument(
        "--drops", "-n",
        type=positive_int,
        metavar="N",
        help="Drops per swept value (overrides the configuration)",
    )
    parser.add_argument(
        "--workers", "-j",
        type=positive_int,
        metavar="N",
        help="Worker processes (results do not depend on this)",
    )


def _fmt(value: Any, spec: str = ".2f") -> str:
    try:
        if value != value:  # NaN
            return "-"
        return format(value, spec)
    except (TypeError, ValueError):
        return str(value)


def format_sweep_result(result: CmdResult, console: Any, rich_available: bool) -> None:
    """Format the result of the sweep command as a per-cell summary table.

    Args:
        result: The CmdResult object to format
        console: The console to print to
        rich_available: Whether Rich is available for enhanced output
    """
    rows = result.data.get("summary", [])
    parameter = result.data.get("parameter", "value")
    if rich_available:
        from rich.table import Table

        table = Table(title=result.message)
        table.add_column("Scheme", style="cyan")
        table.add_column(parameter, justify="right")
        table.add_column("BS power (dBm)", justify="right", style="green")
        table.add_column("±95%", justify="right")
        table.add_column("EE (bit/J/Hz)", justify="right", style="magenta")
        table.add_column("Outage", justify="right", style="yellow")
        for row in rows:
            table.add_row(
                row["scheme"],
                _fmt(row["value"], "g"),
                _fmt(row["mean_bs_power_dbm"]),
                _fmt(row["ci95_bs_power_db"]),
                _fmt(row["mean_ee_bits_per_j_hz"], ".4g"),
                _fmt(row["outage_rate"], ".0%"),
            )
        console.print(table)
        console.print(f"Summary written to {result.data.get('summary_output')}")
    else:
        print(result.message)
        print(f"{'Scheme':<10} {parameter:>10} {'dBm':>8} {'±95%':>6} {'EE':>10} {'Outage':>7}")
        print("-" * 56)
        for row in rows:
            print(
                f"{row['scheme']:<10} "
                f"{_fmt(row['value'], 'g'):>10} "
                f"{_fmt(row['mean_bs_power_dbm']):>8} "
                f"{_fmt(row['ci95_bs_power_db']):>6} "
                f"{_fmt(row['mean_ee_bits_per_j_hz'], '.4g'):>10} "
                f"{_fmt(row['outage_rate'], '.0%'):>7}"
            )
        print(f"Summary written to {result.data.get('summary_output')}")
