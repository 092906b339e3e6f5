"""Command module for 'single' command."""

from typing import Any

from activeirs.cli.options import add_common_arguments
from activeirs.cmds.base_cmd import CmdResult


def setup_single_parser(subparsers: Any) -> None:
    """Set up the parser for the 'single' command.

    Args:
        subparsers: The subparsers object from the main parser
    """
    parser = subparsers.add_parser(
        "single",
        help="Optimise one drop",
        description="Run the proposed design on one drop and print its feasibility report and trace.",
    )
    add_common_arguments(parser)
    parser.add_argument(
        "--drop", "-d",
        type=int,
        default=0,
        metavar="INDEX",
        help="Drop index within the seed stream (default: 0)",
    )
    parser.add_argument(
        "--trace-out",
        dest="trace_out",
        metavar="PATH",
        help="Write the convergence trace as CSV",
    )
    parser.add_argument(
        "--dump-problem",
        dest="dump_problem",
        metavar="PATH",
        help="Write the standard-form data of the first convex subproblem",
    )


def format_single_result(result: CmdResult, console: Any, rich_available: bool) -> None:
    """Format the result of the single command.

    Args:
        result: The CmdResult object to format
        console: The console to print to
        rich_available: Whether Rich is available for enhanced output
    """
    data = result.data
    unit = "dB" if data.get("sinr_units") == "db" else ""
    sinr = ", ".join(f"{s:.3f}{unit}" for s in data.get("sinr", []))
    if rich_available:
        from rich.panel import Panel
        from rich.table import Table

        lines = [
            f"channel hash  {data.get('channel_hash', '')[:16]}",
            f"feasible      {data.get('feasible')}",
            f"BS power      {data.get('bs_power_dbm', float('nan')):.3f} dBm",
            f"IRS power     {data.get('irs_power_w', float('nan')):.4g} W",
            f"SINR          {sinr}",
            f"stop reason   {data.get('stop_reason')} (result: {data.get('selected')})",
        ]
        if data.get("no_irs_power_dbm") is not None:
            lines.append(f"no-IRS power  {data['no_irs_power_dbm']:.3f} dBm")
        console.print(Panel("\n".join(lines), title=result.message))

        table = Table(title="IA trace")
        table.add_column("Iter", justify="right", style="cyan")
        table.add_column("Σ Tr(W) (W)", justify="right", style="green")
        table.add_column("Violation", justify="right")
        table.add_column("Status", style="magenta")
        table.add_column("Seconds", justify="right")
        for row in data.get("trace", []):
            table.add_row(
                str(row["iteration"]),
                f"{row['objective_W']:.6g}",
                f"{row['max_violation']:.2e}",
                row["solver_status"],
                f"{row['seconds']:.3f}",
            )
        console.print(table)
    else:
        print(result.message)
        print(f"feasible={data.get('feasible')} sinr=[{sinr}] irs_power={data.get('irs_power_w', float('nan')):.4g} W")
        print(f"{'Iter':>4} {'Objective':>14} {'Violation':>10} {'Status':<16} {'Seconds':>8}")
        for row in data.get("trace", []):
            print(
                f"{row['iteration']:>4} {row['objective_W']:>14.6g} {row['max_violation']:>10.2e} "
                f"{row['solver_status']:<16} {row['seconds']:>8.3f}"
            )
