"""Argument types and options shared by the subcommand parsers."""

import argparse
from typing import Any


def u64(text: str) -> int:
    """argparse type for an unsigned 64-bit seed."""
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid seed '{text}'")
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed {value} is outside [0, 2^64)")
    return value


def positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"invalid integer '{text}'")
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {value}")
    return value


def add_common_arguments(parser: Any) -> None:
    """``--config``, ``--out``, ``--seed`` and ``--sinr-units``."""
    parser.add_argument(
        "--config", "-c",
        metavar="PATH",
        help="Configuration file (key = value, or YAML)",
    )
    parser.add_argument(
        "--out", "-o",
        metavar="PATH",
        help="Output file",
    )
    parser.add_argument(
        "--seed",
        type=u64,
        metavar="U64",
        help="Master seed (overrides the configuration)",
    )
    parser.add_argument(
        "--sinr-units",
        dest="sinr_units",
        choices=("db", "linear"),
        help="Units of SINR values (default: db)",
    )
