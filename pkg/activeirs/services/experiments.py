"""Monte Carlo sweeps over the SINR target, the IRS size or the IRS budget.

Each (value, drop) cell draws one geometry and channel realisation from a
child seed of (seed, value index, drop index) and runs every selected scheme
on it, so the schemes are compared on paired draws. Rows are merged in key
order, never arrival order, which keeps the output independent of the worker
count.
"""

import dataclasses
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional, Tuple, Type, Union

import numpy as np
import pandas as pd

from activeirs.core.config import SCHEME_NAMES, PowerModel, SweepSettings, SystemConfig, check_sweep
from activeirs.core.errors import ConfigError, SweepError
from activeirs.core.linalg import db_to_linear
from activeirs.interface.scheme import Scheme
from activeirs.services.baselines import NoIrsScheme, ZfRandomScheme
from activeirs.services.channel_model import draw_drop
from activeirs.services.ia_solver import ProposedScheme
from activeirs.services.problem_core import energy_efficiency

logger = logging.getLogger(__name__)

RESULT_COLUMNS = [
    "scheme",
    "value",
    "drop",
    "seed",
    "channel_hash",
    "bs_power_w",
    "total_power_w",
    "ee_bits_per_j_hz",
    "feasible",
    "iterations",
    "solve_seconds",
]

SUMMARY_COLUMNS = [
    "scheme",
    "value",
    "drops",
    "feasible_drops",
    "outage_rate",
    "mean_bs_power_w",
    "mean_bs_power_dbm",
    "ci95_bs_power_db",
    "mean_total_power_dbm",
    "ci95_total_power_db",
    "mean_ee_bits_per_j_hz",
    "ci95_ee_bits_per_j_hz",
    "mean_iterations",
    "all_outage",
]

FLOAT_FORMAT = "%.9g"
BOOTSTRAP_RESAMPLES = 1000

SCHEMES: Dict[str, Type[Scheme]] = {
    "proposed": ProposedScheme,
    "baseline1": NoIrsScheme,
    "baseline2": ZfRandomScheme,
}


@dataclass(frozen=True)
class SweepSpec:
    """One sweep: a base configuration, the swept key and its values.

    ``values`` are in dB when ``parameter`` is ``gamma_req`` and
    ``sinr_units`` is ``db``; watts for ``p_a``; element counts for ``m``.
    """

    base: SystemConfig
    parameter: str = "gamma_req"
    values: Tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    drops: int = 100
    schemes: Tuple[str, ...] = SCHEME_NAMES
    scenario: str = "custom"
    output: Optional[str] = None
    sinr_units: str = "db"
    workers: int = 1
    record_timing: bool = False
    power_model: PowerModel = field(default_factory=PowerModel)

    def __post_init__(self) -> None:
        check_sweep(self.parameter, self.values, self.drops, self.schemes, self.workers, self.sinr_units)

    @classmethod
    def from_settings(
        cls, settings: SweepSettings, base: SystemConfig, power_model: Optional[PowerModel] = None
    ) -> "SweepSpec":
        return cls(
            base=base,
            parameter=settings.sweep_parameter,
            values=tuple(settings.values),
            drops=settings.drops,
            schemes=tuple(settings.schemes),
            scenario=settings.scenario,
            output=settings.output,
            sinr_units=settings.sinr_units,
            workers=settings.workers,
            record_timing=settings.record_timing,
            power_model=power_model or PowerModel(),
        )

    def config_for(self, value: float) -> SystemConfig:
        """Base configuration with the swept key set to ``value``."""
        if self.parameter == "gamma_req":
            gamma = db_to_linear(value) if self.sinr_units == "db" else float(value)
            return dataclasses.replace(self.base, gamma_req=gamma)
        if self.parameter == "m":
            if float(value) != int(value):
                raise ConfigError(f"IRS element count must be an integer, got {value}")
            return dataclasses.replace(self.base, m=int(value))
        return dataclasses.replace(self.base, p_a=float(value))


def cell_seed(seed: int, value_index: int, drop: int) -> np.random.SeedSequence:
    """Child seed sequence of one (value, drop) cell."""
    return np.random.SeedSequence([int(seed), int(value_index), int(drop)])


def cell_streams(seq: np.random.SeedSequence) -> Tuple[np.random.Generator, Dict[str, np.random.Generator]]:
    children = seq.spawn(1 + len(SCHEME_NAMES))
    channel_rng = np.random.default_rng(children[0])
    # streams keyed by the fixed scheme order, whatever subset is selected
    return channel_rng, {name: np.random.default_rng(child) for name, child in zip(SCHEME_NAMES, children[1:])}


def run_cell(spec: SweepSpec, value_index: int, drop: int) -> List[Dict[str, Any]]:
    """All scheme rows of one (value, drop) cell."""
    value = spec.values[value_index]
    config = spec.config_for(value)
    seq = cell_seed(spec.base.seed, value_index, drop)
    seed = int(seq.generate_state(1, np.uint64)[0])
    channel_rng, rngs = cell_streams(seq)
    _, channels = draw_drop(config, channel_rng)
    digest = channels.digest()

    rows = []
    for name in spec.schemes:
        scheme = SCHEMES[name]()
        row: Dict[str, Any] = {
            "scheme": name,
            "value": float(value),
            "drop": drop,
            "seed": seed,
            "channel_hash": digest,
            "bs_power_w": float("nan"),
            "total_power_w": float("nan"),
            "ee_bits_per_j_hz": float("nan"),
            "feasible": False,
            "iterations": 0,
            "solve_seconds": 0.0,
        }
        start = time.perf_counter()
        try:
            outcome = scheme.solve(channels, config, rngs[name])
        except Exception as exc:  # a failing scheme must not abort the sweep
            logger.error("%s failed on value=%s drop=%d: %s", name, value, drop, exc)
            row["solve_seconds"] = time.perf_counter() - start if spec.record_timing else 0.0
            rows.append(row)
            continue

        row["feasible"] = bool(outcome.feasible)
        row["iterations"] = int(outcome.iterations)
        row["solve_seconds"] = float(outcome.solve_seconds) if spec.record_timing else 0.0
        if outcome.feasible and outcome.solution is not None:
            model = dataclasses.replace(spec.power_model, passive=not scheme.active_irs)
            row["bs_power_w"] = outcome.bs_power
            row["total_power_w"] = outcome.total_power
            row["ee_bits_per_j_hz"] = energy_efficiency(
                channels, outcome.solution, config, model, irs_elements=config.m if scheme.uses_irs else 0
            )
        rows.append(row)
    return rows


def _cell(args: Tuple[SweepSpec, int, int]) -> List[Dict[str, Any]]:
    return run_cell(*args)


class ResultTable:
    """Per-drop sweep results, one row per (scheme, value, drop)."""

    def __init__(self, frame: Optional[pd.DataFrame] = None):
        if frame is None:
            frame = pd.DataFrame(columns=RESULT_COLUMNS)
        self.frame = frame[RESULT_COLUMNS].reset_index(drop=True)

    @classmethod
    def from_rows(cls, rows: List[Dict[str, Any]], scheme_order: Tuple[str, ...] = SCHEME_NAMES) -> "ResultTable":
        if not rows:
            return cls()
        frame = pd.DataFrame(rows, columns=RESULT_COLUMNS)
        rank = {name: idx for idx, name in enumerate(scheme_order)}
        frame["_order"] = frame["scheme"].map(rank)
        frame = frame.sort_values(["_order", "value", "drop"], kind="mergesort").drop(columns="_order")
        return cls(frame)

    def __len__(self) -> int:
        return len(self.frame)

    def write_csv(self, path: Union[str, Path]) -> None:
        write_csv(self.frame, path)


def ensure_writable(path: Union[str, Path]) -> Path:
    """Fail early when an output file cannot be written.

    Raises:
        SweepError: If the parent directory or the file is not writable
    """
    out = Path(path)
    parent = out.parent if str(out.parent) else Path(".")
    try:
        parent.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise SweepError(f"cannot create output directory {parent}: {exc}") from exc
    if out.is_dir():
        raise SweepError(f"output path {out} is a directory")
    if out.exists() and not os.access(out, os.W_OK):
        raise SweepError(f"output file {out} is not writable")
    if not os.access(parent, os.W_OK):
        raise SweepError(f"output directory {parent} is not writable")
    return out


def run_sweep(spec: SweepSpec, progress: Optional[Callable[[int, int], None]] = None) -> ResultTable:
    """Run every (value, drop) cell of a sweep.

    Args:
        progress: Called with (finished cells, total cells)

    Raises:
        SweepError: If ``spec.output`` is set and not writable
    """
    if spec.output:
        ensure_writable(spec.output)
    tasks = [(spec, vi, d) for vi in range(len(spec.values)) for d in range(spec.drops)]
    rows: List[Dict[str, Any]] = []
    logger.info(
        "sweep '%s': %s over %d values x %d drops, schemes %s",
        spec.scenario, spec.parameter, len(spec.values), spec.drops, ",".join(spec.schemes),
    )

    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            for idx, cell_rows in enumerate(pool.map(_cell, tasks)):
                rows.extend(cell_rows)
                if progress:
                    progress(idx + 1, len(tasks))
    else:
        for idx, task in enumerate(tasks):
            rows.extend(_cell(task))
            if progress:
                progress(idx + 1, len(tasks))

    table = ResultTable.from_rows(rows, SCHEME_NAMES)
    if spec.output:
        table.write_csv(spec.output)
    return table


def _bootstrap_half_width(samples: np.ndarray, rng: np.random.Generator, transform: Callable[[np.ndarray], np.ndarray]) -> float:
    if samples.size < 2:
        return 0.0
    idx = rng.integers(0, samples.size, size=(BOOTSTRAP_RESAMPLES, samples.size))
    means = transform(samples[idx].mean(axis=1))
    lo, hi = np.percentile(means, [2.5, 97.5])
    return float((hi - lo) / 2.0)


def _to_dbm(watts: np.ndarray) -> np.ndarray:
    return 10.0 * np.log10(np.asarray(watts) * 1e3)


def aggregate(table: ResultTable, seed: int = 0) -> pd.DataFrame:
    """Per (scheme, value) averages over feasible drops.

    Powers are averaged in watts and then converted to dBm. Half-widths are
    bootstrap 95% intervals (1000 resamples). A cell without feasible drops
    gets NaN statistics, outage rate 1 and ``all_outage`` set.
    """
    rng = np.random.default_rng(seed)
    frame = table.frame
    records = []
    rank = {name: idx for idx, name in enumerate(SCHEME_NAMES)}
    keys = sorted({(s, v) for s, v in zip(frame["scheme"], frame["value"])}, key=lambda sv: (rank.get(sv[0], 99), sv[1]))
    for scheme, value in keys:
        cell = frame[(frame["scheme"] == scheme) & (frame["value"] == value)]
        ok = cell[cell["feasible"].astype(bool)]
        record: Dict[str, Any] = {
            "scheme": scheme,
            "value": float(value),
            "drops": int(len(cell)),
            "feasible_drops": int(len(ok)),
            "outage_rate": 1.0 - len(ok) / len(cell) if len(cell) else float("nan"),
            "all_outage": len(ok) == 0,
        }
        if len(ok) == 0:
            logger.warning("%s at %s: every drop is an outage", scheme, value)
            for col in SUMMARY_COLUMNS:
                record.setdefault(col, float("nan"))
            records.append(record)
            continue
        bs = ok["bs_power_w"].to_numpy(dtype=float)
        total = ok["total_power_w"].to_numpy(dtype=float)
        ee = ok["ee_bits_per_j_hz"].to_numpy(dtype=float)
        record.update(
            {
                "mean_bs_power_w": float(bs.mean()),
                "mean_bs_power_dbm": float(_to_dbm(bs.mean())),
                "ci95_bs_power_db": _bootstrap_half_width(bs, rng, _to_dbm),
                "mean_total_power_dbm": float(_to_dbm(total.mean())),
                "ci95_total_power_db": _bootstrap_half_width(total, rng, _to_dbm),
                "mean_ee_bits_per_j_hz": float(ee.mean()),
                "ci95_ee_bits_per_j_hz": _bootstrap_half_width(ee, rng, lambda x: x),
                "mean_iterations": float(ok["iterations"].mean()),
            }
        )
        records.append(record)
    return pd.DataFrame(records, columns=SUMMARY_COLUMNS)


def write_csv(frame: Union[pd.DataFrame, ResultTable], path: Union[str, Path]) -> None:
    """Write a result or summary table as UTF-8 CSV with 9 significant digits.

    Raises:
        SweepError: If the file cannot be written
    """
    if isinstance(frame, ResultTable):
        frame = frame.frame
    try:
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, encoding="utf-8")
    except OSError as exc:
        raise SweepError(f"cannot write {path}: {exc}") from exc
