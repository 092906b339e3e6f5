"""Configuration for activeirs.

Scenario constants live in the frozen ``SystemConfig`` dataclass; sweep keys
in ``SweepSettings``. ``ConfigFile`` reads a plain-text ``key = value`` file
(or a YAML mapping) and applies ``ACTIVEIRS_<KEY>`` environment overrides.
"""

import dataclasses
import os
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Tuple, get_type_hints

import yaml

from activeirs.core.errors import ConfigError
from activeirs.core.linalg import db_to_linear, dbm_to_watts

SCHEME_NAMES = ("proposed", "baseline1", "baseline2")
SWEEP_PARAMETERS = ("gamma_req", "m", "p_a")


@dataclass(frozen=True)
class SystemConfig:
    """All scenario constants of one simulation point.

    Powers are in watts, SINR targets linear. Defaults reproduce the
    desk-scale power-minimisation scenario (K=3, N_T=4, M=10, 4 dB target,
    10 mW IRS budget).
    """

    n_t: int = 4
    k: int = 3
    m: int = 10
    f_c: float = 2.4e9
    sigma_n2: float = dbm_to_watts(-114.0)
    sigma_d2: float = dbm_to_watts(-100.0)
    sigma_s2: float = 0.0
    alpha_d: float = 3.8
    alpha_r: float = 2.3
    radius: float = 100.0
    rician_factor: float = db_to_linear(3.0)
    gamma_req: float = db_to_linear(4.0)
    p_a: float = 0.01
    epsilon: float = 1e-3
    max_iter: int = 50
    seed: int = 2024
    solver: str = "CLARABEL"
    solver_tol: float = 1e-8
    solver_max_iter: int = 200
    init_margin: float = 0.05
    polish: bool = True
    bound_aux_v: bool = False

    def __post_init__(self) -> None:
        for name in ("n_t", "k", "m", "max_iter", "solver_max_iter"):
            if getattr(self, name) < 1:
                raise ConfigError(f"'{name}' must be >= 1, got {getattr(self, name)}")
        for name in ("f_c", "sigma_n2", "sigma_d2", "radius", "gamma_req", "p_a", "solver_tol"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"'{name}' must be > 0, got {getattr(self, name)}")
        if self.sigma_s2 < 0:
            raise ConfigError(f"'sigma_s2' must be >= 0, got {self.sigma_s2}")
        if self.rician_factor < 0:
            raise ConfigError(f"'rician_factor' must be >= 0, got {self.rician_factor}")
        if not 0 < self.epsilon < 1:
            raise ConfigError(f"'epsilon' must lie in (0, 1), got {self.epsilon}")
        if self.init_margin <= 0:
            raise ConfigError(f"'init_margin' must be > 0, got {self.init_margin}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError(f"'seed' must be an unsigned 64-bit integer, got {self.seed}")

    def replace(self, **changes: Any) -> "SystemConfig":
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True)
class PowerModel:
    """Circuit power model of the energy-efficiency metric.

    Attributes:
        eta: power amplifier efficiency
        p_t: circuit power per BS antenna (W)
        p_c: static BS circuit power (W)
        p_i: circuit power per IRS element (W)
        p_a: IRS power allowance (W); ``None`` takes ``SystemConfig.p_a``
        passive: drop the P_A term (conventional passive IRS accounting)
    """

    eta: float = 0.5
    p_t: float = 0.1
    p_c: float = 0.085
    p_i: float = 0.002
    p_a: Optional[float] = None
    passive: bool = False

    def __post_init__(self) -> None:
        if not 0 < self.eta <= 1:
            raise ConfigError(f"'eta' must lie in (0, 1], got {self.eta}")
        for name in ("p_t", "p_c", "p_i"):
            if getattr(self, name) < 0:
                raise ConfigError(f"'{name}' must be >= 0")
        if self.p_a is not None and self.p_a < 0:
            raise ConfigError("'p_a' must be >= 0")


def check_sweep(
    parameter: str, values: Sequence[float], drops: int, schemes: Sequence[str], workers: int, sinr_units: str
) -> None:
    """Validate the sweep keys shared by ``SweepSettings`` and the sweep runner.

    Raises:
        ConfigError: On the first invalid key
    """
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(f"unknown sweep_parameter '{parameter}' (expected one of {', '.join(SWEEP_PARAMETERS)})")
    if not values:
        raise ConfigError("'values' must list at least one value")
    if drops < 1:
        raise ConfigError("'drops' must be >= 1")
    if not schemes:
        raise ConfigError("'schemes' must list at least one scheme")
    for scheme in schemes:
        if scheme not in SCHEME_NAMES:
            raise ConfigError(f"unknown scheme '{scheme}'")
    if workers < 1:
        raise ConfigError("'workers' must be >= 1")
    if sinr_units not in ("db", "linear"):
        raise ConfigError(f"'sinr_units' must be 'db' or 'linear', got '{sinr_units}'")


@dataclass(frozen=True)
class SweepSettings:
    """Sweep keys of a configuration file."""

    scenario: str = "custom"
    sweep_parameter: str = "gamma_req"
    values: Tuple[float, ...] = (0.0, 2.0, 4.0, 6.0, 8.0)
    drops: int = 100
    schemes: Tuple[str, ...] = SCHEME_NAMES
    output: str = "results.csv"
    workers: int = 1
    sinr_units: str = "db"
    record_timing: bool = False

    def __post_init__(self) -> None:
        check_sweep(self.sweep_parameter, self.values, self.drops, self.schemes, self.workers, self.sinr_units)


def _field_types(cls: type) -> Dict[str, Any]:
    hints = get_type_hints(cls)
    return {f.name: hints[f.name] for f in dataclasses.fields(cls)}


SYSTEM_KEYS = _field_types(SystemConfig)
SWEEP_KEYS = _field_types(SweepSettings)


def _coerce(key: str, value: Any, target: Any) -> Any:
    """Convert a raw config value to the declared field type."""
    try:
        if target is bool:
            if isinstance(value, str):
                value = yaml.safe_load(value)
            if not isinstance(value, bool):
                raise ValueError(f"not a boolean: {value!r}")
            return value
        if target is int:
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(f"not an integer: {value!r}")
            return int(value)
        if target is float:
            return float(value)
        if target is str:
            return str(value)
        if getattr(target, "__origin__", None) is tuple:
            inner = target.__args__[0]
            items = value
            if isinstance(value, str):
                items = [part.strip() for part in value.split(",") if part.strip()]
            elif not isinstance(value, (list, tuple)):
                items = [value]
            return tuple(_coerce(key, item, inner) for item in items)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid value for '{key}': {exc}") from exc
    raise ConfigError(f"unsupported type for '{key}'")


class ConfigFile:
    """Loader for scenario/sweep configuration files.

    Plain-text files hold one ``key = value`` per line; ``#`` starts a comment.
    Files ending in ``.yml``/``.yaml`` are read as a YAML mapping. After the
    file, ``ACTIVEIRS_<KEY>`` environment variables override single keys.
    """

    ENV_PREFIX = "ACTIVEIRS_"

    def __init__(self, config_path: Optional[Path] = None, environ: Optional[Mapping[str, str]] = None):
        """Initialize the loader.

        Args:
            config_path: Optional configuration file; defaults only when None
            environ: Environment mapping used for overrides (default os.environ)
        """
        self._config_path = Path(config_path) if config_path is not None else None
        self._environ = os.environ if environ is None else environ
        self._values = self._load_config()

    def _read_pairs(self, path: Path) -> Dict[str, Any]:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read config file {path}: {exc}") from exc

        if path.suffix in (".yml", ".yaml"):
            data = yaml.safe_load(text) or {}
            if not isinstance(data, dict):
                raise ConfigError(f"{path}: expected a mapping at the top level")
            return {str(k).strip().lower(): v for k, v in data.items()}

        pairs: Dict[str, Any] = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value', got '{raw.strip()}'")
            key, value = (part.strip() for part in line.split("=", 1))
            key = key.lower()
            if key not in SYSTEM_KEYS and key not in SWEEP_KEYS:
                raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
            parsed = yaml.safe_load(value) if value else ""
            pairs[key] = parsed if parsed is not None else value
        return pairs

    def _load_config(self) -> Dict[str, Any]:
        """Load values from the file and the environment."""
        values: Dict[str, Any] = {}
        if self._config_path is not None:
            values.update(self._read_pairs(self._config_path))

        for key in list(SYSTEM_KEYS) + list(SWEEP_KEYS):
            env_key = self.ENV_PREFIX + key.upper()
            if env_key in self._environ:
                values[key] = self._environ[env_key]

        unknown = sorted(k for k in values if k not in SYSTEM_KEYS and k not in SWEEP_KEYS)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        return values

    def get(self, key: str, default: Optional[Any] = None) -> Any:
        """Raw value of a key as read from file/environment."""
        return self._values.get(key, default)

    def system_config(self, **overrides: Any) -> SystemConfig:
        """Build the ``SystemConfig``; keyword overrides win over the file."""
        raw = {k: v for k, v in self._values.items() if k in SYSTEM_KEYS}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        kwargs = {k: _coerce(k, v, SYSTEM_KEYS[k]) for k, v in raw.items()}
        return SystemConfig(**kwargs)

    def sweep_settings(self, **overrides: Any) -> SweepSettings:
        """Build the ``SweepSettings``; keyword overrides win over the file."""
        raw = {k: v for k, v in self._values.items() if k in SWEEP_KEYS}
        raw.update({k: v for k, v in overrides.items() if v is not None})
        kwargs = {k: _coerce(k, v, SWEEP_KEYS[k]) for k, v in raw.items()}
        return SweepSettings(**kwargs)
