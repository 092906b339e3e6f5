"""Simulation environment shared by the command queue.

``SimEnv`` bundles what a command needs besides its own arguments: the
configuration loader, the output directory and the logging setup.
"""

import logging
import os
from pathlib import Path
from typing import Mapping, Optional

from activeirs.core.config import ConfigFile

RICH_DISABLED = os.environ.get("ACTIVEIRS_NO_RICH", "").lower() in ("1", "true", "yes")

LOG_FORMAT = "%(name)s: %(message)s"


def configure_logging(level: int = logging.INFO, force_plain: bool = False) -> None:
    """Route the ``activeirs`` logger to a rich handler (plain stderr if disabled)."""
    logger = logging.getLogger("activeirs")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)

    handler: logging.Handler
    if not (RICH_DISABLED or force_plain):
        try:
            from rich.logging import RichHandler

            handler = RichHandler(show_path=False, rich_tracebacks=False)
        except ImportError:
            handler = logging.StreamHandler()
    else:
        handler = logging.StreamHandler()

    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    logger.addHandler(handler)
    logger.setLevel(level)
    logger.propagate = False


class SimEnv:
    """Environment a command runs in.

    Args:
        work_dir: Directory relative output paths resolve against
        config_path: Optional configuration file
        environ: Environment mapping for ``ACTIVEIRS_<KEY>`` overrides
    """

    def __init__(
        self,
        work_dir: str,
        config_path: Optional[str] = None,
        environ: Optional[Mapping[str, str]] = None,
    ):
        self.work_dir = Path(work_dir).resolve()
        self.config_path = Path(config_path) if config_path else None
        self._environ = environ
        self._config: Optional[ConfigFile] = None

    @property
    def config(self) -> ConfigFile:
        """Lazily loaded configuration; raises ConfigError on bad input."""
        if self._config is None:
            self._config = ConfigFile(self.config_path, self._environ)
        return self._config

    def with_config(self, config_path: Optional[str]) -> "SimEnv":
        """Copy of this environment reading another configuration file."""
        return SimEnv(str(self.work_dir), config_path, self._environ)

    def resolve_output(self, path: str) -> Path:
        """Absolute output path; parent directories are created."""
        out = Path(path)
        if not out.is_absolute():
            out = self.work_dir / out
        out.parent.mkdir(parents=True, exist_ok=True)
        return out
