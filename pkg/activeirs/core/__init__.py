"""Core functionality package for activeirs."""

from .config import ConfigFile, PowerModel, SweepSettings, SystemConfig
from .sim_env import SimEnv, configure_logging
from .types import ChannelSet, FeasibilityReport, Geometry, Solution

__all__ = [
    "ChannelSet",
    "ConfigFile",
    "FeasibilityReport",
    "Geometry",
    "PowerModel",
    "SimEnv",
    "Solution",
    "SweepSettings",
    "SystemConfig",
    "configure_logging",
]
