"""Command-line interface package for activeirs."""

__all__ = []
