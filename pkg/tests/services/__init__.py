"""Tests for the activeirs services."""
