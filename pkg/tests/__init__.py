"""Tests for the activeirs package."""
