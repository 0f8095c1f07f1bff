"""Gamification engine for scripted GUI testing."""

__version__ = "0.1.0"
