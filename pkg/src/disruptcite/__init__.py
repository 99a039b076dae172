"""Disruptive-citation metrics over citation graphs."""

__version__ = "0.1.0"
