"""Countermeasure selection by protection level and return on response investment."""

__version__ = "0.1.0"
