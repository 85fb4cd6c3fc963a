"""Damped quantum spin dynamics simulator."""

__version__ = "0.1.0"
