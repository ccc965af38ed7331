"""Quantum periods of Fano manifolds in exact arithmetic."""

__version__ = "0.1.0"
