"""Desk-scale tools for polynomial difference sets: certification, exponential sums, arcs, increments, extremal search."""

__version__ = "0.1.0"
