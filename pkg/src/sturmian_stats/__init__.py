"""Recurrence quotients and continuant statistics of random Sturmian words."""

__version__ = "0.1.0"
