"""Endgame tablebases, blunder labeling, and human-error analytics."""

__version__ = "0.1.0"
