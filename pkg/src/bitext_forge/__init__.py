"""Parallel-corpus mining, filtering and MT metric toolkit for Indic languages."""

__version__ = "0.1.0"
