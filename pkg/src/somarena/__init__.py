"""Structured opponent modeling over causal graphs, with a seeded game harness."""

__version__ = "0.1.0"
