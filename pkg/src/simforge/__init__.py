"""Procedural physics scenes, simulated traces and verified QA corpora."""

__version__ = "0.1.0"
