"""Workbench for profiling-driven analysis of tiered and pooled memory."""

__version__ = "0.1.0"
