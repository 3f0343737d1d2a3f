"""Causal responsibility ground truth and explainer benchmarking for Boolean formulae."""

__version__ = "0.1.0"
