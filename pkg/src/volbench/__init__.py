"""Volumetric quantum benchmarks: QV-k scores for circuit shapes n x n^k."""

__version__ = "0.1.0"
