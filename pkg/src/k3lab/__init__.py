"""Exact verification laboratory for K3 families from five-vertex reflexive polytopes."""

__version__ = "0.1.0"
