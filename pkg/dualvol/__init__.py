"""Dual mixed volumes of star sets and the characterization of positive additive functionals."""

__version__ = "1.0.0"
