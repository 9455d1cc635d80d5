"""Scattering diagrams over quantum torus and Hall algebra coefficients."""

__version__ = "0.1.0"
