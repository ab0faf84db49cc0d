"""Isospectral partners of the harmonic oscillator from second-order intertwining operators."""

__version__ = "0.1.0"
