"""Quaternion Fourier, Wigner and Weyl transforms on discretized grids."""

__version__ = "0.1.0"
