"""Broombridge-driven simulation of phase estimation for molecular Hamiltonians."""

__version__ = "0.1.0"
