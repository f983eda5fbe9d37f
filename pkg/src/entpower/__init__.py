"""Entangling power of two-qubit gates on mixed separable states."""

__version__ = "0.1.0"
