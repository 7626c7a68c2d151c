"""Finite-dimensional noncommutative L^p spaces and their isometries."""

__version__ = "0.1.0"
