"""Time-sliced Feynman path integral for the Dirac equation on periodic grids."""

__version__ = "0.1.0"
