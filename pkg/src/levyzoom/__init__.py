"""Zooming in on Lévy processes: small-time attractors and supremum discretization error."""

__version__ = "0.1.0"
