"""Sampling of polarization-qubit photons in random linear interferometers."""

__version__ = "0.1.0"
