"""Simulation and analysis of entangled vector-vortex photon pairs."""

__version__ = "0.1.0"
