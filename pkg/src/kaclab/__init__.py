"""Simulation and verification tools for one-dimensional inelastic Kac-type kinetic equations."""

__version__ = "0.1.0"
