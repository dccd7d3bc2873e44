"""Transverse-field Ising networks on planar cubic graphs."""

__version__ = "0.1.0"
