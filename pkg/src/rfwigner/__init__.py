"""Homodyne trajectory simulation, maximum-likelihood tomography and Wigner
negativity of resonance fluorescence from a two-level atom in a waveguide."""

__version__ = "0.1.0"
