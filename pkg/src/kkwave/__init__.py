"""Spectral simulation of wave-packet scattering from complex potentials
under spatially uniform time-dependent forces."""

__version__ = "0.1.0"
