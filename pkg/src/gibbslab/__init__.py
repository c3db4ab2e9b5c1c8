"""Workbench for cocycles, interactions and specifications on lattice subshifts."""

__version__ = "0.1.0"
