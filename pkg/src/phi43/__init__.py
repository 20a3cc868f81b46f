"""Spectral toolkit for the bi-Laplacian-regularized dynamical Phi^4_3 equation on T^3."""

__version__ = "0.1.0"
