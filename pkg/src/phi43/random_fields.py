"""Random band-limited test fields with prescribed spectral shape."""

from __future__ import annotations

import numpy as np

from .fourier_core import FourierField, ModeLattice, hermitize


def shaped_field(lattice: ModeLattice, alpha: float, rng: np.random.Generator) -> FourierField:
    """Gaussian field with coeff(k) ~ |k|_*^{-alpha-3/2}, a typical element of C^alpha."""
    shape = (lattice.size,) * 3
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    weight = (1.0 + lattice.k_abs) ** (-alpha - 1.5)
    return FourierField(lattice, hermitize(z * weight), check=False)


def white_field(lattice: ModeLattice, rng: np.random.Generator) -> FourierField:
    """Unit-variance white coefficients (spatial regularity just below -3/2)."""
    shape = (lattice.size,) * 3
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    return FourierField(lattice, hermitize(z), check=False)


def decaying_field(
    lattice: ModeLattice,
    rng: np.random.Generator,
    decay_rate: float = 1.0,
    amplitude: float = 1.0,
) -> FourierField:
    """Rapidly decaying coefficients ~ amplitude * e^{-decay_rate |k|}.

    The workhorse input of the exact-identity suites: the spectral decay keeps
    truncation spill of iterated products and exponentials below tolerance.
    """
    shape = (lattice.size,) * 3
    z = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    weight = amplitude * np.exp(-decay_rate * lattice.k_abs)
    return FourierField(lattice, hermitize(z * weight), check=False)
