"""Shared test utilities: fitted-constant harness and field generators."""

from __future__ import annotations

import numpy as np

from phi43.fourier_core import FourierField, sup_norm
from phi43.random_fields import decaying_field, shaped_field


def fit_then_assert(ratio_fn, seeds_fit, seeds_check, slack: float = 1.2) -> float:
    """Two-phase constant fit for `lesssim` estimates.

    `ratio_fn(seed)` returns bound_value / norm_product for one random input.
    The constant K is the max over the fit seeds; fresh seeds must stay below
    slack * K.  Returns K.
    """
    k_fit = max(ratio_fn(seed) for seed in seeds_fit)
    for seed in seeds_check:
        value = ratio_fn(seed)
        assert value <= slack * k_fit, (
            f"fitted-constant violation: seed {seed} gives {value:.4g} > "
            f"{slack} * {k_fit:.4g}"
        )
    return k_fit


def normalized_decaying(lattice, rng, amplitude=0.25, decay_rate=1.0) -> FourierField:
    f = decaying_field(lattice, rng, decay_rate=decay_rate, amplitude=amplitude)
    return f * (amplitude / sup_norm(f))


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)
