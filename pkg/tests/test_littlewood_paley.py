import numpy as np
import pytest

from phi43.fourier_core import FourierField, make_lattice, sup_norm
from phi43.littlewood_paley import (
    DyadicPartition,
    TrajectoryField,
    besov_norm,
    block,
    block_low,
    build_partition,
    eps_norm,
    partition_for,
    spacetime_norm,
    time_holder_norm,
)
from phi43.random_fields import shaped_field

from helpers import fit_then_assert, rng_for

LAT = make_lattice(8)
PART = partition_for(LAT)


def test_partition_of_unity_on_lattice():
    mults = PART.multipliers(LAT)
    assert np.max(np.abs(mults.sum(axis=0) - 1.0)) <= 1e-12


def test_partition_disjoint_supports():
    r = np.linspace(0.0, 2.0**PART.j_max * 3.0, 4001)
    for i in PART.js:
        for j in PART.js:
            if abs(i - j) >= 2:
                assert np.max(PART.rho(i, r) * PART.rho(j, r)) == 0.0


def test_partition_radial_symmetry():
    mults = PART.multipliers(LAT)
    assert np.allclose(mults, np.flip(mults, axis=(1, 2, 3)), atol=0)


def test_partition_block_supports():
    # supp rho_j inside 2^j [3/4, 8/3]
    for j in range(0, PART.j_max + 1):
        r = np.linspace(0, 2.0**j * 4.0, 2000)
        vals = PART.rho(j, r)
        nz = r[vals > 0]
        assert nz.min() >= 2.0**j * 0.75 - 1e-9
        assert nz.max() <= 2.0**j * 8.0 / 3.0 + 1e-9


def test_partition_rejects_small_jmax():
    with pytest.raises(ValueError):
        build_partition(0)


def test_blocks_reconstruct_field():
    f = shaped_field(LAT, 0.2, rng_for(0))
    total = sum(block(f, j, PART).coeffs for j in PART.js)
    assert np.max(np.abs(total - f.coeffs)) <= 1e-12 * np.max(np.abs(f.coeffs))


def test_block_of_single_mode():
    k = (3, 1, 0)
    f = FourierField.mode(LAT, k)
    for j in PART.js:
        expected = PART.rho(j, np.linalg.norm(k))
        assert abs(block(f, j, PART).coeff(k) - expected) <= 1e-13


def test_block_low_definition():
    f = shaped_field(LAT, 0.0, rng_for(1))
    lhs = block_low(f, 2, PART).coeffs
    rhs = sum(block(f, j, PART).coeffs for j in (-1, 0, 1))
    assert np.max(np.abs(lhs - rhs)) <= 1e-14


def test_block_out_of_range():
    f = shaped_field(LAT, 0.0, rng_for(2))
    with pytest.raises((ValueError, IndexError)):
        block(f, PART.j_max + 1, PART)


def test_besov_norm_constant():
    c = FourierField.constant(LAT, 3.0)
    for alpha in (-0.5, 0.0, 1.2):
        assert abs(besov_norm(c, alpha, PART) - 3.0 * 2.0**-alpha) <= 1e-12


def test_besov_norm_zero():
    assert besov_norm(FourierField.zero(LAT), 0.7, PART) == 0.0


def test_besov_norm_single_mode_closed_form():
    k = (5, 0, 0)
    f = FourierField.mode(LAT, k)
    alpha = 0.8
    # the field is 2 cos(2 pi k.x): sup 2 per block weight
    expected = max(
        2.0 * 2.0 ** (j * alpha) * PART.rho(j, np.linalg.norm(k)) for j in PART.js
    )
    got = besov_norm(f, alpha, PART)
    assert abs(got - expected) <= 1e-10 * expected


def test_besov_triangle_inequality():
    rng = rng_for(3)
    f = shaped_field(LAT, 0.3, rng)
    g = shaped_field(LAT, 0.3, rng)
    a = 0.4
    assert besov_norm(f + g, a, PART) <= besov_norm(f, a, PART) + besov_norm(g, a, PART) + 1e-12


def test_besov_blockwise_monotonicity():
    # 2^{j a'} ||block|| <= 2^{j a} ||block|| for j >= 0 and a' <= a
    f = shaped_field(LAT, 0.1, rng_for(4))
    a_hi, a_lo = 0.9, 0.3
    for j in range(0, PART.j_max + 1):
        bn = sup_norm(block(f, j, PART))
        assert 2.0 ** (j * a_lo) * bn <= 2.0 ** (j * a_hi) * bn + 1e-15


def test_eps_norm_reduces_to_besov_at_zero():
    f = shaped_field(LAT, 0.5, rng_for(5))
    assert eps_norm(f, 0.5, 0.0, 0.1, PART) == besov_norm(f, 0.5, PART)


def test_eps_norm_adds_weighted_term_at_one():
    f = shaped_field(LAT, 0.5, rng_for(6))
    kappa = 0.2
    expected = besov_norm(f, 0.5, PART) + besov_norm(f, 2.5 - kappa, PART)
    assert abs(eps_norm(f, 0.5, 1.0, kappa, PART) - expected) <= 1e-11 * expected


def test_eps_norm_matches_recomposition():
    f = shaped_field(LAT, 0.5, rng_for(7))
    eps, kappa, alpha = 0.01, 0.1, 0.5
    expected = besov_norm(f, alpha, PART) + eps ** (1 - kappa / 4) * besov_norm(
        f, alpha + 2 - kappa, PART
    )
    assert abs(eps_norm(f, alpha, eps, kappa, PART) - expected) <= 1e-11 * expected


def test_eps_norm_rejects_bad_parameters():
    f = shaped_field(LAT, 0.5, rng_for(8))
    with pytest.raises(ValueError):
        eps_norm(f, 0.5, -0.1, 0.1, PART)
    with pytest.raises(ValueError):
        eps_norm(f, 0.5, 0.5, 1.5, PART)


def test_spacetime_norm_constant_trajectory():
    f = shaped_field(LAT, 0.5, rng_for(9))
    times = np.linspace(0.0, 1.0, 5)
    u = TrajectoryField.constant_in_time(f, times)
    # beta = alpha, eps = 0: plain sup-in-time Hoelder norm, plus the
    # t^0-weighted second term which equals the same number
    val = spacetime_norm(u, 0.5, 0.5, 0.0, 0.1, PART)
    assert abs(val - 2.0 * besov_norm(f, 0.5, PART)) <= 1e-10


def test_spacetime_norm_zero_trajectory():
    u = TrajectoryField.zero(LAT, np.linspace(0, 1, 4))
    assert spacetime_norm(u, -0.6, 1.3, 0.1, 0.1, PART) == 0.0


def test_spacetime_norm_single_sample_reduction():
    f = shaped_field(LAT, 0.5, rng_for(10))
    t0 = 0.25
    u = TrajectoryField(LAT, np.array([t0]), f.coeffs[None])
    beta, alpha, eps, kappa = -0.6, 1.3, 0.3, 0.1
    expected = besov_norm(f, beta, PART) + t0 ** ((alpha - beta) / 2) * eps_norm(
        f, alpha, eps, kappa, PART
    )
    got = spacetime_norm(u, beta, alpha, eps, kappa, PART)
    assert abs(got - expected) <= 1e-10 * expected


def test_spacetime_norm_rejects_beta_above_alpha():
    u = TrajectoryField.zero(LAT, np.array([0.0, 0.1]))
    with pytest.raises(ValueError):
        spacetime_norm(u, 1.0, 0.5, 0.0, 0.1, PART)


def test_time_holder_constant_trajectory():
    f = shaped_field(LAT, 0.5, rng_for(11))
    u = TrajectoryField.constant_in_time(f, np.linspace(0, 1, 6))
    assert time_holder_norm(u, 0.3) <= 1e-12


def test_time_holder_linear_trajectory():
    f = shaped_field(LAT, 0.5, rng_for(12))
    times = np.linspace(0.0, 1.0, 9)
    u = TrajectoryField(LAT, times, times[:, None, None, None] * f.coeffs)
    assert abs(time_holder_norm(u, 1.0) - sup_norm(f)) <= 1e-9 * sup_norm(f)


def test_time_holder_needs_two_samples():
    f = shaped_field(LAT, 0.5, rng_for(13))
    u = TrajectoryField(LAT, np.array([0.0]), f.coeffs[None])
    with pytest.raises(ValueError):
        time_holder_norm(u, 0.5)


def test_interpolation_weighted_norm_constant():
    """||f||_{C^{alpha + d(2-kappa)}} <= K eps^{-d(1-kappa/4)} ||f||_{C_eps^alpha}."""
    alpha, kappa, delta, eps = -0.5, 0.1, 0.5, 0.05

    def ratio(seed):
        f = shaped_field(LAT, alpha, rng_for(seed))
        lhs = besov_norm(f, alpha + delta * (2 - kappa), PART)
        rhs = eps ** (-delta * (1 - kappa / 4)) * eps_norm(f, alpha, eps, kappa, PART)
        return lhs / rhs

    fit_then_assert(ratio, seeds_fit=range(20, 26), seeds_check=range(40, 46))
