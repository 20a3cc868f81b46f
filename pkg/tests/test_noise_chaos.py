import numpy as np
import pytest

from phi43 import renorm
from phi43.fourier_core import FourierField, hermitian_defect, make_lattice, multiply
from phi43.littlewood_paley import TrajectoryField
from phi43.noise_chaos import (
    HermitianNoise,
    NoiseConfig,
    box_mass,
    build_driving_vector,
    build_integrated,
    chain_statistics,
    integrate_history,
    ou_mode_statistics,
    regularity_report,
    sample_ou,
    wick_cube,
    wick_square,
)
from phi43.rng import mode_ids, normal_pairs
from phi43.semigroups import alpha_on, duhamel, propagate_times

from helpers import rng_for

LAT = make_lattice(4)


def _cfg(**kw):
    base = dict(seed=7, lattice=LAT, dt=5e-3, t_final=0.05, eps=0.1, t_burn=5.0)
    base.update(kw)
    return NoiseConfig(**base)


def test_config_validation():
    with pytest.raises(ValueError):
        _cfg(dt=0.0)
    with pytest.raises(ValueError):
        _cfg(t_burn=2.0)
    with pytest.raises(ValueError):
        _cfg(eps=1.5)


def test_counter_stream_determinism_and_mode_independence():
    ids = mode_ids(np.array([1, -3]), np.array([0, 2]), np.array([2, 1]))
    a0, a1 = normal_pairs(42, 5, ids)
    b0, b1 = normal_pairs(42, 5, ids)
    assert np.array_equal(a0, b0) and np.array_equal(a1, b1)
    c0, _ = normal_pairs(42, 6, ids)
    assert not np.allclose(a0, c0)
    d0, _ = normal_pairs(43, 5, ids)
    assert not np.allclose(a0, d0)


def test_stream_moments_are_standard_normal():
    ids = mode_ids(*np.mgrid[1:21, 0:20, 0:20].reshape(3, -1))
    z0, z1 = normal_pairs(0, 0, ids)
    both = np.concatenate([z0, z1])
    assert abs(np.mean(both)) <= 4.0 / np.sqrt(both.size)
    assert abs(np.var(both) - 1.0) <= 6.0 / np.sqrt(both.size)


def test_hermitian_noise_draw_properties():
    noise = HermitianNoise(3, LAT)
    z = noise.draw(11)
    assert hermitian_defect(z) <= 1e-14
    n = LAT.n_modes
    assert abs(z[n, n, n].imag) == 0.0
    # unit variance per mode over many steps
    samples = np.stack([noise.draw(s) for s in range(250)])
    var = np.mean(np.abs(samples) ** 2, axis=0)
    assert abs(np.mean(var) - 1.0) <= 0.05


def test_sample_ou_deterministic_and_hermitian():
    cfg = _cfg()
    x1 = sample_ou(cfg)
    x2 = sample_ou(cfg)
    assert np.array_equal(x1.coeffs, x2.coeffs)
    assert hermitian_defect(x1.coeffs) <= 1e-12


def test_ou_mode_statistics_within_three_se():
    for k in ((1, 0, 0), (0, 0, 0), (2, 1, 0)):
        stats = ou_mode_statistics(5, LAT, 0.1, k, dt=0.05, n_samples=10_000)
        var = stats["variance"]
        assert abs(var["mean"] - stats["variance_ref"]) <= 3.0 * var["se"]
        for lag in stats["lags"]:
            assert abs(lag["cov"]["mean"] - lag["cov_ref"]) <= 3.0 * lag["cov"]["se"]


def test_wick_square_of_zero_is_negative_constant():
    z = FourierField.zero(LAT)
    w = wick_square(z, 0.7)
    assert abs(w.coeff((0, 0, 0)) + 0.7) <= 1e-15
    assert np.max(np.abs(w.coeffs)) == abs(w.coeff((0, 0, 0)))


def test_wick_cube_of_zero_is_zero():
    z = FourierField.zero(LAT)
    assert np.max(np.abs(wick_cube(z, 0.7).coeffs)) == 0.0


def test_wick_definitions_match_products():
    f = FourierField.mode(LAT, (1, 0, 0), 0.4)
    a = 0.3
    sq = wick_square(f, a)
    ref = multiply(f, f).coeffs.copy()
    ref[LAT.n_modes, LAT.n_modes, LAT.n_modes] -= a
    assert np.allclose(sq.coeffs, ref, atol=1e-15)
    cu = wick_cube(f, a)
    ref3 = multiply(multiply(f, f), f) - 3.0 * a * f
    assert np.allclose(cu.coeffs, ref3.coeffs, atol=1e-15)


def test_integrate_history_zero_source():
    times = np.linspace(-5.0, 0.05, 102)
    src = TrajectoryField.zero(LAT, times)
    cfg = _cfg()
    i0, traj, _ = build_integrated(cfg, src)
    assert np.max(np.abs(i0.coeffs)) == 0.0
    assert np.max(np.abs(traj.coeffs)) == 0.0


def test_integrate_history_constant_source_closed_form():
    from phi43.random_fields import shaped_field

    w = shaped_field(LAT, 0.5, rng_for(0))
    t_burn = 6.0
    times = np.arange(-t_burn, 0.02, 2e-3)
    src = TrajectoryField.constant_in_time(w, times)
    zero_index = int(np.searchsorted(times, 0.0))
    eps = 0.2
    i0, _ = integrate_history(LAT, eps, src, zero_index)
    a = alpha_on(LAT, eps)
    span = times[zero_index] - times[0]
    expected = (1.0 - np.exp(-span * a)) / a * w.coeffs
    scale = np.max(np.abs(w.coeffs))
    assert np.max(np.abs(i0.coeffs - expected)) <= 1e-10 * scale
    # burn-in bias: e^{-alpha t_burn} <= e^{-5} per mode relative to w/alpha
    assert np.max(np.abs(i0.coeffs - w.coeffs / a)) <= np.exp(-5.0) * scale * 1.01


def test_driving_vector_deterministic():
    cfg = _cfg()
    xi1 = build_driving_vector(cfg)
    xi2 = build_driving_vector(cfg)
    for name, comp in xi1.components().items():
        other = getattr(xi2, name if name != "i0" else "i0")
        a = comp.coeffs if hasattr(comp, "coeffs") else comp
        b = other.coeffs if hasattr(other, "coeffs") else other
        assert np.array_equal(a, b), name


def test_driving_vector_mild_identity():
    """I(t) = P_t I(0) + Duhamel[X^2](t) holds exactly by construction."""
    cfg = _cfg()
    xi = build_driving_vector(cfg)
    rhs = propagate_times(xi.i0, xi.times, cfg.eps).coeffs + duhamel(xi.x2, cfg.eps).coeffs
    scale = max(np.max(np.abs(xi.i.coeffs)), 1e-30)
    assert np.max(np.abs(xi.i.coeffs - rhs)) <= 1e-10 * scale


def test_driving_vector_components_consistent():
    from phi43.littlewood_paley import partition_for
    from phi43.paracalc import resonant

    cfg = _cfg()
    xi = build_driving_vector(cfg)
    part = partition_for(LAT)
    i = 3
    c1_ref = resonant(xi.i3.field(i), xi.x.field(i), part).coeffs
    assert np.max(np.abs(xi.c1.coeffs[i] - c1_ref)) <= 1e-12
    c2_ref = resonant(xi.i.field(i), xi.x2.field(i), part).coeffs.copy()
    c2_ref[LAT.n_modes, LAT.n_modes, LAT.n_modes] -= xi.b
    assert np.max(np.abs(xi.c2.coeffs[i] - c2_ref)) <= 1e-12


def test_eps_coupling_shares_noise_stream():
    """Same seed at different eps: the recovered increment stream is identical,
    and pathwise distances to the eps = 0 field decrease with eps."""
    runs = {eps: sample_ou(_cfg(eps=eps)).coeffs for eps in (0.2, 0.1, 0.05, 0.0)}

    def whitened(eps):
        cfg = _cfg(eps=eps)
        a = alpha_on(LAT, eps)
        decay = np.exp(-a * cfg.dt)
        scale = np.sqrt(-np.expm1(-2.0 * a * cfg.dt) * 0.5 / a)
        x = runs[eps]
        return (x[1:] - decay * x[:-1]) / scale

    za = whitened(0.2)
    zb = whitened(0.05)
    assert np.max(np.abs(za - zb)) <= 1e-10  # identical zeta draws

    dists = [np.max(np.abs(runs[eps] - runs[0.0])) for eps in (0.2, 0.1, 0.05)]
    assert dists[0] > dists[1] > dists[2] > 0.0


def test_lattice_refinement_coupling():
    """Modes shared between N and 2N receive identical draws."""
    cfg4 = _cfg()
    cfg8 = _cfg(lattice=make_lattice(8))
    x4 = sample_ou(cfg4)
    x8 = sample_ou(cfg8)
    inner = x8.coeffs[:, 4:13, 4:13, 4:13]
    assert np.max(np.abs(inner - x4.coeffs)) <= 1e-12


def test_chain_statistics_point_variance_and_wick_mean():
    stats = chain_statistics(11, make_lattice(2), 0.1, 2e-3, 5.0, 512)
    pv = stats["point_var"]
    assert abs(pv["mean"] - stats["point_var_ref"]) <= 3.0 * pv["se"]
    x2 = stats["x2_mean"]
    assert abs(x2["mean"]) <= 3.0 * x2["se"]


def test_regularity_report_zero_vector():
    from phi43.noise_chaos import DrivingVector

    xi = DrivingVector.zero(LAT, 0.1, np.linspace(0, 0.01, 3))
    rows = regularity_report(xi, 0.1)
    assert all(row["norm"] == 0.0 for row in rows)


def test_regularity_report_finite_and_positive():
    cfg = _cfg()
    xi = build_driving_vector(cfg)
    rows = regularity_report(xi, 0.1)
    by_comp = {(r["component"], r["space"]): r["norm"] for r in rows}
    assert all(np.isfinite(v) and v >= 0 for v in by_comp.values())
    assert by_comp[("x", "C_T C^-0.6")] > 0


def test_unrenormalized_chain_keeps_mass():
    cfg_raw = _cfg(wick=False)
    xi_raw = build_driving_vector(cfg_raw)
    assert xi_raw.a == 0.0 and xi_raw.b == 0.0
    # raw square carries the mass sum on the zero mode
    a_ref = box_mass(LAT, cfg_raw.eps)
    n = LAT.n_modes
    mean_zero_mode = np.mean(xi_raw.x2.coeffs[:, n, n, n].real)
    assert abs(mean_zero_mode - a_ref) <= 0.5 * a_ref
