"""Seeded sampling of the spectral noise chain and the driving vector.

Per Fourier mode the linear field is a stationary complex Ornstein-Uhlenbeck
process with rate alpha_eps(k) and stationary variance 1/(2 alpha_eps(k)),
advanced by the exact update

    X(t+dt) = e^{-a dt} X(t) + sqrt((1 - e^{-2 a dt}) / (2a)) * zeta,

with zeta a unit complex Gaussian from a counter-based stream keyed by
(seed, step, mode) only.  The same zeta stream drives every regularization
parameter and every lattice size, so runs are pathwise coupled, and it is the
same stream the direct reference solver consumes.

Squares and cubes are Galerkin products with the truncated constants
subtracted (a over the box, b with the box-restricted pair sum), which makes
the Wick identities exact at the simulated cutoff.  Integrated objects use
the exponential integrator over a burn-in history, with bias e^{-alpha T_burn}
per mode.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import renorm
from .fourier_core import (
    FourierField,
    ModeLattice,
    from_grid_array,
    laplacian_array,
    multiply,
    to_grid_array,
)
from .littlewood_paley import (
    TrajectoryField,
    besov_from_sups,
    besov_norm,
    block_sup_matrix,
    partition_for,
    time_holder_norm,
)
from .paracalc import inner_resonant_grad_arrays, resonant_arrays
from .rng import mode_ids, normal_pairs
from .semigroups import _etd_weights, alpha_on

_SEED_STRIDE = 0x9E3779B97F4A7C15  # golden-ratio stride for realization sub-seeds


@dataclass
class NoiseConfig:
    """Parameters of one noise realization."""

    seed: int
    lattice: ModeLattice
    dt: float
    t_final: float
    eps: float
    t_burn: float = 6.0
    wick: bool = True
    burn_max_steps: int = 2000

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError("eps must lie in [0, 1]")
        if self.t_burn < 5.0:
            # slowest mode has rate alpha = 1; any shorter history leaves
            # more than e^{-5} relative bias in the integrated objects
            raise ValueError("t_burn must be at least 5")

    @property
    def n_main(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def n_burn(self) -> int:
        return min(self.burn_max_steps, max(1, math.ceil(self.t_burn / self.dt)))

    @property
    def dt_burn(self) -> float:
        return self.t_burn / self.n_burn

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.n_main + 1) * self.dt


class HermitianNoise:
    """Unit-variance Hermitian Gaussian coefficient arrays per time step."""

    def __init__(self, seed: int, lattice: ModeLattice):
        self.seed = int(seed)
        self.lattice = lattice
        n = lattice.n_modes
        k1, k2, k3 = lattice.k1, lattice.k2, lattice.k3
        canonical = (k1 > 0) | ((k1 == 0) & (k2 > 0)) | ((k1 == 0) & (k2 == 0) & (k3 > 0))
        self._canon = np.flatnonzero(canonical.ravel())
        # full-cube axis reversal maps flat index f to n_total-1-f
        self._mirror = lattice.n_total - 1 - self._canon
        self._zero = np.ravel_multi_index((n, n, n), (lattice.size,) * 3)
        self._ids = mode_ids(
            k1.ravel()[self._canon], k2.ravel()[self._canon], k3.ravel()[self._canon]
        )
        self._zero_id = mode_ids(np.array([0]), np.array([0]), np.array([0]))

    def draw(self, step: int) -> np.ndarray:
        """Hermitian complex normals with E|z(k)|^2 = 1, z(0) real standard."""
        z0, z1 = normal_pairs(self.seed, step, self._ids)
        z = (z0 + 1j * z1) / np.sqrt(2.0)
        out = np.zeros(self.lattice.n_total, dtype=np.complex128)
        out[self._canon] = z
        out[self._mirror] = np.conj(z)
        w0, _ = normal_pairs(self.seed, step, self._zero_id)
        out[self._zero] = w0[0]
        return out.reshape((self.lattice.size,) * 3)


def box_mass(lattice: ModeLattice, eps: float) -> float:
    """Truncated variance sum a = sum_{box} 1/(2 alpha), the Wick-square constant."""
    return float(np.sum(0.5 / alpha_on(lattice, eps)))


def wick_square(f: FourierField, a: float) -> FourierField:
    """Galerkin square with the mass constant removed: f^2 - a."""
    if a < 0:
        raise ValueError("mass constant must be nonnegative")
    out = multiply(f, f)
    n = f.lattice.n_modes
    out.coeffs[n, n, n] -= a
    return out


def wick_cube(f: FourierField, a: float) -> FourierField:
    """Galerkin cube with the mass contraction removed: f^3 - 3 a f."""
    if a < 0:
        raise ValueError("mass constant must be nonnegative")
    sq = multiply(f, f)
    return multiply(sq, f) - 3.0 * a * f


def _wick_powers(lattice: ModeLattice, x: np.ndarray, a: float):
    """(x^2 - a, x^3 - 3 a x) from one collocation pass."""
    g = to_grid_array(lattice, x)
    sq = from_grid_array(lattice, g * g)
    cube = from_grid_array(lattice, to_grid_array(lattice, sq) * g)
    n = lattice.n_modes
    sq[..., n, n, n] -= a
    cube -= 3.0 * a * x
    return sq, cube


@dataclass
class DrivingVector:
    """The eight stochastic inputs of the transformed equation, one realization."""

    lattice: ModeLattice
    eps: float
    seed: int
    a: float
    b: float
    times: np.ndarray
    x: TrajectoryField
    x2: TrajectoryField
    i0: FourierField
    i: TrajectoryField
    i3: TrajectoryField
    c1: TrajectoryField
    c2: TrajectoryField
    c3: TrajectoryField
    d: TrajectoryField
    noise_offset: int = 0
    config: NoiseConfig | None = None

    def components(self) -> dict[str, TrajectoryField | FourierField]:
        return {
            "x": self.x,
            "x2": self.x2,
            "i0": self.i0,
            "i3": self.i3,
            "c1": self.c1,
            "c2": self.c2,
            "c3": self.c3,
            "d": self.d,
        }

    @classmethod
    def zero(cls, lattice: ModeLattice, eps: float, times) -> "DrivingVector":
        z = lambda: TrajectoryField.zero(lattice, times)
        return cls(
            lattice, eps, 0, 0.0, 0.0, np.asarray(times, float),
            z(), z(), FourierField.zero(lattice), z(), z(), z(), z(), z(), z(),
        )


def sample_ou(cfg: NoiseConfig) -> TrajectoryField:
    """Stationary linear field on [0, t_final] (burn-in run internally)."""
    lat = cfg.lattice
    a_arr = alpha_on(lat, cfg.eps)
    noise = HermitianNoise(cfg.seed, lat)
    x = np.sqrt(0.5 / a_arr) * noise.draw(0)
    step = 1
    for dt_phase, n_steps, record in ((cfg.dt_burn, cfg.n_burn, False), (cfg.dt, cfg.n_main, True)):
        decay = np.exp(-a_arr * dt_phase)
        scale = np.sqrt(-np.expm1(-2.0 * a_arr * dt_phase) * 0.5 / a_arr)
        if record:
            out = np.empty((n_steps + 1,) + x.shape, dtype=np.complex128)
            out[0] = x
        for i in range(n_steps):
            x = decay * x + scale * noise.draw(step)
            step += 1
            if record:
                out[i + 1] = x
    return TrajectoryField(lat, cfg.times, out)


def integrate_history(
    lattice: ModeLattice,
    eps: float,
    source: TrajectoryField,
    zero_index: int,
) -> tuple[FourierField, TrajectoryField]:
    """Duhamel integral of a source given with history.

    Starting from zero at the first sample (bias e^{-alpha * history length}),
    returns the integral at the time-origin sample and the trajectory from
    there on; this is the stationary object built by burn-in.
    """
    a_arr = alpha_on(lattice, eps)
    steps = np.diff(source.times)
    acc = np.zeros((lattice.size,) * 3, dtype=np.complex128)
    at_zero = None
    rest = []
    if zero_index == 0:
        at_zero = acc.copy()
        rest.append(acc.copy())
    for i, dt in enumerate(steps):
        decay, w_old, w_new = _etd_weights(a_arr, float(dt))
        acc = decay * acc + w_old * source.coeffs[i] + w_new * source.coeffs[i + 1]
        if i + 1 == zero_index:
            at_zero = acc.copy()
        if i + 1 >= zero_index:
            rest.append(acc.copy())
    times = source.times[zero_index:] - source.times[zero_index]
    return (
        FourierField(lattice, at_zero, check=False),
        TrajectoryField(lattice, times, np.stack(rest)),
    )


def build_integrated(
    cfg: NoiseConfig,
    x2_history: TrajectoryField,
    x3_history: TrajectoryField | None = None,
    zero_index: int | None = None,
):
    """(I(0), I, I3) from Wick-power histories sampled on [-t_burn, t_final]."""
    if zero_index is None:
        zero_index = int(np.searchsorted(x2_history.times, 0.0))
    if x2_history.times[0] > -cfg.t_burn + 1e-12:
        raise ValueError("history too short: must reach back to -t_burn")
    i0, i_traj = integrate_history(cfg.lattice, cfg.eps, x2_history, zero_index)
    i3_traj = None
    if x3_history is not None:
        _, i3_traj = integrate_history(cfg.lattice, cfg.eps, x3_history, zero_index)
    return i0, i_traj, i3_traj


def build_driving_vector(cfg: NoiseConfig, quadratic_only: bool = False) -> DrivingVector:
    """March the noise chain through burn-in and assemble all components.

    With `quadratic_only` the cubic trees (I3 and its resonants) are left as
    zero trajectories; the noise stream consumption is unchanged, so such runs
    stay pathwise coupled with full builds.
    """
    lat = cfg.lattice
    eps = cfg.eps
    a_val = box_mass(lat, eps) if cfg.wick else 0.0
    b_val = renorm.b_const(eps, lat.n_modes, galerkin=True) if cfg.wick else 0.0

    a_arr = alpha_on(lat, eps)
    noise = HermitianNoise(cfg.seed, lat)
    shape = (lat.size,) * 3
    x = np.sqrt(0.5 / a_arr) * noise.draw(0)
    i_acc = np.zeros(shape, dtype=np.complex128)
    w_acc = np.zeros(shape, dtype=np.complex128)
    x2_prev, x3_prev = _wick_powers(lat, x, a_val)

    n_out = cfg.n_main + 1
    xs = np.empty((n_out,) + shape, dtype=np.complex128)
    x2s = np.empty_like(xs)
    i_s = np.empty_like(xs)
    ws = np.zeros_like(xs)
    i0 = None

    step = 1
    for dt_phase, n_steps, record in ((cfg.dt_burn, cfg.n_burn, False), (cfg.dt, cfg.n_main, True)):
        decay = np.exp(-a_arr * dt_phase)
        scale = np.sqrt(-np.expm1(-2.0 * a_arr * dt_phase) * 0.5 / a_arr)
        dcy, w_old, w_new = _etd_weights(a_arr, float(dt_phase))
        if record:
            i0 = FourierField(lat, i_acc.copy(), check=False)
            xs[0], x2s[0], i_s[0] = x, x2_prev, i_acc
            if not quadratic_only:
                ws[0] = w_acc
        for i in range(n_steps):
            x = decay * x + scale * noise.draw(step)
            step += 1
            if quadratic_only:
                g = to_grid_array(lat, x)
                x2 = from_grid_array(lat, g * g)
                x2[lat.n_modes, lat.n_modes, lat.n_modes] -= a_val
                x3 = None
            else:
                x2, x3 = _wick_powers(lat, x, a_val)
            i_acc = dcy * i_acc + w_old * x2_prev + w_new * x2
            if not quadratic_only:
                w_acc = dcy * w_acc + w_old * x3_prev + w_new * x3
                x3_prev = x3
            x2_prev = x2
            if record:
                xs[i + 1], x2s[i + 1], i_s[i + 1] = x, x2, i_acc
                if not quadratic_only:
                    ws[i + 1] = w_acc

    times = cfg.times
    partition = partition_for(lat)
    c1 = np.zeros_like(xs)
    c2 = np.empty_like(xs)
    c3 = np.zeros_like(xs)
    d = np.empty_like(xs)
    n = lat.n_modes
    chunk = max(1, int(1.6e8 / (partition.n_blocks * lat.grid_size**3 * 16)))
    for lo in range(0, n_out, chunk):
        hi = min(lo + chunk, n_out)
        c2[lo:hi] = resonant_arrays(lat, partition, i_s[lo:hi], x2s[lo:hi])
        d[lo:hi] = inner_resonant_grad_arrays(lat, partition, i_s[lo:hi], i_s[lo:hi])
        if eps:
            lap = laplacian_array(lat, i_s[lo:hi])
            d[lo:hi] += eps * resonant_arrays(lat, partition, lap, lap)
        if not quadratic_only:
            c1[lo:hi] = resonant_arrays(lat, partition, ws[lo:hi], xs[lo:hi])
            c3[lo:hi] = (
                resonant_arrays(lat, partition, ws[lo:hi], x2s[lo:hi]) - 3.0 * b_val * xs[lo:hi]
            )
    c2[:, n, n, n] -= b_val
    d[:, n, n, n] -= b_val

    tf = lambda arr: TrajectoryField(lat, times, arr)
    return DrivingVector(
        lattice=lat, eps=eps, seed=cfg.seed, a=a_val, b=b_val, times=times,
        x=tf(xs), x2=tf(x2s), i0=i0, i=tf(i_s), i3=tf(ws),
        c1=tf(c1), c2=tf(c2), c3=tf(c3), d=tf(d),
        noise_offset=cfg.n_burn, config=cfg,
    )


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def regularity_report(xi: DrivingVector, kappa: float) -> list[dict]:
    """Component norms in the spaces of the driving-vector definition."""
    if not 0.0 < kappa < 0.125:
        raise ValueError("kappa must lie in (0, 1/8)")
    part = partition_for(xi.lattice)

    def traj_norm(traj: TrajectoryField, alpha: float) -> float:
        sups = block_sup_matrix(traj.lattice, traj.coeffs, part)
        return float(np.max(besov_from_sups(sups, alpha, part)))

    rows = [
        {"component": "x", "space": f"C_T C^{-0.5 - kappa:g}", "norm": traj_norm(xi.x, -0.5 - kappa)},
        {"component": "x2", "space": f"C_T C^{-1 - kappa:g}", "norm": traj_norm(xi.x2, -1.0 - kappa)},
        {"component": "i0", "space": f"C^{1 - kappa:g}", "norm": besov_norm(xi.i0, 1.0 - kappa, part)},
        {"component": "i3", "space": f"C_T C^{0.5 - kappa:g}", "norm": traj_norm(xi.i3, 0.5 - kappa)},
        {
            "component": "i3",
            "space": f"C_T^{0.25 - kappa / 2:g} Linf",
            "norm": time_holder_norm(xi.i3, 0.25 - kappa / 2.0),
        },
        {"component": "c1", "space": f"C_T C^{-kappa:g}", "norm": traj_norm(xi.c1, -kappa)},
        {"component": "c2", "space": f"C_T C^{-kappa:g}", "norm": traj_norm(xi.c2, -kappa)},
        {"component": "c3", "space": f"C_T C^{-0.5 - kappa:g}", "norm": traj_norm(xi.c3, -0.5 - kappa)},
        {"component": "d", "space": f"C_T C^{-kappa:g}", "norm": traj_norm(xi.d, -kappa)},
    ]
    total = sum(r["norm"] for r in rows)
    rows.append({"component": "total", "space": f"X_T^{kappa:g}", "norm": total})
    return rows


def xi_distance(a: DrivingVector, b: DrivingVector, kappa: float) -> float:
    """Driving-vector distance: sum of component-wise space norms of a - b."""
    if a.lattice != b.lattice or not np.array_equal(a.times, b.times):
        raise ValueError("driving vectors are not comparable")
    part = partition_for(a.lattice)

    def tn(x: TrajectoryField, y: TrajectoryField, alpha: float) -> float:
        sups = block_sup_matrix(a.lattice, x.coeffs - y.coeffs, part)
        return float(np.max(besov_from_sups(sups, alpha, part)))

    total = tn(a.x, b.x, -0.5 - kappa)
    total += tn(a.x2, b.x2, -1.0 - kappa)
    total += besov_norm(a.i0 - b.i0, 1.0 - kappa, part)
    total += tn(a.i3, b.i3, 0.5 - kappa)
    total += time_holder_norm(a.i3 - b.i3, 0.25 - kappa / 2.0)
    total += tn(a.c1, b.c1, -kappa)
    total += tn(a.c2, b.c2, -kappa)
    total += tn(a.c3, b.c3, -0.5 - kappa)
    total += tn(a.d, b.d, -kappa)
    return total


# ---------------------------------------------------------------------------
# Monte-Carlo statistics (vectorized over realizations)
# ---------------------------------------------------------------------------

def realization_seeds(seed: int, n: int) -> np.ndarray:
    return (seed + _SEED_STRIDE * np.arange(1, n + 1, dtype=np.uint64)).astype(np.uint64)


def ou_mode_statistics(
    seed: int,
    lattice: ModeLattice,
    eps: float,
    k,
    dt: float,
    n_samples: int,
    n_lags: int = 3,
    n_steps: int = 4,
):
    """MC stationary variance and lag covariances of one mode vs closed forms.

    Returns dict with means, standard errors, and the exact references
    1/(2 alpha) and e^{-alpha l dt}/(2 alpha).
    """
    from .semigroups import alpha as alpha_vec

    a = float(alpha_vec(eps, np.asarray(k, dtype=float)))
    ids = np.full(n_samples, mode_ids(*[np.array([c]) for c in k])[0], dtype=np.uint32)
    seeds = realization_seeds(seed, n_samples)
    z0, z1 = normal_pairs_multi(seeds, 0, ids)
    x = (z0 + 1j * z1) / np.sqrt(2.0) * np.sqrt(0.5 / a)
    decay = np.exp(-a * dt)
    scale = np.sqrt(-np.expm1(-2.0 * a * dt) * 0.5 / a)
    hist = [x.copy()]
    for s in range(1, n_steps + n_lags + 1):
        w0, w1 = normal_pairs_multi(seeds, s, ids)
        x = decay * x + scale * (w0 + 1j * w1) / np.sqrt(2.0)
        hist.append(x.copy())
    base = hist[n_steps]
    var_samples = np.abs(base) ** 2
    out = {
        "variance": _mc_stat(var_samples),
        "variance_ref": 0.5 / a,
        "lags": [],
    }
    for lag in range(1, n_lags + 1):
        cov_samples = (hist[n_steps + lag] * np.conj(base)).real
        out["lags"].append(
            {"lag": lag, "cov": _mc_stat(cov_samples), "cov_ref": np.exp(-a * lag * dt) * 0.5 / a}
        )
    return out


def normal_pairs_multi(seeds: np.ndarray, step: int, ids: np.ndarray):
    """normal_pairs with one seed per entry (realization batches)."""
    from .rng import _philox4x32

    ids = np.asarray(ids, dtype=np.uint32)
    seeds = np.asarray(seeds, dtype=np.uint64)
    c0 = np.full(ids.shape, step, dtype=np.uint32)
    zeros = np.zeros(ids.shape, dtype=np.uint32)
    w0, w1, _, _ = _philox4x32(
        c0,
        ids,
        zeros,
        zeros,
        (seeds & np.uint64(0xFFFFFFFF)).astype(np.uint32),
        (seeds >> np.uint64(32)).astype(np.uint32),
    )
    u = (w0.astype(np.float64) + 0.5) / 2.0**32
    v = (w1.astype(np.float64) + 0.5) / 2.0**32
    r = np.sqrt(-2.0 * np.log(u))
    return r * np.cos(2.0 * np.pi * v), r * np.sin(2.0 * np.pi * v)


def _mc_stat(samples: np.ndarray) -> dict:
    n = samples.size
    mean = float(np.mean(samples))
    se = float(np.std(samples, ddof=1) / np.sqrt(n))
    return {"mean": mean, "se": se, "n": n}


def chain_statistics(
    seed: int,
    lattice: ModeLattice,
    eps: float,
    dt: float,
    t_burn: float,
    n_realizations: int,
    batch: int = 256,
):
    """MC means of the renormalized quadratic objects at a fixed time.

    Simulates `n_realizations` independent chains through burn-in (vectorized
    in batches), then reports spatial-mean statistics of the Wick square, the
    resonant square counterterm residue, and the derivative object, together
    with their exact references (0, 0, and the box-restricted c).
    """
    a_val = box_mass(lattice, eps)
    b_val = renorm.b_const(eps, lattice.n_modes, galerkin=True)
    c_val = renorm.c_const(eps, lattice.n_modes, galerkin=True)
    a_arr = alpha_on(lattice, eps)
    part = partition_for(lattice)
    n = lattice.n_modes
    n_steps = max(1, math.ceil(t_burn / dt))
    decay = np.exp(-a_arr * dt)
    scale = np.sqrt(-np.expm1(-2.0 * a_arr * dt) * 0.5 / a_arr)
    dcy, w_old, w_new = _etd_weights(a_arr, dt)

    ids_all = None
    x2_means, c2_means, d_means, point_vars = [], [], [], []
    hn = HermitianNoise(seed, lattice)
    canon, mirror, zero = hn._canon, hn._mirror, hn._zero
    ids = hn._ids
    zero_id = hn._zero_id

    for lo in range(0, n_realizations, batch):
        nb = min(batch, n_realizations - lo)
        seeds = realization_seeds(seed, n_realizations)[lo : lo + nb]
        seeds2 = np.repeat(seeds[:, None], len(ids), axis=1)

        def draw(step):
            z0, z1 = normal_pairs_multi(seeds2, step, np.broadcast_to(ids, seeds2.shape))
            z = (z0 + 1j * z1) / np.sqrt(2.0)
            out = np.zeros((nb, lattice.n_total), dtype=np.complex128)
            out[:, canon] = z
            out[:, mirror] = np.conj(z)
            w0, _ = normal_pairs_multi(seeds, step, np.full(nb, zero_id[0]))
            out[:, zero] = w0
            return out.reshape((nb,) + (lattice.size,) * 3)

        x = np.sqrt(0.5 / a_arr) * draw(0)
        i_acc = np.zeros_like(x)
        g = to_grid_array(lattice, x)
        x2 = from_grid_array(lattice, g * g)
        x2[:, n, n, n] -= a_val
        for s in range(1, n_steps + 1):
            x = decay * x + scale * draw(s)
            g = to_grid_array(lattice, x)
            x2_new = from_grid_array(lattice, g * g)
            x2_new[:, n, n, n] -= a_val
            i_acc = dcy * i_acc + w_old * x2 + w_new * x2_new
            x2 = x2_new

        c2 = resonant_arrays(lattice, part, i_acc, x2)
        c2[:, n, n, n] -= b_val
        d = inner_resonant_grad_arrays(lattice, part, i_acc, i_acc)
        if eps:
            lap = laplacian_array(lattice, i_acc)
            d += eps * resonant_arrays(lattice, part, lap, lap)
        d[:, n, n, n] -= b_val
        x2_means.append(x2[:, n, n, n].real)
        c2_means.append(c2[:, n, n, n].real)
        d_means.append(d[:, n, n, n].real)
        point_vars.append(np.mean(to_grid_array(lattice, x) ** 2, axis=(-3, -2, -1)))

    return {
        "x2_mean": _mc_stat(np.concatenate(x2_means)),
        "x2_ref": 0.0,
        "c2_mean": _mc_stat(np.concatenate(c2_means)),
        "c2_ref": 0.0,
        "d_mean": _mc_stat(np.concatenate(d_means)),
        "d_ref": c_val,
        "point_var": _mc_stat(np.concatenate(point_vars)),
        "point_var_ref": a_val,
        "constants": {"a": a_val, "b": b_val, "c": c_val},
    }
