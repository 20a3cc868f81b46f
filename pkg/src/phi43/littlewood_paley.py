"""Dyadic partition of unity, frequency blocks, and Besov/Hoelder norms.

The partition is the usual telescoping construction from a radial cutoff
chi with chi = 1 on the ball of radius 3/4 and chi = 0 outside radius 4/3
(exponential transition in between):

    rho_{-1}(xi) = chi(|xi|),
    rho_j(xi)    = chi(2^{-j-1}|xi|) - chi(2^{-j}|xi|),   j >= 0,

so sum_{j<=J} rho_j(xi) = chi(2^{-J-1}|xi|) = 1 on the ball of radius
(3/4) 2^{J+1}, supp rho_j sits in the annulus 2^j [3/4, 8/3], and blocks two
indices apart have disjoint supports.  Sup norms are evaluated on the
oversampled collocation grid; time suprema over sampled time grids.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .fourier_core import FourierField, ModeLattice, sup_norm_array, to_grid_array

CHI_PLATEAU = 0.75
CHI_SUPPORT = 4.0 / 3.0


def _smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity increasing step: 0 for t<=0, 1 for t>=1."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        a = np.where(t > 0.0, np.exp(-1.0 / np.where(t > 0.0, t, 1.0)), 0.0)
        b = np.where(t < 1.0, np.exp(-1.0 / np.where(t < 1.0, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


class DyadicPartition:
    """Radial dyadic partition of unity {rho_j}, j = -1 .. j_max."""

    def __init__(self, j_max: int):
        if j_max < 1:
            raise ValueError(f"j_max must be >= 1, got {j_max}")
        self.j_max = int(j_max)
        self._mult_cache: dict[tuple[int, int], np.ndarray] = {}

    @property
    def n_blocks(self) -> int:
        return self.j_max + 2

    @property
    def js(self) -> range:
        return range(-1, self.j_max + 1)

    def chi(self, r) -> np.ndarray:
        """Smooth bump: 1 on r<=3/4, exponential transition, 0 on r>=4/3."""
        r = np.asarray(r, dtype=np.float64)
        return _smooth_step((CHI_SUPPORT - r) / (CHI_SUPPORT - CHI_PLATEAU))

    def rho(self, j: int, r) -> np.ndarray:
        if j < -1 or j > self.j_max:
            raise ValueError(f"block index {j} out of range [-1, {self.j_max}]")
        r = np.asarray(r, dtype=np.float64)
        if j == -1:
            return self.chi(r)
        return self.chi(r / 2.0 ** (j + 1)) - self.chi(r / 2.0**j)

    def covers(self, radius: float) -> bool:
        """Whether sum_j rho_j == 1 holds on the ball of this radius."""
        return radius <= CHI_PLATEAU * 2.0 ** (self.j_max + 1)

    def multipliers(self, lattice: ModeLattice) -> np.ndarray:
        """rho_j evaluated on the lattice, shape (j_max+2, size, size, size)."""
        key = (lattice.n_modes, lattice.grid_factor)
        if key not in self._mult_cache:
            out = np.stack([self.rho(j, lattice.k_abs) for j in self.js])
            self._mult_cache[key] = out
        return self._mult_cache[key]


def build_partition(j_max: int) -> DyadicPartition:
    return DyadicPartition(j_max)


def partition_for(lattice: ModeLattice) -> DyadicPartition:
    """Smallest partition that telescopes to 1 on the whole lattice."""
    radius = np.sqrt(3.0) * lattice.n_modes
    j_max = 1
    while not DyadicPartition(j_max).covers(radius):
        j_max += 1
    return DyadicPartition(j_max)


def block(f: FourierField, j: int, partition: DyadicPartition) -> FourierField:
    """Littlewood-Paley block: multiplier rho_j applied to f."""
    mult = partition.multipliers(f.lattice)[j + 1]
    return FourierField(f.lattice, f.coeffs * mult, check=False)


def block_low(f: FourierField, j: int, partition: DyadicPartition) -> FourierField:
    """Low-frequency cut: sum of blocks with index < j."""
    if j < -1 or j > partition.j_max + 1:
        raise ValueError(f"cut index {j} out of range")
    mults = partition.multipliers(f.lattice)
    low = mults[: j + 1].sum(axis=0) if j > -1 else np.zeros_like(mults[0])
    return FourierField(f.lattice, f.coeffs * low, check=False)


# ---------------------------------------------------------------------------
# trajectories
# ---------------------------------------------------------------------------

@dataclass
class TrajectoryField:
    """Time samples of a field: strictly increasing times, one lattice."""

    lattice: ModeLattice
    times: np.ndarray
    coeffs: np.ndarray  # (nt, size, size, size) complex

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=np.float64)
        if self.times.ndim != 1 or len(self.times) == 0:
            raise ValueError("times must be a nonempty 1-d array")
        if len(self.times) > 1 and not np.all(np.diff(self.times) > 0):
            raise ValueError("times must be strictly increasing")
        if self.coeffs.shape != (len(self.times),) + (self.lattice.size,) * 3:
            raise ValueError("coefficient stack shape does not match times/lattice")

    @property
    def n_times(self) -> int:
        return len(self.times)

    def field(self, i: int) -> FourierField:
        return FourierField(self.lattice, self.coeffs[i], check=False)

    def __add__(self, other: "TrajectoryField") -> "TrajectoryField":
        self._compat(other)
        return TrajectoryField(self.lattice, self.times, self.coeffs + other.coeffs)

    def __sub__(self, other: "TrajectoryField") -> "TrajectoryField":
        self._compat(other)
        return TrajectoryField(self.lattice, self.times, self.coeffs - other.coeffs)

    def __mul__(self, scalar) -> "TrajectoryField":
        return TrajectoryField(self.lattice, self.times, self.coeffs * float(scalar))

    __rmul__ = __mul__

    def _compat(self, other):
        if other.lattice != self.lattice or not np.array_equal(other.times, self.times):
            raise ValueError("trajectories are not on a common lattice/time grid")

    @classmethod
    def zero(cls, lattice: ModeLattice, times) -> "TrajectoryField":
        times = np.asarray(times, dtype=np.float64)
        return cls(lattice, times, np.zeros((len(times),) + (lattice.size,) * 3, complex))

    @classmethod
    def constant_in_time(cls, f: FourierField, times) -> "TrajectoryField":
        times = np.asarray(times, dtype=np.float64)
        return cls(f.lattice, times, np.broadcast_to(f.coeffs, (len(times),) + f.coeffs.shape).copy())


# ---------------------------------------------------------------------------
# norms
# ---------------------------------------------------------------------------

def block_sup_matrix(
    lattice: ModeLattice,
    coeffs: np.ndarray,
    partition: DyadicPartition,
    chunk: int | None = None,
) -> np.ndarray:
    """sup-norms of every block of every batch entry, shape (batch..., j_max+2).

    The workhorse of all Besov-type norms: one inverse transform per block
    per batch entry, evaluated in chunks to bound memory.
    """
    mults = partition.multipliers(lattice)
    single = coeffs.ndim == 3
    stack = coeffs[None] if single else coeffs
    nb = stack.shape[0]
    if chunk is None:
        # keep the transient grid stack near 256 MB
        per_entry = partition.n_blocks * lattice.grid_size**3 * 16
        chunk = max(1, int(2.56e8 / per_entry))
    out = np.empty((nb, partition.n_blocks))
    for lo in range(0, nb, chunk):
        hi = min(lo + chunk, nb)
        blocks = stack[lo:hi, None, :, :, :] * mults[None, :, :, :, :]
        out[lo:hi] = sup_norm_array(lattice, blocks)
    return out[0] if single else out


def besov_from_sups(sups: np.ndarray, alpha: float, partition: DyadicPartition) -> np.ndarray:
    js = np.arange(-1, partition.j_max + 1, dtype=np.float64)
    return np.max(sups * 2.0 ** (js * alpha), axis=-1)


def besov_norm(f: FourierField, alpha: float, partition: DyadicPartition | None = None) -> float:
    """Hoelder-Besov norm sup_j 2^{j alpha} ||Delta_j f||_inf."""
    partition = partition or partition_for(f.lattice)
    sups = block_sup_matrix(f.lattice, f.coeffs, partition)
    return float(besov_from_sups(sups, alpha, partition))


def eps_norm(
    f: FourierField,
    alpha: float,
    eps: float,
    kappa: float,
    partition: DyadicPartition | None = None,
) -> float:
    """Weighted norm ||f||_{C^alpha} + eps^{1-kappa/4} ||f||_{C^{alpha+2-kappa}}."""
    _check_eps_kappa(eps, kappa)
    partition = partition or partition_for(f.lattice)
    sups = block_sup_matrix(f.lattice, f.coeffs, partition)
    base = besov_from_sups(sups, alpha, partition)
    if eps == 0.0:
        return float(base)
    extra = besov_from_sups(sups, alpha + 2.0 - kappa, partition)
    return float(base + eps ** (1.0 - kappa / 4.0) * extra)


def eps_norms_from_sups(
    sups: np.ndarray, alpha: float, eps: float, kappa: float, partition: DyadicPartition
) -> np.ndarray:
    base = besov_from_sups(sups, alpha, partition)
    if eps == 0.0:
        return base
    return base + eps ** (1.0 - kappa / 4.0) * besov_from_sups(
        sups, alpha + 2.0 - kappa, partition
    )


def spacetime_norm(
    u: TrajectoryField,
    beta: float,
    alpha: float,
    eps: float,
    kappa: float,
    partition: DyadicPartition | None = None,
    sups: np.ndarray | None = None,
) -> float:
    """Discrete norm of the blow-up space:

    sup_t ||u(t)||_{C^beta} + sup_{t>0} t^{(alpha-beta)/2} ||u(t)||_{C_eps^alpha}.
    """
    if beta > alpha:
        raise ValueError(f"beta={beta} must not exceed alpha={alpha}")
    _check_eps_kappa(eps, kappa)
    partition = partition or partition_for(u.lattice)
    if sups is None:
        sups = block_sup_matrix(u.lattice, u.coeffs, partition)
    first = np.max(besov_from_sups(sups, beta, partition))
    weighted = eps_norms_from_sups(sups, alpha, eps, kappa, partition)
    positive = u.times > 0.0
    second = 0.0
    if positive.any():
        second = np.max(u.times[positive] ** ((alpha - beta) / 2.0) * weighted[positive])
    return float(first + second)


def time_holder_norm(u: TrajectoryField, delta: float, max_samples: int = 48) -> float:
    """max over sampled pairs of ||u(t)-u(s)||_inf / (t-s)^delta."""
    if not 0.0 <= delta <= 1.0:
        raise ValueError(f"delta must lie in [0, 1], got {delta}")
    if u.n_times < 2:
        raise ValueError("need at least two time samples")
    if u.n_times > max_samples:
        idx = np.unique(np.linspace(0, u.n_times - 1, max_samples).round().astype(int))
    else:
        idx = np.arange(u.n_times)
    grids = to_grid_array(u.lattice, u.coeffs[idx])
    times = u.times[idx]
    best = 0.0
    for a in range(len(idx)):
        diff = np.abs(grids[a + 1 :] - grids[a]).max(axis=(-3, -2, -1))
        gaps = times[a + 1 :] - times[a]
        if len(gaps):
            best = max(best, float(np.max(diff / gaps**delta)))
    return best


def _check_eps_kappa(eps: float, kappa: float) -> None:
    if not 0.0 <= eps <= 1.0:
        raise ValueError(f"eps must lie in [0, 1], got {eps}")
    if not 0.0 < kappa < 1.0:
        raise ValueError(f"kappa must lie in (0, 1), got {kappa}")
