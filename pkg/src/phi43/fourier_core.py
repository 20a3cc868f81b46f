"""Truncated Fourier representation of real fields on the 3-torus.

Fields are represented by their Fourier coefficients on the cubic mode
lattice ``{-N..N}^3`` with the convention

    u(x) = sum_k  c(k) exp(2*pi*i k.x),        c(-k) = conj(c(k)),

so real fields have Hermitian-symmetric coefficient arrays.  Pointwise
products are evaluated on an oversampled collocation grid (dealiased for
quadratic products of band-limited inputs) and projected back onto the
lattice, i.e. all products are Galerkin products.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np
from scipy import fft as _fft

MAGIC = b"PHI3"
FORMAT_VERSION = 1

_TWO_PI = 2.0 * np.pi
_FFT_WORKERS = 2


class ModeLattice:
    """Cubic mode lattice |k|_inf <= N with an oversampled collocation grid.

    Parameters
    ----------
    n_modes : int
        Truncation radius N in the max norm; the lattice holds (2N+1)^3 modes.
    grid_factor : int
        Collocation oversampling ratio.  The default 2 makes quadratic
        products of band-limited fields alias-free, with headroom for the
        cubic nonlinearity evaluated as two successive binary products.
    """

    def __init__(self, n_modes: int, grid_factor: int = 2):
        if n_modes < 1:
            raise ValueError(f"n_modes must be >= 1, got {n_modes}")
        if grid_factor < 2:
            raise ValueError(f"grid_factor must be >= 2, got {grid_factor}")
        self.n_modes = int(n_modes)
        self.grid_factor = int(grid_factor)
        self.size = 2 * self.n_modes + 1
        self.grid_size = self.grid_factor * self.size

        n, m = self.n_modes, self.grid_size
        k = np.arange(-n, n + 1)
        self.k1, self.k2, self.k3 = np.meshgrid(k, k, k, indexing="ij")
        self.k_sq = (self.k1**2 + self.k2**2 + self.k3**2).astype(np.float64)
        self.k_abs = np.sqrt(self.k_sq)

        # positions of lattice modes inside the length-m FFT layout
        self._embed = (k % m).astype(np.intp)
        # half-spectrum slot for k3 = 0..N inside the rfft layout
        self._rfft_len = m // 2 + 1

    @property
    def n_total(self) -> int:
        return self.size**3

    def symbol(self, func) -> np.ndarray:
        """Evaluate a multiplier k -> complex on the whole lattice."""
        vals = np.asarray(func(self.k1, self.k2, self.k3))
        if np.isnan(vals).any():
            raise ValueError("symbol evaluated to NaN on the lattice")
        return vals

    def grad_symbols(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Multipliers of the three partial derivatives, 2*pi*i*k_i."""
        j = 1j * _TWO_PI
        return j * self.k1, j * self.k2, j * self.k3

    def laplace_symbol(self) -> np.ndarray:
        return -4.0 * np.pi**2 * self.k_sq

    def __eq__(self, other):
        return (
            isinstance(other, ModeLattice)
            and self.n_modes == other.n_modes
            and self.grid_factor == other.grid_factor
        )

    def __hash__(self):
        return hash((self.n_modes, self.grid_factor))

    def __repr__(self):
        return f"ModeLattice(n_modes={self.n_modes}, grid_factor={self.grid_factor})"


@dataclass
class RealGrid:
    """Real field values on the uniform collocation grid of the 3-torus."""

    resolution: int
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.resolution,) * 3:
            raise ValueError("grid values must be cubic with the stated resolution")


def make_lattice(n_modes: int, grid_factor: int = 2) -> ModeLattice:
    return ModeLattice(n_modes, grid_factor)


def hermitian_defect(coeffs: np.ndarray) -> float:
    """Max deviation from coeff(-k) == conj(coeff(k)) over the last 3 axes."""
    mirror = np.conj(np.flip(coeffs, axis=(-3, -2, -1)))
    return float(np.max(np.abs(coeffs - mirror)))


def hermitize(coeffs: np.ndarray) -> np.ndarray:
    mirror = np.conj(np.flip(coeffs, axis=(-3, -2, -1)))
    return 0.5 * (coeffs + mirror)


class FourierField:
    """A real field on T^3 stored as lattice Fourier coefficients."""

    def __init__(self, lattice: ModeLattice, coeffs: np.ndarray, check: bool = True):
        coeffs = np.asarray(coeffs, dtype=np.complex128)
        if coeffs.shape != (lattice.size,) * 3:
            raise ValueError(
                f"coefficient array must have shape {(lattice.size,) * 3}, got {coeffs.shape}"
            )
        if check:
            if not np.isfinite(coeffs).all():
                raise ValueError("coefficients contain NaN/Inf")
            scale = max(1.0, float(np.max(np.abs(coeffs))))
            if hermitian_defect(coeffs) > 1e-10 * scale:
                raise ValueError("coefficients are not Hermitian-symmetric")
        self.lattice = lattice
        self.coeffs = coeffs

    @classmethod
    def zero(cls, lattice: ModeLattice) -> "FourierField":
        return cls(lattice, np.zeros((lattice.size,) * 3, dtype=np.complex128), check=False)

    @classmethod
    def constant(cls, lattice: ModeLattice, value: float) -> "FourierField":
        c = np.zeros((lattice.size,) * 3, dtype=np.complex128)
        n = lattice.n_modes
        c[n, n, n] = value
        return cls(lattice, c, check=False)

    @classmethod
    def mode(cls, lattice: ModeLattice, k, value: complex = 1.0) -> "FourierField":
        """Real field value*e_k + conj(value)*e_{-k} (plain value for k=0)."""
        c = np.zeros((lattice.size,) * 3, dtype=np.complex128)
        n = lattice.n_modes
        i, j, l = (int(k[0]) + n, int(k[1]) + n, int(k[2]) + n)
        c[i, j, l] += value
        if k[0] or k[1] or k[2]:
            c[2 * n - i, 2 * n - j, 2 * n - l] += np.conj(value)
        return cls(lattice, c, check=False)

    def coeff(self, k) -> complex:
        n = self.lattice.n_modes
        return complex(self.coeffs[int(k[0]) + n, int(k[1]) + n, int(k[2]) + n])

    def __add__(self, other):
        self._compat(other)
        return FourierField(self.lattice, self.coeffs + other.coeffs, check=False)

    def __sub__(self, other):
        self._compat(other)
        return FourierField(self.lattice, self.coeffs - other.coeffs, check=False)

    def __mul__(self, scalar):
        return FourierField(self.lattice, self.coeffs * float(scalar), check=False)

    __rmul__ = __mul__

    def __neg__(self):
        return FourierField(self.lattice, -self.coeffs, check=False)

    def _compat(self, other):
        if not isinstance(other, FourierField) or other.lattice != self.lattice:
            raise ValueError("fields live on different lattices")


# ---------------------------------------------------------------------------
# transforms (array API: leading batch axes allowed, modes on the last 3 axes)
# ---------------------------------------------------------------------------

def to_grid_array(lattice: ModeLattice, coeffs: np.ndarray) -> np.ndarray:
    """Collocation values of Hermitian coefficient stacks, shape (..., M, M, M)."""
    m = lattice.grid_size
    n = lattice.n_modes
    e = lattice._embed
    spec = np.zeros(coeffs.shape[:-3] + (m, m, lattice._rfft_len), dtype=np.complex128)
    # k3 >= 0 half determines the real field
    i3 = np.arange(0, n + 1)
    spec[..., e[:, None, None], e[None, :, None], i3[None, None, :]] = coeffs[..., :, :, n:]
    return _fft.irfftn(spec, s=(m, m, m), axes=(-3, -2, -1), workers=_FFT_WORKERS) * m**3


def from_grid_array(lattice: ModeLattice, grid: np.ndarray) -> np.ndarray:
    """Lattice coefficients of real grid stacks (Galerkin projection)."""
    m = grid.shape[-1]
    if m < lattice.size:
        raise ValueError(
            f"grid resolution {m} insufficient for lattice with {lattice.size} modes per axis"
        )
    n = lattice.n_modes
    spec = _fft.rfftn(grid, axes=(-3, -2, -1), workers=_FFT_WORKERS) / m**3
    e = (np.arange(-n, n + 1) % m).astype(np.intp)
    i3 = np.arange(0, n + 1)
    pos = spec[..., e[:, None, None], e[None, :, None], i3[None, None, :]]
    out = np.empty(grid.shape[:-3] + (lattice.size,) * 3, dtype=np.complex128)
    out[..., :, :, n:] = pos
    out[..., :, :, :n] = np.conj(np.flip(pos, axis=(-3, -2, -1))[..., :-1])
    return out


def multiply_arrays(lattice: ModeLattice, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Galerkin (dealiased, projected) product of coefficient stacks."""
    ga = to_grid_array(lattice, a)
    gb = to_grid_array(lattice, b)
    return from_grid_array(lattice, ga * gb)


def sup_norm_array(lattice: ModeLattice, coeffs: np.ndarray) -> np.ndarray:
    """max |u| over the collocation grid, per batch entry."""
    g = to_grid_array(lattice, coeffs)
    return np.max(np.abs(g), axis=(-3, -2, -1))


# ---------------------------------------------------------------------------
# field-level operations
# ---------------------------------------------------------------------------

def to_grid(f: FourierField) -> RealGrid:
    scale = max(1.0, float(np.max(np.abs(f.coeffs))))
    if hermitian_defect(f.coeffs) > 1e-10 * scale:
        raise ValueError("field is not Hermitian-symmetric")
    return RealGrid(f.lattice.grid_size, to_grid_array(f.lattice, f.coeffs))


def from_grid(g: RealGrid, lattice: ModeLattice) -> FourierField:
    return FourierField(lattice, from_grid_array(lattice, g.values), check=False)


def multiply(f: FourierField, g: FourierField) -> FourierField:
    f._compat(g)
    return FourierField(f.lattice, multiply_arrays(f.lattice, f.coeffs, g.coeffs), check=False)


def apply_symbol(f: FourierField, symbol) -> FourierField:
    """Fourier multiplier: coeff(k) -> m(k) coeff(k).

    `symbol` is either a callable acting on integer mode arrays (k1, k2, k3)
    or a precomputed lattice-shaped array.
    """
    vals = symbol if isinstance(symbol, np.ndarray) else f.lattice.symbol(symbol)
    if np.isnan(vals).any():
        raise ValueError("symbol contains NaN")
    return FourierField(f.lattice, f.coeffs * vals, check=False)


def sup_norm(f: FourierField) -> float:
    return float(sup_norm_array(f.lattice, f.coeffs))


def gradient_arrays(lattice: ModeLattice, coeffs: np.ndarray) -> tuple[np.ndarray, ...]:
    s1, s2, s3 = lattice.grad_symbols()
    return coeffs * s1, coeffs * s2, coeffs * s3


def laplacian_array(lattice: ModeLattice, coeffs: np.ndarray) -> np.ndarray:
    return coeffs * lattice.laplace_symbol()


def embed(f: FourierField, lattice: ModeLattice) -> FourierField:
    """Embed a field into a larger lattice (zero-padding the new modes)."""
    n0, n1 = f.lattice.n_modes, lattice.n_modes
    if n1 < n0:
        raise ValueError("target lattice is smaller than the source lattice")
    c = np.zeros((lattice.size,) * 3, dtype=np.complex128)
    lo, hi = n1 - n0, n1 + n0 + 1
    c[lo:hi, lo:hi, lo:hi] = f.coeffs
    return FourierField(lattice, c, check=False)


def restrict(f: FourierField, lattice: ModeLattice) -> FourierField:
    """Project a field onto a smaller lattice (drop the outer modes)."""
    n0, n1 = f.lattice.n_modes, lattice.n_modes
    if n1 > n0:
        raise ValueError("target lattice is larger than the source lattice")
    lo, hi = n0 - n1, n0 + n1 + 1
    return FourierField(lattice, f.coeffs[lo:hi, lo:hi, lo:hi].copy(), check=False)


# ---------------------------------------------------------------------------
# binary field dumps
# ---------------------------------------------------------------------------

def save_field(path, f: FourierField) -> None:
    """Write header {PHI3, version, N, grid_factor} + little-endian complex doubles.

    Coefficients are stored in C order over (k1+N, k2+N, k3+N), which is the
    deterministic enumeration order of the lattice.
    """
    header = MAGIC + struct.pack(
        "<III", FORMAT_VERSION, f.lattice.n_modes, f.lattice.grid_factor
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.ascontiguousarray(f.coeffs, dtype="<c16").tobytes())


def load_field(path) -> FourierField:
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"bad magic {magic!r}")
        version, n_modes, grid_factor = struct.unpack("<III", fh.read(12))
        if version != FORMAT_VERSION:
            raise ValueError(f"unsupported format version {version}")
        lattice = ModeLattice(n_modes, grid_factor)
        data = np.frombuffer(fh.read(16 * lattice.n_total), dtype="<c16")
    coeffs = data.reshape((lattice.size,) * 3).astype(np.complex128)
    return FourierField(lattice, coeffs)
