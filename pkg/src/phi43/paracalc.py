"""Bony paraproducts, resonant products, commutators, and the block weight.

With blocks Delta_j from a dyadic partition,

    para(f, g)     = sum_j (sum_{i<=j-2} Delta_i f) Delta_j g        (f low)
    resonant(f, g) = sum_{|i-j|<=1} Delta_i f Delta_j g

and f*g = para(f,g) + para(g,f) + resonant(f,g) exactly on the lattice,
because the index sets partition all block pairs and the partition of unity
telescopes to 1 at every lattice point.  Every block product is a Galerkin
product; block products are summed on the collocation grid and projected
once, which equals the projected block-by-block sum by linearity.
"""

from __future__ import annotations

import numpy as np

from .fourier_core import (
    FourierField,
    ModeLattice,
    from_grid_array,
    gradient_arrays,
    multiply_arrays,
    to_grid_array,
)
from .littlewood_paley import DyadicPartition, partition_for


def _block_grids(lattice: ModeLattice, partition: DyadicPartition, coeffs: np.ndarray):
    """Collocation grids of all blocks: shape (..., n_blocks, M, M, M)."""
    mults = partition.multipliers(lattice)
    stacked = coeffs[..., None, :, :, :] * mults
    return to_grid_array(lattice, stacked)


class BlockGrids:
    """Precomputed block grids of a coefficient stack, reusable across products.

    Paraproduct-type operations accept these wherever they accept coefficient
    arrays; fields entering many products should be decomposed once.
    """

    __slots__ = ("grids",)

    def __init__(self, grids: np.ndarray):
        self.grids = grids


def block_grids(lattice: ModeLattice, partition: DyadicPartition, coeffs: np.ndarray) -> BlockGrids:
    return BlockGrids(_block_grids(lattice, partition, coeffs))


def _grids_of(lattice, partition, x) -> np.ndarray:
    if isinstance(x, BlockGrids):
        return x.grids
    return _block_grids(lattice, partition, x)


def _para_grid(fb: np.ndarray, gb: np.ndarray) -> np.ndarray:
    """Grid of para(f,g) from block grids along axis -4."""
    low = np.cumsum(fb, axis=-4)
    nb = fb.shape[-4]
    out = np.zeros(fb.shape[:-4] + fb.shape[-3:])
    # blocks are indexed 0..nb-1 for j=-1..j_max; j>=1 pairs with cut j-2
    for jx in range(2, nb):
        out += low[..., jx - 2, :, :, :] * gb[..., jx, :, :, :]
    return out


def _resonant_grid(fb: np.ndarray, gb: np.ndarray) -> np.ndarray:
    nb = fb.shape[-4]
    out = np.zeros(fb.shape[:-4] + fb.shape[-3:])
    for jx in range(nb):
        lo, hi = max(0, jx - 1), min(nb, jx + 2)
        out += fb[..., jx, :, :, :] * gb[..., lo:hi, :, :, :].sum(axis=-4)
    return out


def para_arrays(lattice, partition, f, g) -> np.ndarray:
    fb = _grids_of(lattice, partition, f)
    gb = _grids_of(lattice, partition, g)
    return from_grid_array(lattice, _para_grid(fb, gb))


def resonant_arrays(lattice, partition, f, g) -> np.ndarray:
    fb = _grids_of(lattice, partition, f)
    gb = _grids_of(lattice, partition, g)
    return from_grid_array(lattice, _resonant_grid(fb, gb))


def bony_arrays(lattice, partition, f, g):
    """(para(f,g), para(g,f), resonant(f,g)) sharing one block decomposition."""
    fb = _grids_of(lattice, partition, f)
    gb = _grids_of(lattice, partition, g)
    return (
        from_grid_array(lattice, _para_grid(fb, gb)),
        from_grid_array(lattice, _para_grid(gb, fb)),
        from_grid_array(lattice, _resonant_grid(fb, gb)),
    )


def gradient_blocks(lattice, partition, coeffs: np.ndarray) -> tuple[BlockGrids, ...]:
    return tuple(
        block_grids(lattice, partition, d) for d in gradient_arrays(lattice, coeffs)
    )


def inner_para_grad_arrays(lattice, partition, f, g) -> np.ndarray:
    """sum_i para(d_i f, d_i g) for coefficient stacks (or gradient blocks)."""
    df = f if isinstance(f, tuple) else gradient_blocks(lattice, partition, f)
    dg = g if isinstance(g, tuple) else (df if g is f else gradient_blocks(lattice, partition, g))
    out = sum(_para_grid(a.grids, b.grids) for a, b in zip(df, dg))
    return from_grid_array(lattice, out)


def inner_resonant_grad_arrays(lattice, partition, f, g) -> np.ndarray:
    df = f if isinstance(f, tuple) else gradient_blocks(lattice, partition, f)
    dg = g if isinstance(g, tuple) else (df if g is f else gradient_blocks(lattice, partition, g))
    out = sum(_resonant_grid(a.grids, b.grids) for a, b in zip(df, dg))
    return from_grid_array(lattice, out)


def commutator_arrays(lattice, partition, f, g, h) -> np.ndarray:
    """C(f,g,h) = (para(f,g)) resonant h  -  f * (g resonant h)."""
    fb = _grids_of(lattice, partition, f)
    gb = _grids_of(lattice, partition, g)
    hb = _grids_of(lattice, partition, h)
    inner = from_grid_array(lattice, _para_grid(fb, gb))
    first = resonant_arrays(lattice, partition, inner, BlockGrids(hb))
    f_arr = f.grids.sum(axis=-4) if isinstance(f, BlockGrids) else None
    res = from_grid_array(lattice, _resonant_grid(gb, hb))
    if f_arr is not None:
        second = from_grid_array(lattice, f_arr * to_grid_array(lattice, res))
    else:
        second = multiply_arrays(lattice, f, res)
    return first - second


def inner_commutator_grad_arrays(lattice, partition, f, g, h) -> np.ndarray:
    """Gradient-contracted commutator:

    sum_i [(f para d_i g) resonant d_i h] - f * (grad g resonant grad h).
    """
    dg = g if isinstance(g, tuple) else gradient_blocks(lattice, partition, g)
    dh = h if isinstance(h, tuple) else (dg if h is g else gradient_blocks(lattice, partition, h))
    fb = _grids_of(lattice, partition, f)
    first = None
    res = None
    for dgi, dhi in zip(dg, dh):
        inner = from_grid_array(lattice, _para_grid(fb, dgi.grids))
        t1 = _resonant_grid(
            _block_grids(lattice, partition, inner), dhi.grids
        )
        t2 = _resonant_grid(dgi.grids, dhi.grids)
        first = t1 if first is None else first + t1
        res = t2 if res is None else res + t2
    first = from_grid_array(lattice, first)
    res = from_grid_array(lattice, res)
    f_grid = fb.sum(axis=-4)
    second = from_grid_array(lattice, f_grid * to_grid_array(lattice, res))
    return first - second


# ---------------------------------------------------------------------------
# field-level API
# ---------------------------------------------------------------------------

def _pp(f: FourierField, g: FourierField, partition):
    f._compat(g)
    return partition or partition_for(f.lattice)


def para(f: FourierField, g: FourierField, partition: DyadicPartition | None = None) -> FourierField:
    """Low-high paraproduct: f carries the low frequencies."""
    partition = _pp(f, g, partition)
    return FourierField(f.lattice, para_arrays(f.lattice, partition, f.coeffs, g.coeffs), check=False)


def resonant(f: FourierField, g: FourierField, partition: DyadicPartition | None = None) -> FourierField:
    partition = _pp(f, g, partition)
    return FourierField(
        f.lattice, resonant_arrays(f.lattice, partition, f.coeffs, g.coeffs), check=False
    )


def inner_para_grad(
    f: FourierField, g: FourierField, partition: DyadicPartition | None = None
) -> FourierField:
    """sum_i d_i f para d_i g (gradients contracted through the paraproduct)."""
    partition = _pp(f, g, partition)
    return FourierField(
        f.lattice, inner_para_grad_arrays(f.lattice, partition, f.coeffs, g.coeffs), check=False
    )


def inner_resonant_grad(
    f: FourierField, g: FourierField, partition: DyadicPartition | None = None
) -> FourierField:
    partition = _pp(f, g, partition)
    return FourierField(
        f.lattice,
        inner_resonant_grad_arrays(f.lattice, partition, f.coeffs, g.coeffs),
        check=False,
    )


def commutator(
    f: FourierField,
    g: FourierField,
    h: FourierField,
    partition: DyadicPartition | None = None,
) -> FourierField:
    partition = _pp(f, g, partition)
    f._compat(h)
    return FourierField(
        f.lattice,
        commutator_arrays(f.lattice, partition, f.coeffs, g.coeffs, h.coeffs),
        check=False,
    )


def psi_circ(partition: DyadicPartition, k, l) -> float:
    """Resonance weight sum_{|i-j|<=1} rho_i(k) rho_j(l) of a mode pair."""
    rk = np.array([partition.rho(j, np.linalg.norm(k)) for j in partition.js])
    rl = np.array([partition.rho(j, np.linalg.norm(l)) for j in partition.js])
    total = 0.0
    for ix in range(len(rk)):
        lo, hi = max(0, ix - 1), min(len(rl), ix + 2)
        total += rk[ix] * rl[lo:hi].sum()
    return float(total)
