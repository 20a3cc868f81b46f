"""Counter-based Gaussian streams indexed by (seed, time step, mode).

A vectorized Philox4x32-10 generator maps the counter (step, mode_id) and the
64-bit seed key to four 32-bit words, which Box-Muller turns into a pair of
standard normals.  Draws therefore depend only on (seed, step, mode): they are
identical across lattice sizes, regularization parameters, and evaluation
order, which is what makes pathwise-coupled comparisons possible.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint32(0x9E3779B9)
_W1 = np.uint32(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)

_MODE_OFFSET = 512  # supports |k|_inf <= 511 in the N-independent mode index


def mode_ids(k1, k2, k3) -> np.ndarray:
    """Lattice-size-independent packing of integer modes into uint32 ids."""
    for comp in (k1, k2, k3):
        if np.any(np.abs(comp) >= _MODE_OFFSET):
            raise ValueError("mode components exceed the packing range")
    return (
        (np.asarray(k1) + _MODE_OFFSET).astype(np.uint32)
        | ((np.asarray(k2) + _MODE_OFFSET).astype(np.uint32) << np.uint32(10))
        | ((np.asarray(k3) + _MODE_OFFSET).astype(np.uint32) << np.uint32(20))
    )


def _philox4x32(c0, c1, c2, c3, k0, k1, rounds: int = 10):
    c0 = c0.astype(np.uint32).copy()
    c1 = c1.astype(np.uint32).copy()
    c2 = c2.astype(np.uint32).copy()
    c3 = c3.astype(np.uint32).copy()
    key0 = np.asarray(k0, dtype=np.uint32)
    key1 = np.asarray(k1, dtype=np.uint32)
    with np.errstate(over="ignore"):  # key schedule wraps mod 2^32 by design
        for _ in range(rounds):
            p0 = c0.astype(np.uint64) * _M0
            p1 = c2.astype(np.uint64) * _M1
            hi0 = (p0 >> np.uint64(32)).astype(np.uint32)
            lo0 = (p0 & _MASK32).astype(np.uint32)
            hi1 = (p1 >> np.uint64(32)).astype(np.uint32)
            lo1 = (p1 & _MASK32).astype(np.uint32)
            c0, c1, c2, c3 = hi1 ^ c1 ^ key0, lo1, hi0 ^ c3 ^ key1, lo0
            key0 = key0 + _W0
            key1 = key1 + _W1
    return c0, c1, c2, c3


def normal_pairs(seed: int, step: int, ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Two independent standard normals per (seed, step, id)."""
    if step < 0 or step > 0xFFFFFFFF:
        raise ValueError("step index out of the 32-bit counter range")
    ids = np.asarray(ids, dtype=np.uint32)
    c0 = np.full(ids.shape, step, dtype=np.uint32)
    c2 = np.zeros(ids.shape, dtype=np.uint32)
    c3 = np.zeros(ids.shape, dtype=np.uint32)
    seed = int(seed) & 0xFFFFFFFFFFFFFFFF
    w0, w1, _, _ = _philox4x32(c0, ids, c2, c3, seed & 0xFFFFFFFF, (seed >> 32) & 0xFFFFFFFF)
    u = (w0.astype(np.float64) + 0.5) / 2.0**32
    v = (w1.astype(np.float64) + 0.5) / 2.0**32
    r = np.sqrt(-2.0 * np.log(u))
    return r * np.cos(2.0 * np.pi * v), r * np.sin(2.0 * np.pi * v)
