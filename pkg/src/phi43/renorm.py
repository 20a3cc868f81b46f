"""Renormalization constants as explicit lattice sums, with tail bounds.

With alpha(k) = 4 pi^2 |k|^2 + eps 16 pi^4 |k|^4 + 1 the three constants are

    a = sum_k 1 / (2 alpha(k))
    b = 2 sum_{k1,k2} 1 / (4 a1 a2 (a1 + a2 + a12))
    c = -2 sum_{k1,k2} 1 / (4 a1 a2 a12 (a1 + a2 + a12))

where a_i = alpha(k_i) and a12 = alpha(k1 + k2).  The pair sums are computed
either directly (small cutoffs) or through the integral representation
1/(a1+a2+a12) = int_0^infty e^{-t(a1+a2+a12)} dt, which factorizes the
summand into a self-convolution evaluated with FFTs; the t-integral is done
with fixed Gauss-Legendre panels shared across eps values, so monotonicity
in eps is preserved term by term.

The `galerkin` cutoff restricts k1 + k2 to the simulation box as well, which
is the variant whose Wick identities hold exactly for the truncated system.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import irfftn, next_fast_len, rfftn

from .semigroups import alpha_sq

# log-spaced time panels: one per decade so every decay-rate class of the
# integrand is resolved by some panel; the [0, T_MIN] strip contributes at
# most F(0) * T_MIN and is dropped.  Slowest rate is exactly 3, so the tail
# beyond T_MAX is ~ e^{-48}.
_T_MIN = 1e-9
_T_MAX = 16.0
_QUAD_ORDER = 13


@dataclass
class RenormConstants:
    eps: float
    n_sum: int
    a: float
    b: float
    c: float
    a_tail: float
    b_tail: float
    c_tail: float
    runtime_s: float


def _alpha_box(eps: float, n: int) -> np.ndarray:
    k = np.arange(-n, n + 1, dtype=np.float64)
    k1, k2, k3 = np.meshgrid(k, k, k, indexing="ij")
    return alpha_sq(eps, k1**2 + k2**2 + k3**2)


def a_const(eps: float, n_sum: int) -> tuple[float, float]:
    """Truncated mass sum and an upper bound on the dropped tail (inf at eps=0)."""
    if n_sum < 0:
        raise ValueError("n_sum must be nonnegative")
    if n_sum == 0:
        value = 0.5
    elif n_sum <= 128:
        value = float(np.sum(0.5 / _alpha_box(eps, n_sum)))
    else:  # chunk over planes to bound memory
        k = np.arange(-n_sum, n_sum + 1, dtype=np.float64)
        k2g, k3g = np.meshgrid(k, k, indexing="ij")
        base = k2g**2 + k3g**2
        value = 0.0
        for k1 in k:
            value += float(np.sum(0.5 / alpha_sq(eps, k1**2 + base)))
    # integral comparison for the dominant quartic part beyond the box
    tail = np.inf if eps == 0.0 else 1.0 / (8.0 * np.pi**3 * eps * max(n_sum, 1))
    return value, tail


def pair_closed_form(eps: float, k1, k2) -> float:
    """Time integral of the squared pair kernel at full contraction:

    int (H_t of the integrated square)^2 ds1 ds2
        = 1 / (4 a1 a2 a12 (a1 + a2 + a12)).
    """
    a1 = float(alpha_sq(eps, float(np.dot(k1, k1))))
    a2 = float(alpha_sq(eps, float(np.dot(k2, k2))))
    k12 = np.add(k1, k2)
    a12 = float(alpha_sq(eps, float(np.dot(k12, k12))))
    return 1.0 / (4.0 * a1 * a2 * a12 * (a1 + a2 + a12))


def _weights_m(kind: str, alpha_m: np.ndarray) -> np.ndarray:
    if kind == "b":
        return np.ones_like(alpha_m)
    if kind == "c":
        return 1.0 / alpha_m
    if kind == "d":  # full contraction of the derivative pair: weight a12 - 1
        return (alpha_m - 1.0) / alpha_m
    raise ValueError(f"unknown pair-sum kind {kind!r}")


def _pair_sum_direct(eps: float, n_sum: int, kind: str, galerkin: bool) -> float:
    n = n_sum
    k = np.arange(-n, n + 1)
    k1, k2, k3 = np.meshgrid(k, k, k, indexing="ij")
    pts = np.stack([k1.ravel(), k2.ravel(), k3.ravel()], axis=1)

    def a_of(q):
        return alpha_sq(eps, np.sum(q * q, axis=-1).astype(np.float64))

    a_all = a_of(pts)
    total = 0.0
    for i in range(len(pts)):
        s = pts[i] + pts
        a12 = a_of(s)
        mask = np.ones(len(pts), dtype=bool)
        if galerkin:
            mask = np.max(np.abs(s), axis=1) <= n
        w = _weights_m(kind, a12)
        total += float(
            np.sum(w[mask] / (4.0 * a_all[i] * a_all[mask] * (a_all[i] + a_all[mask] + a12[mask])))
        )
    return total


def _quad_nodes():
    xs, ws = np.polynomial.legendre.leggauss(_QUAD_ORDER)
    edges = np.geomspace(_T_MIN, _T_MAX, 1 + int(np.ceil(np.log10(_T_MAX / _T_MIN))))
    nodes, weights = [], []
    for lo, hi in zip(edges[:-1], edges[1:]):
        nodes.append(0.5 * (hi - lo) * xs + 0.5 * (hi + lo))
        weights.append(0.5 * (hi - lo) * ws)
    return np.concatenate(nodes), np.concatenate(weights)


@lru_cache(maxsize=64)
def _pair_sums_fft(eps: float, n_sum: int, galerkin: bool) -> dict:
    """All three pair sums over the box at once.

    Uses 1/(a1+a2+a12) = int e^{-t(a1+a2+a12)} dt; at each quadrature node the
    k1-k2 sum factorizes into the self-convolution of g_t(k) = e^{-t a}/(2a),
    evaluated by zero-padded FFT (exact: the padded length covers the full
    convolution support), and contracted against the three m-weights.  At
    each node the box is shrunk to the modes where e^{-t alpha} does not
    underflow, which is exact in double precision and makes the large-t nodes
    nearly free.
    """
    n = n_sum
    alpha_k = _alpha_box(eps, n)
    alpha_m = _alpha_box(eps, 2 * n)
    weights_m = {kind: _weights_m(kind, alpha_m) for kind in ("b", "c", "d")}
    if galerkin:
        mask = np.zeros_like(alpha_m)
        mask[n : 3 * n + 1, n : 3 * n + 1, n : 3 * n + 1] = 1.0
        for kind in weights_m:
            weights_m[kind] = weights_m[kind] * mask

    ts, ws = _quad_nodes()
    totals = {kind: 0.0 for kind in weights_m}
    for t, w in zip(ts, ws):
        # modes with t * alpha > 45 contribute below 3e-20 of the node weight
        limit = 45.0 / t
        if alpha_sq(eps, float(n * n)) <= limit:
            bn = n
        else:
            ks = np.arange(0, n + 1, dtype=np.float64)
            bn = int(np.searchsorted(alpha_sq(eps, ks * ks), limit))
            bn = max(1, min(n, bn))
        pad = next_fast_len(4 * bn + 1, real=True)
        sl_k = slice(n - bn, n + bn + 1)
        sl_m = slice(2 * n - 2 * bn, 2 * n + 2 * bn + 1)
        idx_k = (np.arange(-bn, bn + 1) % pad).astype(np.intp)
        idx_m = (np.arange(-2 * bn, 2 * bn + 1) % pad).astype(np.intp)
        exk = idx_k[:, None, None], idx_k[None, :, None], idx_k[None, None, :]
        exm = idx_m[:, None, None], idx_m[None, :, None], idx_m[None, None, :]
        a_k = alpha_k[sl_k, sl_k, sl_k]
        a_m = alpha_m[sl_m, sl_m, sl_m]
        g_pad = np.zeros((pad, pad, pad))
        g_pad[exk] = np.exp(-t * a_k) / (2.0 * a_k)
        gh = rfftn(g_pad, workers=2)
        conv = irfftn(gh * gh, s=(pad, pad, pad), workers=2)
        conv_m = conv[exm]
        decay_m = np.exp(-t * a_m)
        for kind, w_m in weights_m.items():
            totals[kind] += w * float(np.sum(conv_m * decay_m * w_m[sl_m, sl_m, sl_m]))
    return totals


def _pair_sum(eps: float, n_sum: int, kind: str, galerkin: bool = False) -> float:
    if n_sum <= 5:
        return _pair_sum_direct(eps, max(n_sum, 0), kind, galerkin)
    return _pair_sums_fft(float(eps), int(n_sum), bool(galerkin))[kind]


def _pair_tail(eps: float, n_sum: int) -> float:
    """Upper bound on the pair-sum tail when one index leaves the box.

    Uses summand <= (1/8) (a1 a2)^{-3/2}; finite only for eps > 0, where the
    quartic part makes sum 1/alpha^{3/2} summable.
    """
    if eps == 0.0:
        return np.inf
    wide = 2 * n_sum
    integral_tail = 1.0 / (48.0 * np.pi**5 * eps**1.5 * wide**3)
    s_wide = float(np.sum(_alpha_box(eps, wide) ** -1.5))
    s_in = float(np.sum(_alpha_box(eps, n_sum) ** -1.5))
    s_all = s_wide + integral_tail
    s_out = s_wide - s_in + integral_tail
    return 0.5 * s_out * s_all


def b_const(eps: float, n_sum: int, galerkin: bool = False) -> float:
    """b = 2 sum 1/(4 a1 a2 (a1+a2+a12)) over the box."""
    return 2.0 * _pair_sum(eps, n_sum, "b", galerkin)


def c_const(eps: float, n_sum: int, galerkin: bool = False) -> float:
    """c = -2 sum 1/(4 a1 a2 a12 (a1+a2+a12)); finite limit as eps -> 0."""
    return -2.0 * _pair_sum(eps, n_sum, "c", galerkin)


def derivative_contraction(eps: float, n_sum: int, galerkin: bool = False) -> float:
    """Full contraction of the gradient/bi-gradient pair object; equals b + c."""
    return 2.0 * _pair_sum(eps, n_sum, "d", galerkin)


def compute_constants(eps: float, n_sum: int, galerkin: bool = False) -> RenormConstants:
    t0 = time.perf_counter()
    a, a_tail = a_const(eps, n_sum)
    b = b_const(eps, n_sum, galerkin)
    c = c_const(eps, n_sum, galerkin)
    tail = _pair_tail(eps, n_sum)
    out = RenormConstants(
        eps=eps,
        n_sum=n_sum,
        a=a,
        b=b,
        c=c,
        a_tail=a_tail,
        b_tail=2.0 * tail,
        c_tail=2.0 * tail,
        runtime_s=time.perf_counter() - t0,
    )
    if not (out.a > 0 and out.b > 0 and out.c < 0):
        raise AssertionError("renormalization constants violate their sign invariants")
    if abs(out.c) > out.b:
        raise AssertionError("|c| <= b violated")
    return out


# ---------------------------------------------------------------------------
# chaos kernels
# ---------------------------------------------------------------------------

def q0_kernel(eps: float, sigma: float, k) -> complex:
    """Space-time propagator kernel 1 / (-2 pi i sigma + alpha(k))."""
    a = float(alpha_sq(eps, float(np.dot(k, k))))
    return 1.0 / (-2j * np.pi * sigma + a)


def h_kernel(eps: float, t: float, s, k) -> np.ndarray:
    """Retarded kernel 1_{s<=t} e^{-(t-s) alpha(k)}."""
    a = float(alpha_sq(eps, float(np.dot(k, k))))
    s = np.asarray(s, dtype=np.float64)
    return np.where(s <= t, np.exp(-(t - s) * a), 0.0)
