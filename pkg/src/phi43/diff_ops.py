"""Second- and fourth-order differential forms and the exact expansion suite.

The building blocks are

    B(f,g)    = grad f . grad g
    Bt(f,g)   = div(Lap f grad g) + div(grad f Lap g) + Lap B(f,g)
    T(f,g,h)  = div(B(f,g) grad h)

together with the corrected Leibniz objects of the regularized operator
L_eps = Lap - eps Lap^2.  Every binary product is Galerkin-projected before
any further differentiation, which makes all operators closed on the lattice;
the exact product/exponential expansion identities then hold up to truncation
spill, so the identity suite feeds rapidly decaying inputs on a working
lattice with headroom and reports residuals.
"""

from __future__ import annotations

import numpy as np

from .fourier_core import (
    FourierField,
    ModeLattice,
    from_grid_array,
    gradient_arrays,
    laplacian_array,
    multiply_arrays,
    to_grid_array,
)

__all__ = [
    "bform",
    "btilde",
    "tform",
    "f_eps",
    "g_eps",
    "g_tilde_eps",
    "product_defect",
    "exp_defect",
    "exp_cross_defect",
    "exp_field",
    "l_eps_array",
    "MasterExpansion",
    "expansion_residual",
    "leibniz_first_slot_residual",
    "leibniz_last_slot_residual",
    "identity_residuals",
]


# ---------------------------------------------------------------------------
# array core
# ---------------------------------------------------------------------------

def bform_arrays(lattice: ModeLattice, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    out = None
    for df, dg in zip(gradient_arrays(lattice, f), gradient_arrays(lattice, g)):
        term = multiply_arrays(lattice, df, dg)
        out = term if out is None else out + term
    return out


def div_vector_arrays(lattice: ModeLattice, comps) -> np.ndarray:
    s1, s2, s3 = lattice.grad_symbols()
    return comps[0] * s1 + comps[1] * s2 + comps[2] * s3


def btilde_arrays(lattice: ModeLattice, f: np.ndarray, g: np.ndarray) -> np.ndarray:
    lap_f = laplacian_array(lattice, f)
    lap_g = laplacian_array(lattice, g)
    t1 = div_vector_arrays(
        lattice, [multiply_arrays(lattice, lap_f, dg) for dg in gradient_arrays(lattice, g)]
    )
    t2 = div_vector_arrays(
        lattice, [multiply_arrays(lattice, df, lap_g) for df in gradient_arrays(lattice, f)]
    )
    t3 = laplacian_array(lattice, bform_arrays(lattice, f, g))
    return t1 + t2 + t3


def tform_arrays(lattice: ModeLattice, f: np.ndarray, g: np.ndarray, h: np.ndarray) -> np.ndarray:
    b = bform_arrays(lattice, f, g)
    return div_vector_arrays(
        lattice, [multiply_arrays(lattice, b, dh) for dh in gradient_arrays(lattice, h)]
    )


def l_eps_array(lattice: ModeLattice, f: np.ndarray, eps: float) -> np.ndarray:
    """Spatial operator L_eps = Lap - eps Lap^2 (no time derivative, no mass)."""
    sym = lattice.laplace_symbol()
    return f * (sym - eps * sym**2)


# ---------------------------------------------------------------------------
# field-level operators
# ---------------------------------------------------------------------------

def _c(f: FourierField, *others) -> ModeLattice:
    for o in others:
        f._compat(o)
    return f.lattice


def bform(f: FourierField, g: FourierField) -> FourierField:
    """B(f,g) = grad f . grad g, Galerkin-projected."""
    lat = _c(f, g)
    return FourierField(lat, bform_arrays(lat, f.coeffs, g.coeffs), check=False)


def btilde(f: FourierField, g: FourierField) -> FourierField:
    lat = _c(f, g)
    return FourierField(lat, btilde_arrays(lat, f.coeffs, g.coeffs), check=False)


def tform(f: FourierField, g: FourierField, h: FourierField) -> FourierField:
    lat = _c(f, g, h)
    return FourierField(lat, tform_arrays(lat, f.coeffs, g.coeffs, h.coeffs), check=False)


def _sq(lattice, x):
    return multiply_arrays(lattice, x, x)


def f_eps(h: FourierField, eps: float) -> FourierField:
    """|grad h|^2 + eps (Lap h)^2 + eps {-Bt(h,h) + 2T(h,h,h) - B(h,h)^2}."""
    lat = h.lattice
    hc = h.coeffs
    out = bform_arrays(lat, hc, hc)
    if eps:
        lap_h = laplacian_array(lat, hc)
        b_hh = bform_arrays(lat, hc, hc)
        out = out + eps * (
            _sq(lat, lap_h)
            - btilde_arrays(lat, hc, hc)
            + 2.0 * tform_arrays(lat, hc, hc, hc)
            - _sq(lat, b_hh)
        )
    return FourierField(lat, out, check=False)


def g_eps(h: FourierField, v: FourierField, eps: float) -> FourierField:
    """grad h . grad v + eps Lap h Lap v + eps {cross correction terms}."""
    lat = _c(h, v)
    out = bform_arrays(lat, h.coeffs, v.coeffs)
    if eps:
        out = out + g_tilde_eps(h, v, eps).coeffs
    return FourierField(lat, out, check=False)


def g_tilde_eps(h: FourierField, v: FourierField, eps: float) -> FourierField:
    """The eps-proportional part of g_eps; identically zero at eps = 0."""
    lat = _c(h, v)
    hc, vc = h.coeffs, v.coeffs
    if eps == 0.0:
        return FourierField(lat, np.zeros_like(hc), check=False)
    lap_h = laplacian_array(lat, hc)
    lap_v = laplacian_array(lat, vc)
    b_hh = bform_arrays(lat, hc, hc)
    b_hv = bform_arrays(lat, hc, vc)
    out = eps * (
        multiply_arrays(lat, lap_h, lap_v)
        - btilde_arrays(lat, hc, vc)
        + 2.0 * tform_arrays(lat, vc, hc, hc)
        + tform_arrays(lat, hc, hc, vc)
        - 2.0 * multiply_arrays(lat, b_hh, b_hv)
    )
    return FourierField(lat, out, check=False)


def product_defect(f: FourierField, g: FourierField, eps: float) -> FourierField:
    """Defect of the Leibniz rule for L_eps on products:

    L_eps(fg) = (L_eps f) g + f (L_eps g) + 2 * product_defect(f, g).
    Equals grad f . grad g + eps Lap f Lap g - eps Bt(f, g).
    """
    lat = _c(f, g)
    out = bform_arrays(lat, f.coeffs, g.coeffs)
    if eps:
        out = out + eps * (
            multiply_arrays(
                lat, laplacian_array(lat, f.coeffs), laplacian_array(lat, g.coeffs)
            )
            - btilde_arrays(lat, f.coeffs, g.coeffs)
        )
    return FourierField(lat, out, check=False)


def exp_defect(h: FourierField, eps: float) -> FourierField:
    """Defect of the chain rule on exponentials:

    L_eps(e^h) = e^h (L_eps h + exp_defect(h)).
    """
    lat = h.lattice
    hc = h.coeffs
    out = product_defect(h, h, eps).coeffs
    if eps:
        out = out - eps * (
            2.0 * tform_arrays(lat, hc, hc, hc) + _sq(lat, bform_arrays(lat, hc, hc))
        )
    return FourierField(lat, out, check=False)


def exp_cross_defect(h: FourierField, g: FourierField, eps: float) -> FourierField:
    """Cross defect A(h, g) = -eps{2T(g,h,h) + T(h,h,g) + 2B(h,h)B(h,g)}."""
    lat = _c(h, g)
    hc, gc = h.coeffs, g.coeffs
    if eps == 0.0:
        return FourierField(lat, np.zeros_like(hc), check=False)
    out = -eps * (
        2.0 * tform_arrays(lat, gc, hc, hc)
        + tform_arrays(lat, hc, hc, gc)
        + 2.0
        * multiply_arrays(lat, bform_arrays(lat, hc, hc), bform_arrays(lat, hc, gc))
    )
    return FourierField(lat, out, check=False)


def exp_field(h: FourierField, scale: float = 1.0) -> FourierField:
    """Galerkin projection of e^{scale*h}: pointwise exponential on the grid.

    The grid evaluation sums the power series to machine precision; the
    projection then keeps the lattice modes, so accuracy is governed by the
    spectral tail of the exponential beyond the lattice.
    """
    g = np.exp(scale * to_grid_array(h.lattice, h.coeffs))
    if not np.isfinite(g).all():
        raise ValueError("exponential overflowed on the grid; field sup norm too large")
    return FourierField(h.lattice, from_grid_array(h.lattice, g), check=False)


# ---------------------------------------------------------------------------
# identity suite
# ---------------------------------------------------------------------------

def _supg(lattice, arr) -> float:
    return float(np.max(np.abs(to_grid_array(lattice, arr))))


def _residual(lattice, lhs, rhs, *scales) -> float:
    denom = max([_supg(lattice, s) for s in scales] + [1e-30])
    return _supg(lattice, lhs - rhs) / denom


class MasterExpansion:
    """Both sides of the master expansion for v = e^h g, split affinely in eps:

    (d/dt - L_eps + 1) v = [(d/dt - L_eps + 1) h] v - h v + e^h (d/dt - L_eps + 1) g
                           + F_eps(h) v - 2 G_eps(h, v)

    with static fields (time derivatives zero).  The eps-independent and
    eps-proportional parts are precomputed as collocation grids, so the
    residual at any eps is a pointwise combination.
    """

    def __init__(self, h: FourierField, g: FourierField):
        lat = _c(h, g)
        hc, gc = h.coeffs, g.coeffs
        eh = exp_field(h).coeffs
        v = multiply_arrays(lat, eh, gc)
        vf = FourierField(lat, v, check=False)
        bisym = lat.laplace_symbol() ** 2

        def cl0(arr):  # -Laplace + 1
            return arr - laplacian_array(lat, arr)

        lhs0 = cl0(v)
        lhs1 = v * bisym
        f0 = f_eps(h, 0.0).coeffs
        f1 = f_eps(h, 1.0).coeffs - f0
        g0 = bform_arrays(lat, hc, v)
        g1 = g_tilde_eps(h, vf, 1.0).coeffs
        rhs0 = (
            multiply_arrays(lat, cl0(hc), v)
            - multiply_arrays(lat, hc, v)
            + multiply_arrays(lat, eh, cl0(gc))
            + multiply_arrays(lat, f0, v)
            - 2.0 * g0
        )
        rhs1 = (
            multiply_arrays(lat, hc * bisym, v)
            + multiply_arrays(lat, eh, gc * bisym)
            + multiply_arrays(lat, f1, v)
            - 2.0 * g1
        )
        self._grids = tuple(
            to_grid_array(lat, arr) for arr in (lhs0, lhs1, rhs0, rhs1)
        )

    def residual(self, eps: float) -> float:
        gl0, gl1, gr0, gr1 = self._grids
        lhs = gl0 + eps * gl1
        rhs = gr0 + eps * gr1
        denom = max(np.max(np.abs(lhs)), np.max(np.abs(rhs)), 1e-30)
        return float(np.max(np.abs(lhs - rhs)) / denom)


def expansion_residual(h: FourierField, g: FourierField, eps: float) -> float:
    """Relative residual of the master expansion at one eps (see MasterExpansion)."""
    return MasterExpansion(h, g).residual(eps)


def leibniz_first_slot_residual(
    f: FourierField, g: FourierField, h: FourierField, k: FourierField
) -> float:
    """Residual of T(fg,h,k) = f T(g,h,k) + g T(f,h,k) + B(f,k)B(g,h) + B(g,k)B(f,h)."""
    lat = _c(f, g, h, k)
    fc, gc, hc, kc = f.coeffs, g.coeffs, h.coeffs, k.coeffs
    lhs = tform_arrays(lat, multiply_arrays(lat, fc, gc), hc, kc)
    rhs = (
        multiply_arrays(lat, fc, tform_arrays(lat, gc, hc, kc))
        + multiply_arrays(lat, gc, tform_arrays(lat, fc, hc, kc))
        + multiply_arrays(lat, bform_arrays(lat, fc, kc), bform_arrays(lat, gc, hc))
        + multiply_arrays(lat, bform_arrays(lat, gc, kc), bform_arrays(lat, fc, hc))
    )
    return _residual(lat, lhs, rhs, lhs, rhs)


def leibniz_last_slot_residual(
    f: FourierField, g: FourierField, h: FourierField, k: FourierField
) -> float:
    """Residual of T(f,g,hk) = h T(f,g,k) + k T(f,g,h) + 2 B(f,g) B(h,k)."""
    lat = _c(f, g, h, k)
    fc, gc, hc, kc = f.coeffs, g.coeffs, h.coeffs, k.coeffs
    lhs = tform_arrays(lat, fc, gc, multiply_arrays(lat, hc, kc))
    rhs = (
        multiply_arrays(lat, hc, tform_arrays(lat, fc, gc, kc))
        + multiply_arrays(lat, kc, tform_arrays(lat, fc, gc, hc))
        + 2.0
        * multiply_arrays(lat, bform_arrays(lat, fc, gc), bform_arrays(lat, hc, kc))
    )
    return _residual(lat, lhs, rhs, lhs, rhs)


def identity_residuals(
    f: FourierField,
    g: FourierField,
    h: FourierField,
    k: FourierField,
    eps: float,
) -> dict[str, float]:
    """Relative residuals of the product/exponential expansion identities.

    Polynomial identities are exact rearrangements of Galerkin products when
    the working lattice has enough headroom; exponential identities carry the
    truncation tail of e^h and want rapidly decaying inputs.
    """
    lat = _c(f, g, h, k)
    fc, gc, hc, kc = f.coeffs, g.coeffs, h.coeffs, k.coeffs

    def lap0(x):
        return l_eps_array(lat, x, 0.0)

    def lape(x):
        return l_eps_array(lat, x, eps)

    def mul(x, y):
        return multiply_arrays(lat, x, y)

    res: dict[str, float] = {}

    # products under the plain Laplacian
    fg = mul(fc, gc)
    lhs = lap0(fg)
    rhs = mul(lap0(fc), gc) + mul(fc, lap0(gc)) + 2.0 * bform_arrays(lat, fc, gc)
    res["product_laplace"] = _residual(lat, lhs, rhs, lhs, rhs)

    eh = exp_field(h).coeffs
    b_hh = bform_arrays(lat, hc, hc)
    lhs = lap0(eh)
    rhs = mul(eh, lap0(hc) + b_hh)
    res["exp_laplace"] = _residual(lat, lhs, rhs, lhs, rhs)

    lhs = lap0(mul(eh, gc))
    rhs = mul(eh, mul(lap0(hc), gc) + lap0(gc) + mul(b_hh, gc) + 2.0 * bform_arrays(lat, hc, gc))
    res["exp_product_laplace"] = _residual(lat, lhs, rhs, lhs, rhs)

    ek = exp_field(k).coeffs
    lhs = bform_arrays(lat, hc, mul(ek, gc))
    rhs = mul(ek, mul(gc, bform_arrays(lat, hc, kc)) + bform_arrays(lat, hc, gc))
    res["gradient_exp_product"] = _residual(lat, lhs, rhs, lhs, rhs)

    # trilinear Leibniz rules
    res["tform_first_slot"] = leibniz_first_slot_residual(f, g, h, k)
    res["tform_last_slot"] = leibniz_last_slot_residual(f, g, h, k)

    # regularized operator
    lhs = lape(fg)
    rhs = mul(lape(fc), gc) + mul(fc, lape(gc)) + 2.0 * product_defect(f, g, eps).coeffs
    res["product_regularized"] = _residual(lat, lhs, rhs, lhs, rhs)

    lhs = lape(eh)
    rhs = mul(eh, lape(hc) + exp_defect(h, eps).coeffs)
    res["exp_regularized"] = _residual(lat, lhs, rhs, lhs, rhs)

    lhs = lape(mul(eh, gc))
    rhs = mul(
        eh,
        mul(lape(hc), gc)
        + lape(gc)
        + 2.0 * product_defect(h, g, eps).coeffs
        + mul(exp_defect(h, eps).coeffs, gc)
        + 2.0 * exp_cross_defect(h, g, eps).coeffs,
    )
    res["exp_product_regularized"] = _residual(lat, lhs, rhs, lhs, rhs)

    lhs = product_defect(FourierField(lat, eh, check=False), g, eps).coeffs
    rhs = mul(eh, product_defect(h, g, eps).coeffs + exp_cross_defect(h, g, eps).coeffs)
    res["defect_exp_factorization"] = _residual(lat, lhs, rhs, lhs, rhs)

    # master expansion for v = e^h g
    v = mul(eh, gc)
    lhs = lape(v)
    rhs = (
        mul(lape(hc), v)
        + mul(eh, lape(gc))
        - mul(f_eps(h, eps).coeffs, v)
        + 2.0 * g_eps(h, FourierField(lat, v, check=False), eps).coeffs
    )
    res["master_expansion"] = _residual(lat, lhs, rhs, lhs, rhs)

    res["master_parabolic"] = expansion_residual(h, g, eps)
    return res
