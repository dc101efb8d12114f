"""Pointwise curvature of rotation-invariant metrics.

In a unitary frame adapted to the radial direction the bisectional curvature
has three distinct components at each point:

    A  radial-radial        (= xi'(r)/h)
    B  radial-transverse    (= (xi*v - w)/v^2,  w = r(f - h))
    C  transverse pairs     (= 2*w/v^2)

Everything else is assembled algebraically from these: the two Ricci
eigenvalues lambda = A + (n-1)B (multiplicity 2) and mu = B + (n/2)C
(multiplicity 2n-2), elementary symmetric polynomials sigma_k of that
eigenvalue multiset, and the degree-k Chern-form densities against the
volume form.

Two evaluation routes are exposed for cross-checking: the native route uses
the generator's own representation exactly, while ``abc_at_r`` on transverse
models (and ``abc_at_x`` on radial ones) re-derives the radial component from
finite differences of the tabulated profile in the other coordinate.
"""

from __future__ import annotations

from math import comb

import numpy as np
from scipy.interpolate import PchipInterpolator

from .metric import MetricModel, Representation, fprime_from_xi
from .quadrature import stencil_derivative


def ricci_eigenvalues(A, B, C, n: int):
    """(lambda, mu): Ricci eigenvalues with multiplicities (2, 2n-2)."""
    lam = np.asarray(A) + (n - 1) * np.asarray(B)
    mu = np.asarray(B) + 0.5 * n * np.asarray(C)
    return lam, mu


def scalar_curvature(A, B, C, n: int):
    return np.asarray(A) + 2 * (n - 1) * np.asarray(B) + 0.5 * n * (n - 1) * np.asarray(C)


def sigma_k(lam, mu, n: int, k: int):
    """Elementary symmetric polynomial of {lambda x2, mu x(2n-2)}."""
    if not 1 <= k <= 2 * n:
        raise ValueError(f"sigma_k needs 1 <= k <= 2n, got k={k}, n={n}")
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    out = np.zeros(np.broadcast(lam, mu).shape)
    for j in range(max(0, k - (2 * n - 2)), min(2, k) + 1):
        out += comb(2, j) * comb(2 * n - 2, k - j) * lam**j * mu ** (k - j)
    return float(out) if out.ndim == 0 else out


def chern_density_k(lam, mu, n: int, k: int):
    """Density of the k-th power of the Ricci form against the volume form.

    Averaging the k-fold wedge of the Ricci eigenform over frames gives

        [ C(n-1, k-1) lambda mu^(k-1) + C(n-1, k) mu^k ] / C(n, k)

    (second term absent at k = n).  k = 1 reduces to scalar/n.
    """
    if not 1 <= k <= n:
        raise ValueError(f"chern_density_k needs 1 <= k <= n, got k={k}, n={n}")
    lam = np.asarray(lam, dtype=float)
    mu = np.asarray(mu, dtype=float)
    out = (comb(n - 1, k - 1) * lam * mu ** (k - 1) + comb(n - 1, k) * mu**k) / comb(n, k)
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------------------
# evaluation routes


def abc_native(model: MetricModel, t):
    """(A, B, C) at native radii t, through the generator's exact representation."""
    return model.engine.abc_of(t)


def _native_from_r(model: MetricModel, r):
    if model.representation is Representation.FROM_XI:
        return np.asarray(r, dtype=float)
    aux = getattr(model, "_r_to_native", None)
    if aux is None:
        pos = model.r > 0
        lr = np.log(model.r[pos])
        lt = np.log(model.native[pos])
        keep = np.concatenate(([True], np.diff(lr) > 0))
        aux = PchipInterpolator(lr[keep], lt[keep], extrapolate=False)
        model._r_to_native = aux
    r_arr = np.asarray(r, dtype=float)
    with np.errstate(divide="ignore"):
        lr_q = np.clip(np.log(r_arr), aux.x[0], aux.x[-1])
    t = np.exp(aux(lr_q))
    # polish the interpolated seed: r(t) = t^2/h, d ln r / d ln t = 2/(1 - xi),
    # so two or three Newton corrections take ~1e-5 seed error to rounding
    eng = model.engine
    lo = float(np.min(model.native[model.native > 0]))
    hi = float(model.native[-1])
    for _ in range(3):
        t = np.clip(t, lo, hi)
        h = np.asarray(eng.h_of(t), dtype=float)
        xi = np.asarray(eng.xi_of(t), dtype=float)
        resid = 2.0 * np.log(t) - np.log(h) - lr_q
        t = t * np.exp(np.clip(-0.5 * resid * (1.0 - xi), -0.5, 0.5))
    out = np.clip(t, lo, hi)
    return float(out) if np.ndim(r) == 0 else out


def _native_from_x(model: MetricModel, x):
    if model.representation is Representation.FROM_F:
        return np.asarray(x, dtype=float)
    aux = getattr(model, "_x_to_native", None)
    if aux is None:
        pos = model.x > 0
        lx = np.log(model.x[pos])
        lt = np.log(model.native[pos])
        keep = np.concatenate(([True], np.diff(lx) > 0))
        aux = PchipInterpolator(lx[keep], lt[keep], extrapolate=False)
        model._x_to_native = aux
    x_arr = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore"):
        lx_q = np.clip(np.log(x_arr), aux.x[0], aux.x[-1])
    t = np.exp(aux(lx_q))
    # x(t) = sqrt(t h), d ln x / d ln t = (1 - xi)/2; skip the correction
    # where xi has saturated (x is constant there, the seed is all there is)
    eng = model.engine
    lo = float(np.min(model.native[model.native > 0]))
    hi = float(model.native[-1])
    for _ in range(3):
        t = np.clip(t, lo, hi)
        h = np.asarray(eng.h_of(t), dtype=float)
        xi = np.asarray(eng.xi_of(t), dtype=float)
        slope = 0.5 * (1.0 - xi)
        resid = 0.5 * (np.log(t) + np.log(h)) - lx_q
        step = np.where(slope > 1e-9, resid / np.maximum(slope, 1e-9), 0.0)
        t = t * np.exp(np.clip(-step, -0.5, 0.5))
    out = np.clip(t, lo, hi)
    return float(out) if np.ndim(x) == 0 else out


def _seam_indices(model: MetricModel):
    """Nodes bounding the smooth segments of the native table."""
    bp = np.asarray(model.engine.breakpoints_native, dtype=float)
    if bp.size == 0:
        return None
    idx = np.clip(np.searchsorted(model.native, bp), 0, model.native.size - 1)
    return np.unique(idx)


def abc_at_r(model: MetricModel, r):
    """(A, B, C) at radii r = |z|^2.

    On transverse-generated models the radial component is re-derived from
    the tabulated xi(r) by seam-aware polynomial stencils, which makes this
    route numerically independent of the native one.
    """
    if model.representation is Representation.FROM_XI:
        return model.engine.abc_of(r)
    aux = getattr(model, "_dxi_dr_interp", None)
    if aux is None:
        table = stencil_derivative(model.xi, model.r, segments=_seam_indices(model))
        aux = PchipInterpolator(model.native, table, extrapolate=False)
        model._dxi_dr_interp = aux
    t = _native_from_r(model, r)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    _, B, C = model.engine.abc_of(t_arr)
    h = np.atleast_1d(np.asarray(model.engine.h_of(t_arr), dtype=float))
    A = np.asarray(aux(np.clip(t_arr, model.native[0], model.native[-1])), dtype=float) / h
    if np.ndim(r) == 0:
        return float(A[0]), float(np.atleast_1d(B)[0]), float(np.atleast_1d(C)[0])
    return A, np.atleast_1d(B), np.atleast_1d(C)


def abc_at_x(model: MetricModel, x):
    """(A, B, C) at transverse radii x (x^2 = r*h).

    On radially-generated models A is re-derived by differentiating the
    tabulated F' over the x table: A = F' F'' / (2x (1 + F'^2)^2).
    Needs xi < 1 (F' diverges at saturation).
    """
    if model.representation is Representation.FROM_F:
        return model.engine.abc_of(x)
    if float(np.max(model.xi)) >= 1.0 - 1e-9:
        raise ValueError("transverse route needs xi < 1 everywhere (no saturation)")
    aux = getattr(model, "_fpp_of_x_interp", None)
    if aux is None:
        fp_table = fprime_from_xi(np.clip(model.xi, 0.0, 1.0 - 1e-15))
        fpp_table = stencil_derivative(fp_table, model.x, segments=_seam_indices(model))
        aux = (
            PchipInterpolator(model.x, fp_table, extrapolate=False),
            PchipInterpolator(model.x, fpp_table, extrapolate=False),
        )
        model._fpp_of_x_interp = aux
    t = _native_from_x(model, x)
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    _, B, C = model.engine.abc_of(t_arr)
    x_arr = np.clip(np.atleast_1d(np.asarray(model.engine.x_of(t_arr), dtype=float)),
                    model.x[0], model.x[-1])
    fp = np.asarray(aux[0](x_arr), dtype=float)
    fpp = np.asarray(aux[1](x_arr), dtype=float)
    sq2 = 1.0 + fp * fp
    with np.errstate(divide="ignore", invalid="ignore"):
        A = np.where(x_arr > 0, fp * fpp / (2.0 * x_arr * sq2 * sq2), 0.5 * fpp**2)
    if np.ndim(x) == 0:
        return float(A[0]), float(np.atleast_1d(B)[0]), float(np.atleast_1d(C)[0])
    return A, np.atleast_1d(B), np.atleast_1d(C)


# ---------------------------------------------------------------------------
# tables


def curvature_table(model: MetricModel, rows: int = 256) -> dict[str, np.ndarray]:
    """Curvature summary on a log-spaced subset of the native grid.

    Columns: r, x, A, B, C, lambda, mu, scalar.
    """
    native = model.native
    pos = native[native > 0]
    t = np.unique(np.geomspace(pos[0], pos[-1], rows))
    A, B, C = model.engine.abc_of(t)
    lam, mu = ricci_eigenvalues(A, B, C, model.n)
    return {
        "r": np.asarray(model.engine.r_of(t), dtype=float),
        "x": np.asarray(model.engine.x_of(t), dtype=float),
        "A": np.asarray(A, dtype=float),
        "B": np.asarray(B, dtype=float),
        "C": np.asarray(C, dtype=float),
        "lambda": np.asarray(lam, dtype=float),
        "mu": np.asarray(mu, dtype=float),
        "scalar": np.asarray(scalar_curvature(A, B, C, model.n), dtype=float),
    }
