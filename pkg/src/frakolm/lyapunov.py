"""Torus Lyapunov profiles, the singular attracting drift, and its mollification.

phi_beta is the cutoff-modified power profile |x|^{-beta a(|x|)}: exactly
|x|^{-beta} inside the unit ball, identically 1 outside radius 3/2, and
bounded below by a beta-independent c0.  Storing the shared exponent field
E(x) = -a(|x|) log|x| makes the scaling law phi_beta^p = phi_{p beta} a
reindexing rather than a floating-point accident.

The drift q equals x/|x|^alpha on B_1 and is tapered to zero by the same
smoothstep before periodisation; its divergence is known in closed form
everywhere, which the verifier uses instead of differentiating the singular
field spectrally.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np

from .constants import DomainError, nu_star
from .grid import ScalarField, TorusGrid, VectorField, mean
from .spectral import fractional_laplacian, heat


def _h_exp(s: np.ndarray) -> np.ndarray:
    out = np.zeros_like(s)
    pos = s > 0
    out[pos] = np.exp(-1.0 / s[pos])
    return out


def smoothstep(s) -> np.ndarray:
    """psi(s) = h(s)/(h(s)+h(1-s)) with h(s) = e^{-1/s} 1_{s>0}; C-infinity."""
    s = np.asarray(s, dtype=float)
    hs = _h_exp(s)
    hm = _h_exp(1.0 - s)
    return hs / (hs + hm)


def smoothstep_prime(s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    hs = _h_exp(s)
    hm = _h_exp(1.0 - s)
    dhs = np.zeros_like(s)
    dhm = np.zeros_like(s)
    pos = s > 0
    dhs[pos] = hs[pos] / s[pos] ** 2
    neg = (1.0 - s) > 0
    dhm[neg] = hm[neg] / (1.0 - s[neg]) ** 2
    return (dhs * hm + hs * dhm) / (hs + hm) ** 2


def cutoff_a(t) -> np.ndarray:
    """a(t): 1 on (0, 1], 0 on [3/2, 2), smoothstep bridge in between."""
    t = np.asarray(t, dtype=float)
    return smoothstep(3.0 - 2.0 * t)


def cutoff_a_prime(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    return -2.0 * smoothstep_prime(3.0 - 2.0 * t)


def _exponent_field(grid: TorusGrid) -> np.ndarray:
    """E(x) = -a(|x|) log |x|, so that phi_beta = exp(beta E)."""
    t = grid.radius()
    return -cutoff_a(t) * np.log(t)


@dataclass(frozen=True)
class LyapunovField:
    grid: TorusGrid
    alpha: float
    beta: float
    exponent: np.ndarray  # shared E(x); field = exp(beta * E)
    c0: float

    @property
    def field(self) -> ScalarField:
        return ScalarField(self.grid, np.exp(self.beta * self.exponent))

    def power(self, p: float) -> "LyapunovField":
        """phi_beta^p as phi_{p beta}, sharing the exponent field exactly."""
        return replace(self, beta=self.beta * p)


def make_phi(grid: TorusGrid, beta: float, *, alpha: float) -> LyapunovField:
    """Lyapunov profile for 0 <= beta < d - alpha."""
    if not 0.0 <= beta < grid.d - alpha:
        raise DomainError(f"beta={beta} outside [0, {grid.d - alpha})")
    c0 = 1.5 ** (-(grid.d - alpha))
    return LyapunovField(grid=grid, alpha=alpha, beta=beta, exponent=_exponent_field(grid), c0=c0)


def singular_weight(grid: TorusGrid, beta: float) -> ScalarField:
    """The profile |x|^{-beta a(|x|)} for any integrable exponent beta in [0, d).

    The Hardy weight phi_alpha needs beta = alpha, which leaves the Lyapunov
    range [0, d-alpha) whenever d < 2 alpha; only the pointwise definition is
    required there.
    """
    if not 0.0 <= beta < grid.d:
        raise DomainError(f"beta={beta} outside [0, d={grid.d})")
    return ScalarField(grid, np.exp(beta * _exponent_field(grid)))


@lru_cache(maxsize=16)
def corner_cell_integral(d: int, beta: float) -> float:
    """I_q = integral of |w|^{-beta} over [0,1]^d, via dyadic self-similarity.

    The annulus [0,1]^d minus [0,1/2]^d is singularity-free (midpoint rule),
    and the inner cube rescales: I_q = J + 2^{beta-d} I_q.
    """

    def annulus(n: int) -> float:
        axis = (np.arange(n) + 0.5) / n
        ws = np.meshgrid(*([axis] * d), indexing="ij")
        r = np.sqrt(sum(w**2 for w in ws))
        inner = np.max(np.stack(ws), axis=0) < 0.5
        vals = np.where(inner, 0.0, r ** (-beta))
        return float(vals.sum()) / n**d

    n0 = 256 if d == 2 else 64
    j1, j2 = annulus(n0), annulus(2 * n0)
    J = j2 + (j2 - j1) / 3.0
    return J / (1.0 - 2.0 ** (beta - d))


def _origin_cell_indices(grid: TorusGrid):
    """Indices of the 2^d samples whose cells touch the origin corner."""
    lo, hi = grid.N // 2 - 1, grid.N // 2
    from itertools import product as _product

    return list(_product((lo, hi), repeat=grid.d))


def corner_correction(grid: TorusGrid, beta: float, svals: np.ndarray) -> float:
    """Additive fix replacing the naive origin-cell terms of a |x|^{-beta}
    weight by the exact cell integrals times the local samples."""
    iq = corner_cell_integral(grid.d, beta)
    t = grid.radius()
    corr = 0.0
    for idx in _origin_cell_indices(grid):
        corr += svals[idx] * (
            grid.h ** (grid.d - beta) * iq - grid.cell_volume * t[idx] ** (-beta)
        )
    return float(corr)


def singular_inner(grid: TorusGrid, beta: float, svals: np.ndarray) -> float:
    """<|x|^{-beta a(|x|)}, s> with exact integration over the origin cells.

    Midpoint quadrature of the singular weight loses O(h^{d-beta}) from the
    2^d cells meeting the origin; replacing their contribution with the exact
    cell integral of |x|^{-beta} times the local sample removes that error.
    """
    w = np.exp(beta * _exponent_field(grid))
    total = float((w * svals).sum()) * grid.cell_volume
    return total + corner_correction(grid, beta, svals)


def phi_tilde_values(points: np.ndarray, beta: float) -> np.ndarray:
    """Periodic extension of phi_beta evaluated at arbitrary R^d points.

    ``points`` has shape (..., d); values are computed from the torus
    representative in Q = (-2, 2]^d.
    """
    rep = np.mod(points + 2.0, 4.0) - 2.0
    t = np.sqrt((rep**2).sum(axis=-1))
    vals = np.ones_like(t)
    inside = (t < 1.5) & (t > 0.0)
    ti = t[inside]
    vals[inside] = ti ** (-beta * cutoff_a(ti))
    vals[t == 0.0] = np.inf
    return vals


def g_bounds(d: int, alpha: float, beta: float, n_sup: int = 401, n_cell: int = 200):
    """Torus-correction estimates for g_beta = phi~_beta - |.|^{-beta}.

    Returns the sampled sup over (8/7)Q together with its closed-form corner
    value, and the L1 norms of g_beta over each neighbouring cell Q+m,
    m in 4Z^d, m != 0, |m|_inf <= 8.
    """
    if not 0.0 <= beta < d - alpha:
        raise DomainError(f"beta={beta} outside [0, {d - alpha})")
    if beta == 0.0:
        corners = 0.0
    else:
        corners = 1.0 - ((16.0 / 7.0) * np.sqrt(d)) ** (-beta)

    # sup over (8/7)Q, endpoint included so the corner itself is sampled
    edge = 16.0 / 7.0
    axis = np.linspace(-edge, edge, n_sup)[1:]
    pts = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    r = np.sqrt((pts**2).sum(axis=-1))
    g = phi_tilde_values(pts, beta) - np.where(r > 0, r, 1.0) ** (-beta)
    g[r == 0.0] = 0.0
    sup_sampled = float(np.abs(g).max())

    if d == 3:
        n_cell = min(n_cell, 60)
    axis_c = -2.0 + 4.0 * (np.arange(n_cell) + 0.5) / n_cell
    base = np.stack(np.meshgrid(*([axis_c] * d), indexing="ij"), axis=-1)
    cellvol = (4.0 / n_cell) ** d
    l1 = {}
    for m in np.ndindex(*(5,) * d):
        c = tuple(int(v) - 2 for v in m)
        if all(v == 0 for v in c):
            continue
        shift = 4.0 * np.asarray(c, dtype=float)
        pts_m = base  # integrate over Q after substituting y -> y - m
        r_m = np.sqrt(((pts_m + shift) ** 2).sum(axis=-1))
        vals = np.abs(phi_tilde_values(pts_m, beta) - r_m ** (-beta))
        l1[c] = float(vals.sum() * cellvol)
    return {"sup_87Q": sup_sampled, "corner_value": float(corners), "l1_cells": l1}


@dataclass(frozen=True)
class DriftSet:
    """Singular drift q, b = nu_star q, and their De Giorgi mollifications."""

    grid: TorusGrid
    alpha: float
    alpha1: float
    epsilon: float
    q: VectorField
    b: VectorField
    q_eps: VectorField
    b_eps: VectorField
    div_q: ScalarField  # closed form, valid on the whole grid
    div_q_eps: ScalarField


def default_alpha1(d: int, alpha: float) -> float:
    return min(2.0, d - alpha)


def make_drift(grid: TorusGrid, alpha: float, alpha1: float | None = None) -> DriftSet:
    """Drift q = chi(|x|) x / |x|^alpha with the smoothstep taper chi = a."""
    d = grid.d
    if alpha1 is None:
        alpha1 = default_alpha1(d, alpha)
    if not 0.0 < alpha1 <= 2.0 or alpha > d - alpha1:
        raise DomainError(f"alpha1={alpha1} violates 0 < alpha1 <= 2, alpha <= d - alpha1")
    t = grid.radius()
    chi = cutoff_a(t)
    radial = chi * t ** (-alpha)
    comps = [ScalarField(grid, radial * x) for x in grid.coords()]
    q = VectorField(comps)
    ns = nu_star(d, alpha)
    b = q * ns
    divq = ScalarField(grid, cutoff_a_prime(t) * t ** (1.0 - alpha) + (d - alpha) * radial)
    return DriftSet(
        grid=grid,
        alpha=alpha,
        alpha1=alpha1,
        epsilon=0.0,
        q=q,
        b=b,
        q_eps=q,
        b_eps=b,
        div_q=divq,
        div_q_eps=divq,
    )


def mollify(ds: DriftSet, epsilon: float) -> DriftSet:
    """q_eps = e^{-eps (-Delta)^{alpha1/2}} q componentwise (spectral heat)."""
    if epsilon < 0.0:
        raise DomainError(f"epsilon={epsilon} must be >= 0")
    if epsilon == 0.0:
        return replace(ds, epsilon=0.0, q_eps=ds.q, b_eps=ds.b, div_q_eps=ds.div_q)
    q_eps = VectorField([heat(c, ds.alpha1, epsilon) for c in ds.q.components])
    ns = nu_star(ds.grid.d, ds.alpha)
    div_eps = heat(ds.div_q, ds.alpha1, epsilon)
    return replace(
        ds, epsilon=epsilon, q_eps=q_eps, b_eps=q_eps * ns, div_q_eps=div_eps
    )


def domination_constants(ds: DriftSet) -> dict:
    """Mollifier dominations: div q_eps <= div q + C and |q_eps| <= |q| + C."""
    div_gap = float((ds.div_q_eps.values - ds.div_q.values).max())
    mag_gap = float((ds.q_eps.magnitude().values - ds.q.magnitude().values).max())
    return {
        "div_domination_C": max(div_gap, 0.0),
        "magnitude_domination_C": max(mag_gap, 0.0),
        "mean_div_q": mean(ds.div_q),
        "mean_div_q_eps": mean(ds.div_q_eps),
    }


def check_supermedian(
    grid: TorusGrid, beta: float, epsilon: float, alpha1: float
) -> tuple[ScalarField, float]:
    """Margin of the torus surrogate e^{-eps A_{alpha1}} phi_beta <= phi_beta + C3.

    The admissible range 0 <= beta <= d - alpha1 allows equality, which the
    working case beta = alpha = d - alpha1 needs.
    """
    if not 0.0 <= beta <= grid.d - alpha1:
        raise DomainError(f"beta={beta} outside [0, {grid.d - alpha1}]")
    phi = singular_weight(grid, beta)
    smoothed = heat(phi, alpha1, epsilon)
    margin = ScalarField(grid, smoothed.values - phi.values)
    return margin, float(margin.values.max())


def riesz_eigen_check(
    grid: TorusGrid, alpha: float, beta: float, window: tuple[float, float] | None = None
) -> dict:
    """Compare A phi_beta with kappa_beta |x|^{-alpha} phi_beta on an annulus.

    The identity is exact on R^d; on the torus the smooth correction g_beta
    and the discretisation leave a deviation that must shrink with N.
    """
    from .constants import kappa

    if not 0.0 < beta < grid.d - alpha:
        raise DomainError(f"beta={beta} outside (0, {grid.d - alpha})")
    if window is None:
        window = (4.0 * grid.h, 0.25)
    lo, hi = window
    phi = make_phi(grid, beta, alpha=alpha)
    f = phi.field
    lhs = fractional_laplacian(f, alpha)
    t = grid.radius()
    rhs = kappa(grid.d, alpha, beta) * t ** (-alpha) * f.values
    mask = (t >= lo) & (t <= hi)
    if not mask.any():
        raise DomainError(f"empty annulus window {window} at N={grid.N}")
    dev = np.abs(lhs.values - rhs)[mask] / np.abs(rhs[mask])
    # near the singularity the R^d identity dominates the bounded torus
    # correction A g_beta; that is the part that sharpens under refinement
    inner = mask & (t <= 2.0 * lo)
    dev_inner = np.abs(lhs.values - rhs)[inner] / np.abs(rhs[inner])
    return {
        "max_rel_deviation": float(dev.max()),
        "median_rel_deviation": float(np.median(dev)),
        "inner_rel_deviation": float(dev_inner.max()) if inner.any() else float("nan"),
        "window": window,
        "points": int(mask.sum()),
    }
