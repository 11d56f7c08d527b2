"""Direct lattice-sum route for the fractional Laplacian, cross-checking FFT.

The operator acts as a principal-value sum against the periodised Riesz
kernel  K(z) = sum_m |z + m|^{-d-alpha}  over the image lattice m in 4Z^d.
The kernel table is evaluated by an Ewald split (incomplete-gamma real part
over images |m|_inf <= 4M plus a rapidly converging reciprocal sum), so the
image-truncation budget is explicit and tiny.  The punctured quadrature
itself carries an O(h^{2-alpha}) defect whose expansion contains only powers
h^{2j-alpha}; ``kernel_apply`` therefore offers refinement acceleration
across N, N/2, N/4 to push the agreement with the spectral route to the
1e-6 scale on band-limited fields.

The O(N^{2d}) convolution loops live in the compiled ``_kernels`` extension
with a pure-numpy twin in ``_kernels_py``; selection happens here at import.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import lru_cache
from itertools import product

import numpy as np
from scipy.special import gammaincc

from .constants import gamma_fn
from .grid import ScalarField, TorusGrid
from .spectral import resample

if os.environ.get("FRAKOLM_PURE_PYTHON"):
    from . import _kernels_py as _impl

    USING_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        USING_COMPILED = True
    except ImportError:
        from . import _kernels_py as _impl

        USING_COMPILED = False


class TruncationError(ValueError):
    def __init__(self, msg, tail_bound):
        super().__init__(msg)
        self.tail_bound = tail_bound


@dataclass(frozen=True)
class KernelBudget:
    """Error budget attached to a kernel-route evaluation."""

    image_tail: float  # real-space Ewald remainder beyond |m|_inf <= 4M
    reciprocal_tail: float  # dropped reciprocal-sum remainder
    quadrature_order: float  # leading defect exponent of the punctured sum


def riesz_constant(d: int, alpha: float) -> float:
    """Normalisation c_{d,alpha} = 2^a Gamma((d+a)/2) / (pi^{d/2} |Gamma(-a/2)|)."""
    if not 0.0 < alpha < 2.0:
        raise ValueError(f"alpha={alpha}: kernel route needs 0 < alpha < 2")
    return (
        2.0**alpha
        * gamma_fn((d + alpha) / 2.0)
        / (math.pi ** (d / 2.0) * abs(gamma_fn(-alpha / 2.0)))
    )


def _upper_gamma_negative(a: float, x: np.ndarray) -> np.ndarray:
    """Gamma_up(-a, x) for 0 < a < 1 via one recurrence step off gammaincc."""
    g1 = gammaincc(1.0 - a, x) * gamma_fn(1.0 - a)
    return (x ** (-a) * np.exp(-x) - g1) / a


def _ewald_t0(M: int) -> float:
    # e^{-t0 (4M)^2} ~ e^{-41}: real-space images beyond |c|=M are negligible
    return 41.0 / (16.0 * M * M)


@lru_cache(maxsize=32)
def periodized_kernel_table(d: int, N: int, alpha: float, M: int):
    """K(z_D) on the difference grid z_D = 4*Delta/N, Delta in [0,N)^d.

    Returns (table, budget); the singular entry Delta=0 is set to zero (the
    punctured sum never touches it).  Ewald split with parameter t0 tuned so
    both halves terminate at ~1e-18 relative.
    """
    if M < 2:
        raise TruncationError(f"M={M} < 2", tail_bound=math.inf)
    grid = TorusGrid(d=d, N=N)
    sp = (d + alpha) / 2.0
    t0 = _ewald_t0(M)

    axis = 4.0 * np.arange(N) / N
    zs = np.meshgrid(*([axis] * d), indexing="ij")

    table = np.zeros(grid.shape)
    origin = (0,) * d
    for c in product(range(-M, M + 1), repeat=d):
        r2 = sum((z + 4.0 * ci) ** 2 for z, ci in zip(zs, c))
        if c == (0,) * d:
            r2[origin] = 1.0  # masked below
        term = gammaincc(sp, t0 * r2) * r2 ** (-sp)
        if c == (0,) * d:
            term[origin] = 0.0
        table += term

    # reciprocal sum over k = (pi/2) n
    n_k = max(2, math.ceil(41.0 / (math.pi * M)))
    vol = 4.0**d
    pref = math.pi ** (d / 2.0) / (vol * gamma_fn(sp))
    a_half = alpha / 2.0
    for n in product(range(-n_k, n_k + 1), repeat=d):
        k2 = (math.pi / 2.0) ** 2 * sum(ni * ni for ni in n)
        if k2 == 0.0:
            gk = t0**a_half / a_half
            table += pref * gk
            continue
        x = np.array(k2 / (4.0 * t0))
        gk = (k2 / 4.0) ** a_half * float(_upper_gamma_negative(a_half, x))
        phase = sum((math.pi / 2.0) * ni * z for ni, z in zip(n, zs))
        table += pref * gk * np.cos(phase)
    table[origin] = 0.0

    # remainder bounds: next excluded image shell / reciprocal shell
    r_min = 4.0 * M
    shells = 0.0
    for n in range(M + 1, M + 11):
        count = (2 * n + 1) ** d - (2 * n - 1) ** d
        rn = max(4.0 * n - 4.0, r_min)
        shells += count * float(gammaincc(sp, t0 * rn * rn)) * rn ** (-2 * sp)
    k_next = (math.pi / 2.0) * (n_k + 1)
    recip_tail = (
        pref
        * (3 ** d)
        * (k_next**2 / 4.0) ** a_half
        * abs(float(_upper_gamma_negative(a_half, np.array(k_next**2 / (4.0 * t0)))))
        * (2 * n_k + 1) ** (d - 1)
        * 2
        * d
    )
    budget = KernelBudget(
        image_tail=shells, reciprocal_tail=recip_tail, quadrature_order=2.0 - alpha
    )
    return table, budget


@lru_cache(maxsize=8)
def _cell_moment(d: int, alpha: float) -> float:
    """I1 = integral of |w|^{2-d-alpha} over [-1/2,1/2]^d.

    Computed on the dyadic annulus [-1/2,1/2]^d minus [-1/4,1/4]^d, where the
    integrand is smooth, then summed by self-similarity:
    I(1/2) = J + 2^{alpha-2} I(1/2).
    """

    def annulus_midpoint(n: int) -> float:
        axis = (np.arange(n) + 0.5) / n - 0.5
        ws = np.meshgrid(*([axis] * d), indexing="ij")
        r = np.sqrt(sum(w**2 for w in ws))
        inner = np.max(np.abs(np.stack(ws)), axis=0) < 0.25
        vals = np.where(inner, 0.0, r ** (2.0 - d - alpha))
        return float(vals.sum()) / n**d

    n0 = 256 if d == 2 else 64
    j1, j2 = annulus_midpoint(n0), annulus_midpoint(2 * n0)
    J = j2 + (j2 - j1) / 3.0  # midpoint is O(h^2) on the smooth annulus
    return J / (1.0 - 2.0 ** (alpha - 2.0))


def _fd_laplacian(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    for ax in range(values.ndim):
        out += np.roll(values, 1, axis=ax) + np.roll(values, -1, axis=ax) - 2.0 * values
    return out / h**2


def _fd_gradient_sq(values: np.ndarray, h: float) -> np.ndarray:
    out = np.zeros_like(values)
    for ax in range(values.ndim):
        out += ((np.roll(values, -1, axis=ax) - np.roll(values, 1, axis=ax)) / (2.0 * h)) ** 2
    return out


def _richardson_weights(levels: int, alpha: float) -> np.ndarray:
    """Combine evaluations at h, 2h, 4h, ... killing h^{2-alpha}, h^{4-alpha}, ..."""
    exps = [2.0 * j - alpha for j in range(1, levels)]
    A = np.zeros((levels, levels))
    A[0, :] = 1.0
    for row, e in enumerate(exps, start=1):
        A[row, :] = [2.0 ** (i * e) for i in range(levels)]
    rhs = np.zeros(levels)
    rhs[0] = 1.0
    return np.linalg.solve(A, rhs)


def _pv_apply_single(u: ScalarField, alpha: float, M: int) -> np.ndarray:
    grid = u.grid
    table, _ = periodized_kernel_table(grid.d, grid.N, alpha, M)
    vals = np.ascontiguousarray(u.values)
    conv = _impl.convolve(table, vals)
    S = table.sum()
    cda = riesz_constant(grid.d, alpha)
    h = grid.h
    out = cda * grid.cell_volume * (S * vals - conv)
    # excluded-cell principal value: second-order Taylor correction
    I1 = _cell_moment(grid.d, alpha)
    out -= cda * (I1 * h ** (2.0 - alpha) / (2.0 * grid.d)) * _fd_laplacian(vals, h)
    return out


def kernel_budget(u: ScalarField, alpha: float, M: int) -> KernelBudget:
    _, budget = periodized_kernel_table(u.grid.d, u.grid.N, alpha, M)
    return budget


def default_levels(N: int) -> int:
    """Deepest refinement ladder keeping the coarsest grid at >= 16 points."""
    L = 1
    while L < 4 and N // 2**L >= 16:
        L += 1
    return L


def kernel_apply(
    u: ScalarField, alpha: float, M: int, levels: int | None = None, tol: float | None = None
) -> ScalarField:
    """Fractional Laplacian by direct lattice summation.

    ``levels`` > 1 restricts u to coarser half-shifted grids (exact for
    band-limited fields, the stated precondition) and eliminates the leading
    quadrature defects h^{2-alpha}, h^{4-alpha}, ... by extrapolation.
    """
    grid = u.grid
    if levels is None:
        levels = default_levels(grid.N)
    if grid.N // 2 ** (levels - 1) < 8:
        raise ValueError(f"N={grid.N} too small for {levels} refinement levels")
    _, budget = periodized_kernel_table(grid.d, grid.N, alpha, M)
    if tol is not None and budget.image_tail + budget.reciprocal_tail > tol:
        raise TruncationError(
            f"M={M} cannot meet tol={tol}: tail bound "
            f"{budget.image_tail + budget.reciprocal_tail:.3e}",
            tail_bound=budget.image_tail + budget.reciprocal_tail,
        )
    w = _richardson_weights(levels, alpha)
    acc = np.zeros(grid.shape)
    for i in range(levels):
        Ni = grid.N // 2**i
        ui = resample(u, Ni)
        Ai = _pv_apply_single(ui, alpha, M)
        Af = resample(ScalarField(TorusGrid(d=grid.d, N=Ni), Ai), grid.N)
        acc += w[i] * Af.values
    return ScalarField(grid, acc)


def quadratic_form_direct(
    u: ScalarField, alpha: float, M: int, levels: int | None = None
) -> float:
    """Dirichlet form (c_{d,a}/2) * double integral of |u(x)-u(y)|^2 K(x-y).

    Evaluated by direct summation; matches <A^{1/2}u, A^{1/2}u> within the
    quadrature budget, with the same refinement acceleration as kernel_apply.
    The 1/2 is forced by the pointwise representation
    Au(x) = c p.v. int (u(x)-u(y)) K(x-y) dy after symmetrising the pairing.
    """
    grid = u.grid
    if levels is None:
        levels = default_levels(grid.N)
    if grid.N // 2 ** (levels - 1) < 8:
        raise ValueError(f"N={grid.N} too small for {levels} refinement levels")
    w = _richardson_weights(levels, alpha)
    total = 0.0
    cda = riesz_constant(grid.d, alpha)
    I1 = _cell_moment(grid.d, alpha)
    for i in range(levels):
        Ni = grid.N // 2**i
        ui = resample(u, Ni)
        gi = ui.grid
        table, _ = periodized_kernel_table(gi.d, gi.N, alpha, M)
        vals = np.ascontiguousarray(ui.values)
        conv = _impl.convolve(table, vals)
        S = table.sum()
        form = gi.cell_volume**2 * (S * (vals**2).sum() - (vals * conv).sum())
        # diagonal cell: |u(x)-u(y)|^2 ~ (grad u . z)^2, halved like the form
        diag = (
            0.5
            * gi.cell_volume
            * (gi.h ** (2.0 - alpha) * I1 / gi.d)
            * _fd_gradient_sq(vals, gi.h).sum()
        )
        total += w[i] * cda * (form + diag)
    return float(total)
