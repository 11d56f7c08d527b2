"""Fourier-multiplier calculus: fractional powers, heat flow, derivatives.

Every operator here is diagonal in the Fourier basis of the torus, with the
fractional Laplacian A = (-Delta)^{alpha/2} acting as |xi|^alpha.  The
half-shift of the sample points is a translation, so multipliers act on raw
FFT coefficients unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import GridError, ScalarField, TorusGrid, VectorField


class SingularOperatorError(ValueError):
    """Negative power at lambda=0 applied to a field with nonzero mean."""


def _apply_multiplier(u: ScalarField, m: np.ndarray) -> ScalarField:
    return ScalarField(u.grid, np.fft.ifftn(m * u.spectral).real)


def power_multiplier(grid: TorusGrid, alpha: float, s: float, lam: float = 0.0) -> np.ndarray:
    """(lam + |xi|^alpha)^s on the frequency lattice."""
    if lam < 0.0:
        raise GridError(f"lambda={lam} must be >= 0")
    sym = grid.freq_norm() ** alpha
    base = lam + sym
    if lam == 0.0 and s < 0.0:
        # zero frequency handled by the caller (mean must vanish)
        m = np.zeros_like(base)
        nz = base > 0.0
        m[nz] = base[nz] ** s
        return m
    return base**s


@dataclass(frozen=True)
class SpectralOperator:
    """A (lam + A)^s multiplier bound to one grid."""

    grid: TorusGrid
    alpha: float
    s: float
    lam: float = 0.0

    @property
    def multiplier(self) -> np.ndarray:
        return power_multiplier(self.grid, self.alpha, self.s, self.lam)

    def __call__(self, u: ScalarField) -> ScalarField:
        return apply_power(u, self.alpha, self.s, self.lam)


def apply_power(u: ScalarField, alpha: float, s: float, lam: float = 0.0) -> ScalarField:
    """Apply (lam + A)^s;  apply_power(u, alpha, 1, 0) is the fractional Laplacian."""
    if lam == 0.0 and s < 0.0:
        mean_coeff = abs(u.spectral.flat[0])
        scale = max(np.abs(u.spectral).max(), 1.0)
        if mean_coeff > 1e-11 * scale:
            raise SingularOperatorError(
                "negative power at lambda=0 requires a zero-mean field"
            )
    m = power_multiplier(u.grid, alpha, s, lam)
    return _apply_multiplier(u, m)


def fractional_laplacian(u: ScalarField, alpha: float) -> ScalarField:
    return apply_power(u, alpha, 1.0, 0.0)


def heat(u: ScalarField, alpha: float, t: float) -> ScalarField:
    """e^{-tA} by the multiplier exp(-t |xi|^alpha); mass is conserved."""
    if t < 0.0:
        raise GridError(f"t={t} must be >= 0")
    if t == 0.0:
        return ScalarField(u.grid, u.values.copy())
    m = np.exp(-t * u.grid.freq_norm() ** alpha)
    return _apply_multiplier(u, m)


def _grad_multipliers(grid: TorusGrid):
    ks = grid.freq_ints()
    out = []
    for ax in range(grid.d):
        k = ks.copy()
        k[grid.N // 2] = 0  # zero the unpaired Nyquist mode for a real derivative
        shape = [1] * grid.d
        shape[ax] = grid.N
        out.append(1j * (np.pi / 2.0) * k.reshape(shape))
    return out


def gradient(u: ScalarField) -> VectorField:
    hat = u.spectral
    comps = [
        ScalarField(u.grid, np.fft.ifftn(m * hat).real) for m in _grad_multipliers(u.grid)
    ]
    return VectorField(comps)


def divergence(F: VectorField) -> ScalarField:
    ms = _grad_multipliers(F.grid)
    acc = np.zeros(F.grid.shape, dtype=complex)
    for m, c in zip(ms, F.components):
        acc += m * c.spectral
    return ScalarField(F.grid, np.fft.ifftn(acc).real)


def advect(b: VectorField, u: ScalarField, dealias: bool = True) -> ScalarField:
    """b . grad(u) formed pointwise, optionally with 2/3-rule dealiasing."""
    g = gradient(u)
    prod = b.dot(g)
    if dealias:
        prod = dealias_two_thirds(prod)
    return prod


def _axis_mask(grid: TorusGrid, cut: int) -> np.ndarray:
    k = np.abs(grid.freq_ints())
    keep_axis = k <= cut
    mask = np.ones(grid.shape, dtype=bool)
    for ax in range(grid.d):
        shape = [1] * grid.d
        shape[ax] = grid.N
        mask &= keep_axis.reshape(shape)
    return mask


def dealias_two_thirds(u: ScalarField) -> ScalarField:
    mask = _axis_mask(u.grid, u.grid.N // 3)
    return ScalarField(u.grid, np.fft.ifftn(np.where(mask, u.spectral, 0.0)).real)


def band_limit(u: ScalarField, kmax: int) -> ScalarField:
    """Hard truncation to modes |k_i| <= kmax per axis."""
    mask = _axis_mask(u.grid, kmax)
    return ScalarField(u.grid, np.fft.ifftn(np.where(mask, u.spectral, 0.0)).real)


def resample(u: ScalarField, N_new: int) -> ScalarField:
    """Evaluate the trigonometric interpolant of u on the N_new half-shifted grid.

    Exact for fields band-limited below the coarser Nyquist.  Used by the
    kernel route's refinement levels; the half-shift differs between grids,
    which the per-axis phase factor accounts for.
    """
    grid = u.grid
    if N_new == grid.N:
        return ScalarField(grid, u.values.copy())
    new_grid = TorusGrid(d=grid.d, N=N_new)
    n_keep = min(grid.N, N_new)
    half = n_keep // 2
    src = u.spectral
    dst = np.zeros(new_grid.shape, dtype=complex)

    k_old = grid.freq_ints()
    k_new = new_grid.freq_ints()
    old_pos = {int(k): i for i, k in enumerate(k_old)}
    new_pos = {int(k): i for i, k in enumerate(k_new)}
    kept = [k for k in range(-half, half) if abs(k) < half]  # drop coarse Nyquist
    idx_old = np.array([old_pos[k] for k in kept])
    idx_new = np.array([new_pos[k] for k in kept])

    delta = (new_grid.h - grid.h) / 2.0
    phase_axis = np.exp(1j * (np.pi / 2.0) * np.array(kept) * delta)

    take = src
    for ax in range(grid.d):
        take = np.take(take, idx_old, axis=ax)
        shape = [1] * grid.d
        shape[ax] = len(kept)
        take = take * phase_axis.reshape(shape)
    sl = tuple(np.ix_(*([idx_new] * grid.d)))
    dst[sl] = take * (N_new / grid.N) ** grid.d
    return ScalarField(new_grid, np.fft.ifftn(dst).real)


def plane_wave(grid: TorusGrid, k_vec, phase: float = 0.0) -> ScalarField:
    """cos(xi_k . x + phase) sampled on the grid."""
    xs = grid.coords()
    arg = sum((np.pi / 2.0) * kk * x for kk, x in zip(k_vec, xs)) + phase
    return ScalarField(grid, np.cos(arg))
