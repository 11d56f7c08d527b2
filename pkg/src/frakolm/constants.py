"""Gamma-ratio coupling constants and the Lyapunov exponent equation.

All constants of the operator (-Delta)^{alpha/2} + b.grad on the torus are
ratios of Gamma functions: the drift coupling kappa_beta, its critical value
nu_star, the Stroock-Varopoulos bound nu_sv, the p-dependent coupling nu(p),
and the exponent gamma(nu) of the invariant-density profile |x|^{-d+gamma}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


class DomainError(ValueError):
    """Argument outside the admissible parameter range."""


@dataclass(frozen=True)
class Params:
    """Global problem parameters.

    d     -- dimension, >= 2
    alpha -- stability index in (1, 2]; alpha = 2 only for d >= 3
    beta  -- auxiliary exponent in [0, d - alpha)
    p     -- Lebesgue exponent in (1, inf)
    nu    -- drift coupling, >= 0
    """

    d: int
    alpha: float
    beta: float = 0.0
    p: float = 2.0
    nu: float = 0.0

    def __post_init__(self):
        if self.d < 2:
            raise DomainError(f"d={self.d}: dimension must be >= 2")
        if not 1.0 < self.alpha <= 2.0:
            raise DomainError(f"alpha={self.alpha}: need 1 < alpha <= 2")
        if self.alpha == 2.0 and self.d < 3:
            raise DomainError("alpha=2 requires d>=3")
        if not 0.0 <= self.beta < self.d - self.alpha:
            raise DomainError(
                f"beta={self.beta}: need 0 <= beta < d-alpha = {self.d - self.alpha}"
            )
        if self.p <= 1.0:
            raise DomainError(f"p={self.p}: need p > 1")
        if self.nu < 0.0:
            raise DomainError(f"nu={self.nu}: need nu >= 0")


def gamma_fn(x: float) -> float:
    """Gamma(x) for real x, poles excluded.

    Positive arguments and negative non-integers are both supported; the
    latter appear in the Riesz kernel normalisation through |Gamma(-alpha/2)|.
    """
    if x <= 0.0 and x == math.floor(x):
        raise DomainError(f"Gamma pole at x={x}")
    try:
        return math.gamma(x)
    except ValueError as exc:  # pragma: no cover - guarded above
        raise DomainError(f"Gamma undefined at x={x}") from exc


def kappa(d: int, alpha: float, beta: float) -> float:
    """Coupling constant kappa_beta = 2^a G((b+a)/2) G((d-b)/2) / (G(b/2) G((d-b-a)/2)).

    Vanishes at beta=0 through the Gamma(beta/2) pole; defined for
    0 <= beta < d - alpha.
    """
    if not 0.0 <= beta < d - alpha:
        raise DomainError(f"beta={beta} outside [0, {d - alpha})")
    if beta == 0.0:
        return 0.0
    return (
        2.0**alpha
        * gamma_fn((beta + alpha) / 2.0)
        * gamma_fn((d - beta) / 2.0)
        / (gamma_fn(beta / 2.0) * gamma_fn((d - beta - alpha) / 2.0))
    )


def nu_star(d: int, alpha: float) -> float:
    """Critical drift coupling 2^{a-1} Gamma(a/2) Gamma(d/2) / Gamma((d-a)/2)."""
    Params(d=d, alpha=alpha)
    return (
        2.0 ** (alpha - 1.0)
        * gamma_fn(alpha / 2.0)
        * gamma_fn(d / 2.0)
        / gamma_fn((d - alpha) / 2.0)
    )


def sv_constant(p: float) -> float:
    """Stroock-Varopoulos factor 4(p-1)/p^2; equals 1 exactly at p=2."""
    if p <= 1.0:
        raise DomainError(f"p={p}: need p > 1")
    return 4.0 * (p - 1.0) / p**2


def nu_sv(d: int, alpha: float) -> float:
    """Largest coupling reachable via the Stroock-Varopoulos route.

    Equals sup_p (p/(d-a)) * 4(p-1)/p^2 * kappa_{(d-a)/2}, attained in the
    limit p -> inf, with closed form 2^{a+2}/(d-a) * (G((d+a)/4)/G((d-a)/4))^2.
    """
    Params(d=d, alpha=alpha)
    return (
        2.0 ** (alpha + 2.0)
        / (d - alpha)
        * (gamma_fn((d + alpha) / 4.0) / gamma_fn((d - alpha) / 4.0)) ** 2
    )


def nu_of_p(d: int, alpha: float, p: float) -> float:
    """Coupling nu(p) = (p/(d-alpha)) kappa_{(d-alpha)/p}, increasing to nu_star."""
    if p <= 1.0:
        raise DomainError(f"p={p}: need p > 1")
    Params(d=d, alpha=alpha)
    return p / (d - alpha) * kappa(d, alpha, (d - alpha) / p)


def gamma_exponent(d: int, alpha: float, nu: float, *, residual_tol: float = 1e-12) -> float:
    """Exponent gamma(nu) in (alpha, d] solving kappa_{d-gamma} = nu (gamma - alpha).

    The root is isolated by safeguarded bisection; Newton is avoided because
    of the Gamma((gamma-alpha)/2) pole at the left endpoint.  gamma decreases
    strictly from d at nu=0 towards alpha as nu approaches nu_star.
    """
    Params(d=d, alpha=alpha)
    ns = nu_star(d, alpha)
    if nu < 0.0 or nu >= ns:
        raise DomainError(f"nu={nu} outside [0, nu_star={ns}); no exponent exists")
    if nu == 0.0:
        return float(d)

    def residual(g: float) -> float:
        return kappa(d, alpha, d - g) - nu * (g - alpha)

    lo = alpha * (1.0 + 1e-9)
    hi = float(d)
    flo = residual(lo)
    fhi = residual(hi)
    if flo <= 0.0:
        # nu so close to nu_star that the root sits inside the guard band
        return lo
    assert fhi < 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid in (lo, hi):
            break
        fmid = residual(mid)
        if fmid > 0.0:
            lo, flo = mid, fmid
        else:
            hi, fhi = mid, fmid
    g = 0.5 * (lo + hi)
    if abs(residual(g)) > residual_tol:
        raise ArithmeticError(
            f"bisection residual {residual(g):.3e} above {residual_tol} at nu={nu}"
        )
    return g


@dataclass
class ConstantsTable:
    """Evaluated constants for one parameter set, with plug-back residuals."""

    params: Params
    kappa_beta: float = math.nan
    nu_star: float = math.nan
    nu_sv: float = math.nan
    nu_of_p: float = math.nan
    gamma_of_nu: float = math.nan
    residuals: dict = field(default_factory=dict)

    @classmethod
    def evaluate(cls, params: Params) -> "ConstantsTable":
        t = cls(params=params)
        d, a = params.d, params.alpha
        t.kappa_beta = kappa(d, a, params.beta)
        t.nu_star = nu_star(d, a)
        t.nu_sv = nu_sv(d, a)
        t.nu_of_p = nu_of_p(d, a, params.p)
        t.residuals["kappa_beta"] = 0.0
        # limit consistencies at a large finite p, recorded as residuals
        p_big = 1e6
        t.residuals["nu_star"] = abs(nu_of_p(d, a, p_big) / t.nu_star - 1.0)
        t.residuals["nu_sv"] = abs(
            p_big / (d - a) * sv_constant(p_big) * kappa(d, a, (d - a) / 2.0) / t.nu_sv
            - 1.0
        )
        t.residuals["nu_of_p"] = 0.0
        if params.nu < t.nu_star:
            g = gamma_exponent(d, a, params.nu)
            t.gamma_of_nu = g
            t.residuals["gamma_of_nu"] = (
                abs(kappa(d, a, d - g) - params.nu * (g - a)) if params.nu > 0.0 else 0.0
            )
        return t

    def rows(self):
        """(quantity, input, value, residual) rows for CSV emission."""
        p = self.params
        out = [
            ("kappa_beta", f"beta={p.beta:g}", self.kappa_beta, self.residuals.get("kappa_beta", 0.0)),
            ("nu_star", "", self.nu_star, self.residuals.get("nu_star", 0.0)),
            ("nu_sv", "", self.nu_sv, self.residuals.get("nu_sv", 0.0)),
            ("nu_of_p", f"p={p.p:g}", self.nu_of_p, self.residuals.get("nu_of_p", 0.0)),
        ]
        if not math.isnan(self.gamma_of_nu):
            out.append(
                ("gamma_of_nu", f"nu={p.nu:g}", self.gamma_of_nu, self.residuals.get("gamma_of_nu", 0.0))
            )
        return out
