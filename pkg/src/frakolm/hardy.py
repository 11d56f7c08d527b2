"""Empirical-constant estimators for the Hardy-type inequalities.

The inequalities assert existence of a constant c = c(d, alpha); what is
checkable is the family-sup of the smallest constant making each inequality
hold for concrete smooth members, and the uniformity of that constant in p,
epsilon and grid resolution.  Families are generated from seeded spectral
coefficients, so the same member can be sampled on any grid (refinement
stability compares the identical function at N and 2N).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import kappa, nu_of_p, sv_constant
from .grid import ScalarField, TorusGrid, inner, mean
from .lyapunov import DriftSet, corner_correction, singular_inner, singular_weight
from .solver import TOperator, quarter_power
from .spectral import apply_power, fractional_laplacian, gradient, heat


@dataclass(frozen=True)
class FamilyRecipe:
    """Seed-reproducible family of smooth test fields.

    Kinds: band-limited-positive (exp of random trig polynomials),
    mollified-lyapunov (heat-flowed singular profiles, the sharpness probes),
    shifted-bump (off-centre Gaussians through exp), log-profile (heat-
    mollified log phi_gamma, whose exponential is the Lyapunov profile), and
    origin-bump (amplitude sweep of bumps sitting on the drift singularity).
    """

    kind: str
    seed: int = 2024
    n_members: int = 20
    amplitude: float = 0.5
    kmax: int = 4
    betas: tuple = (0.1, 0.25, 0.4)
    deltas: tuple = (0.1, 0.01)
    positive: bool = True


@dataclass
class TestFamily:
    recipe: FamilyRecipe
    members: list  # ScalarField


def _trig_member(grid: TorusGrid, rng: np.random.Generator, amplitude: float, kmax: int) -> ScalarField:
    """Random band-limited trig polynomial with sum|coeff| = amplitude.

    Coefficients are drawn independently of the grid, so the member is the
    same function at every N.
    """
    d = grid.d
    xs = grid.coords()
    vals = np.zeros(grid.shape)
    coeffs = []
    for kv in np.ndindex(*(2 * kmax + 1,) * d):
        k = tuple(int(v) - kmax for v in kv)
        if all(c == 0 for c in k):
            continue
        a = rng.standard_normal() / (1.0 + sum(c * c for c in k))
        ph = rng.uniform(0.0, 2.0 * np.pi)
        coeffs.append((k, a, ph))
    scale = amplitude / sum(abs(a) for _, a, _ in coeffs)
    for k, a, ph in coeffs:
        arg = sum((np.pi / 2.0) * c * x for c, x in zip(k, xs)) + ph
        vals += scale * a * np.cos(arg)
    return ScalarField(grid, vals)


def _bump_member(grid: TorusGrid, rng: np.random.Generator, amplitude: float) -> ScalarField:
    center = rng.uniform(-2.0, 2.0, grid.d)
    width = rng.uniform(0.3, 0.7)
    xs = grid.coords()
    # nearest periodic image distance keeps the bump smooth across the seam
    r2 = sum((np.mod(x - c + 2.0, 4.0) - 2.0) ** 2 for x, c in zip(xs, center))
    return ScalarField(grid, amplitude * np.exp(-r2 / width**2))


def make_family(grid: TorusGrid, recipe: FamilyRecipe, alpha: float) -> TestFamily:
    rng = np.random.default_rng(recipe.seed)
    members: list[ScalarField] = []
    if recipe.kind == "band-limited-positive":
        for _ in range(recipe.n_members):
            w = _trig_member(grid, rng, recipe.amplitude, recipe.kmax)
            members.append(ScalarField(grid, np.exp(w.values)) if recipe.positive else w)
    elif recipe.kind == "mollified-lyapunov":
        for beta in recipe.betas:
            for delta in recipe.deltas:
                phi = singular_weight(grid, beta)
                members.append(heat(phi, alpha, delta))
    elif recipe.kind == "shifted-bump":
        for _ in range(recipe.n_members):
            g = _bump_member(grid, rng, recipe.amplitude)
            members.append(ScalarField(grid, np.exp(g.values)) if recipe.positive else g)
    elif recipe.kind == "log-profile":
        from .lyapunov import cutoff_a

        t = grid.radius()
        log_phi = -cutoff_a(t) * np.log(t)
        for beta in recipe.betas:
            for delta in recipe.deltas:
                members.append(heat(ScalarField(grid, beta * log_phi), alpha, delta))
    elif recipe.kind == "origin-bump":
        xs = grid.coords()
        r2 = sum(x**2 for x in xs)
        for amp in np.linspace(0.5, recipe.amplitude, recipe.n_members):
            width = rng.uniform(0.3, 0.8)
            members.append(ScalarField(grid, amp * np.exp(-r2 / width**2)))
    else:
        raise ValueError(f"unknown family recipe {recipe.kind!r}")
    return TestFamily(recipe=recipe, members=members)


def exponential_probe_members(grid: TorusGrid, alpha: float, seed: int = 2024) -> list:
    """Sign-changing smooth members stressing the intrinsic inequality:
    random trig fields, heat-mollified log profiles (whose exponentials are
    the Lyapunov profiles), and bumps sitting on the drift singularity."""
    fams = [
        make_family(
            grid,
            FamilyRecipe(kind="band-limited-positive", seed=seed, n_members=6, amplitude=1.5, positive=False),
            alpha,
        ),
        make_family(
            grid,
            FamilyRecipe(kind="log-profile", seed=seed, betas=(0.3, 0.6, 0.9), deltas=(0.1, 0.01)),
            alpha,
        ),
        make_family(
            grid,
            FamilyRecipe(kind="origin-bump", seed=seed, n_members=6, amplitude=2.5),
            alpha,
        ),
    ]
    return [u for f in fams for u in f.members]


def positive_probe_members(grid: TorusGrid, alpha: float, seed: int = 2024, amplitude: float = 0.5) -> list:
    """Strictly positive members for the L^p forms: exp-trig fields plus the
    mollified Lyapunov sharpness probes."""
    fams = [
        make_family(
            grid,
            FamilyRecipe(kind="band-limited-positive", seed=seed, n_members=8, amplitude=amplitude),
            alpha,
        ),
        make_family(grid, FamilyRecipe(kind="mollified-lyapunov", seed=seed), alpha),
    ]
    return [u for f in fams for u in f.members]


# ---------------------------------------------------------------------------
# per-member empirical constants


def c_schrodinger(u: ScalarField, p: float, alpha: float) -> float:
    """Smallest c with kappa_{(d-a)/p} <phi_a, u^p> <= <Au, u^{p-1}> + (c/p) <u^p>."""
    if p <= 1.0:
        raise ValueError(f"p={p}: need p > 1")
    if u.values.min() <= 0.0:
        raise ValueError("member must be strictly positive")
    grid = u.grid
    d = grid.d
    up = u**p
    lhs = kappa(d, alpha, (d - alpha) / p) * singular_inner(grid, alpha, up.values)
    disp = inner(fractional_laplacian(u, alpha), u ** (p - 1.0))
    return p * max(0.0, lhs - disp) / mean(up)


def _centered_div_inner(ds: DriftSet, svals: np.ndarray) -> float:
    """<div q, s> with exact origin cells and the zero-mean constraint enforced.

    <div q> = 0 holds exactly on the torus; subtracting the quadrature's own
    residue of that identity keeps constants in the kernel of the pairing.
    """
    grid = ds.grid
    d, alpha = grid.d, ds.alpha
    raw = inner(ds.div_q, ScalarField(grid, svals)) + (d - alpha) * corner_correction(
        grid, alpha, svals
    )
    ones = np.ones(grid.shape)
    offset = inner(ds.div_q, ScalarField(grid, ones)) + (d - alpha) * corner_correction(
        grid, alpha, ones
    )
    return raw - offset * float(svals.mean())


def c_kolmogorov(u: ScalarField, p: float, ds: DriftSet) -> dict:
    """Smallest c in the drift form, plus the integration-by-parts cross-check.

    The drift pairing is taken in its integrated-by-parts form (the route the
    proof uses), which only needs the closed-form divergence and dodges the
    |x|^{1-alpha} product quadrature; the direct pairing is reported next to
    it as the discretisation diagnostic.
    """
    if u.values.min() <= 0.0:
        raise ValueError("member must be strictly positive")
    grid = u.grid
    d, alpha = grid.d, ds.alpha
    up = u**p
    upm1 = u ** (p - 1.0)
    drift_direct = inner(ds.q_eps.dot(gradient(u)), upm1)
    # <E_eps div q, u^p> = <div q, E_eps u^p>: pair the closed-form singular
    # divergence against the mollified mass, then integrate the origin cells
    # of its (d-alpha)|x|^{-alpha} part exactly
    w = heat(u**p, ds.alpha1, ds.epsilon) if ds.epsilon > 0.0 else up
    ibp_inner = _centered_div_inner(ds, w.values)
    drift_ibp = -ibp_inner / p
    coef = p / (d - alpha) * kappa(d, alpha, (d - alpha) / p)
    disp = inner(fractional_laplacian(u, alpha), upm1)
    c_emp = p * max(0.0, coef * abs(drift_ibp) - disp) / mean(up)
    return {
        "c_emp": c_emp,
        "drift_direct": drift_direct,
        "drift_ibp": drift_ibp,
        "ibp_gap": abs(drift_direct - drift_ibp)
        / max(abs(drift_direct), abs(drift_ibp), 1e-300),
    }


def c_shifted(v: ScalarField, p: float, ds: DriftSet) -> float:
    """Shifted form with u = 1 + v/p; the constant is no longer divided by p."""
    grid = v.grid
    d, alpha = grid.d, ds.alpha
    ratio = v.values / p
    if ratio.min() <= -1.0:
        raise ValueError("1 + v/p must stay positive on the grid")
    w = np.exp((p - 1.0) * np.log1p(ratio))  # (1+v/p)^{p-1}, stable for large p
    wp = np.exp(p * np.log1p(ratio))
    wf = ScalarField(grid, w)
    coef = p / (d - alpha) * kappa(d, alpha, (d - alpha) / p)
    drift = inner(ds.q_eps.dot(gradient(v)), wf)
    disp = inner(fractional_laplacian(v, alpha), wf)
    denom = mean(ScalarField(grid, wp))
    return max(0.0, coef * abs(drift) - disp) / denom


def c_exponential(u: ScalarField, ds: DriftSet) -> dict:
    """Intrinsic form: |<b_eps.grad u, e^u>| <= <Au, e^u> + c <e^u> and the
    sinh/cosh variant obtained by adding the +-u inequalities."""
    grid = u.grid
    alpha = ds.alpha
    eu = ScalarField(grid, np.exp(u.values))
    au = fractional_laplacian(u, alpha)
    gu = gradient(u)
    drift = inner(ds.b_eps.dot(gu), eu)
    c_exp = max(0.0, abs(drift) - inner(au, eu)) / mean(eu)
    sh = ScalarField(grid, np.sinh(u.values))
    ch = ScalarField(grid, np.cosh(u.values))
    drift_s = inner(ds.b_eps.dot(gu), sh)
    c_sinh = max(0.0, abs(drift_s) - inner(au, sh)) / mean(ch)
    return {"c_emp": c_exp, "c_sinh": c_sinh}


def c_posteriori(u: ScalarField, ds: DriftSet, lam: float, c: float) -> dict:
    """Margin of the a posteriori form with the operator T at shift lam."""
    grid = u.grid
    alpha = ds.alpha
    op = TOperator(drift=ds.b_eps, alpha=alpha, lam=lam)
    eu = ScalarField(grid, np.exp(u.values))
    lhs = abs(inner(op.apply(apply_power(u, alpha, 0.5, lam)), apply_power(eu, alpha, 0.5, lam)))
    rhs = inner(quarter_power(u, alpha), quarter_power(eu, alpha)) + c * mean(eu)
    direct = abs(inner(ds.b_eps.dot(gradient(u)), eu))
    return {"margin": rhs - lhs, "t_form": lhs, "direct_drift": direct}


# ---------------------------------------------------------------------------
# scalar sweeps


def bregman(a, b, p):
    """F_p(a,b) = |b|^p - |a|^p - p a^{p-1}(b-a), with a^{p-1} = a|a|^{p-2}."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    p = np.asarray(p, dtype=float)
    a_pow = np.sign(a) * np.abs(a) ** (p - 1.0)
    return np.abs(b) ** p - np.abs(a) ** p - p * a_pow * (b - a)


def sv_scalar(t, s):
    """Margins of the three scalar inequalities with phi = 2 sinh, G = 2 sinh(./2),
    c_phi = 2; all must be nonnegative for t, s >= 0."""
    t = np.asarray(t, dtype=float)
    s = np.asarray(s, dtype=float)
    phi_t, phi_s = np.exp(t) - np.exp(-t), np.exp(s) - np.exp(-s)
    g_t, g_s = np.exp(t / 2.0) - np.exp(-t / 2.0), np.exp(s / 2.0) - np.exp(-s / 2.0)
    m1 = 0.5 * (t - s) * (phi_t - phi_s) - (g_t - g_s) ** 2
    m2 = 0.5 * (t + s) * (phi_t + phi_s) - (g_t + g_s) ** 2
    m3 = 0.5 * s * phi_s - g_s**2
    return m1, m2, m3


def sv2_margin(u: ScalarField, alpha: float) -> dict:
    """Torus analogue of the sinh Stroock-Varopoulos form.

    Reports both the margin against the literal constant 8 and the empirical
    best constant <Au, sinh u> / <|(-D)^{a/4} sinh(u/2)|^2>; on the torus the
    low-mode spectral gap makes the best constant 4 |xi_min|^{a/2} in the
    small-amplitude limit, so 8 can genuinely fail for low-mode fields.
    """
    grid = u.grid
    au = fractional_laplacian(u, alpha)
    sh = ScalarField(grid, np.sinh(u.values))
    half = quarter_power(ScalarField(grid, np.sinh(u.values / 2.0)), alpha)
    num = inner(au, sh)
    den = inner(half, half)
    if den == 0.0:
        return {"margin_8": num, "c_best": math.inf}
    return {"margin_8": num - 8.0 * den, "c_best": num / den}


def constant_comparison(d: int, alpha: float, p_grid) -> list:
    """Rows comparing the direct constant with the Stroock-Varopoulos route."""
    if alpha >= 2.0:
        raise ValueError("comparison is contentful only for alpha < 2")
    k2 = kappa(d, alpha, (d - alpha) / 2.0)
    rows = []
    for p in p_grid:
        sv_route = sv_constant(p) * k2
        rows.append(
            {
                "p": p,
                "sv_weighted_kappa": sv_route,
                "kappa_p": kappa(d, alpha, (d - alpha) / p),
                "nu_of_p": nu_of_p(d, alpha, p),
                "nu_sv_route": p / (d - alpha) * sv_route,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# reports


@dataclass
class HardyReport:
    inequality: str
    per_member: list
    family_sup: float
    grids: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    @property
    def finite(self) -> bool:
        return np.isfinite(self.family_sup)


def schrodinger_report(grid: TorusGrid, alpha: float, p: float, recipe: FamilyRecipe) -> HardyReport:
    fam = make_family(grid, recipe, alpha)
    cs = [c_schrodinger(u, p, alpha) for u in fam.members]
    return HardyReport(
        inequality=f"schrodinger[p={p:g}]",
        per_member=cs,
        family_sup=float(max(cs)),
        grids={"N": grid.N, "p": p},
    )


def kolmogorov_report(grid: TorusGrid, ds: DriftSet, p: float, recipe: FamilyRecipe) -> HardyReport:
    fam = make_family(grid, recipe, ds.alpha)
    outs = [c_kolmogorov(u, p, ds) for u in fam.members]
    cs = [o["c_emp"] for o in outs]
    return HardyReport(
        inequality=f"kolmogorov[p={p:g},eps={ds.epsilon:g}]",
        per_member=cs,
        family_sup=float(max(cs)),
        grids={"N": grid.N, "p": p, "eps": ds.epsilon},
        extras={"max_ibp_gap": float(max(o["ibp_gap"] for o in outs))},
    )


def shifted_report(grid: TorusGrid, ds: DriftSet, p: float, recipe: FamilyRecipe) -> HardyReport:
    fam = make_family(grid, recipe, ds.alpha)
    cs = [c_shifted(v, p, ds) for v in fam.members]
    return HardyReport(
        inequality=f"shifted[p={p:g},eps={ds.epsilon:g}]",
        per_member=cs,
        family_sup=float(max(cs)),
        grids={"N": grid.N, "p": p, "eps": ds.epsilon},
    )


def exponential_report(grid: TorusGrid, ds: DriftSet, recipe: FamilyRecipe) -> HardyReport:
    fam = make_family(grid, recipe, ds.alpha)
    outs = [c_exponential(v, ds) for v in fam.members]
    cs = [o["c_emp"] for o in outs]
    return HardyReport(
        inequality=f"exponential[eps={ds.epsilon:g}]",
        per_member=cs,
        family_sup=float(max(cs)),
        grids={"N": grid.N, "eps": ds.epsilon},
        extras={"sup_c_sinh": float(max(o["c_sinh"] for o in outs))},
    )
