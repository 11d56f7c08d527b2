"""Acceptance criteria as callable checks, shared by pytest and `frakolm sweep`.

Each criterion returns a dict {id, description, passed, details, runtime_s};
tolerances are fixed here, not configurable.
"""

from __future__ import annotations

import math
import time

import numpy as np

from . import constants as C
from .grid import ScalarField, TorusGrid, constant_field, inner, norm_inf
from .hardy import (
    FamilyRecipe,
    bregman,
    c_exponential,
    c_kolmogorov,
    c_schrodinger,
    c_shifted,
    exponential_probe_members,
    make_family,
    positive_probe_members,
    sv_scalar,
)
from .kernel import kernel_apply, quadratic_form_direct
from .lyapunov import (
    domination_constants,
    g_bounds,
    make_drift,
    make_phi,
    mollify,
)
from .solver import (
    TOperator,
    default_lambda,
    evolve,
    solve_elliptic,
    t_norm,
    uniqueness_probe,
    weak_residual,
)
from .spectral import apply_power, band_limit, fractional_laplacian, plane_wave

D2, A2 = 2, 1.5
DESK = [(2, 1.5), (3, 1.5), (3, 2.0)]


def _result(cid, desc, passed, details, t0):
    return {
        "id": cid,
        "description": desc,
        "passed": bool(passed),
        "details": details,
        "runtime_s": round(time.time() - t0, 3),
    }


def criterion_1():
    t0 = time.time()
    ok = True
    details = {}
    for d in (3, 4, 5, 6):
        r1 = abs(C.nu_star(d, 2.0) / (d - 2.0) - 1.0)
        r2 = abs(C.kappa(d, 2.0, (d - 2) / 2.0) / ((d - 2) / 2.0) ** 2 - 1.0)
        details[f"d={d}"] = {"nu_star_rel": r1, "kappa_rel": r2}
        ok &= r1 <= 1e-12 and r2 <= 1e-12
    r3 = abs(C.nu_sv(4, 2.0) / C.nu_star(4, 2.0) - 1.0)
    details["nu_sv(4,2)"] = r3
    ok &= r3 <= 1e-12
    return _result(1, "classical-limit anchors", ok, details, t0)


def criterion_2():
    t0 = time.time()
    ok = True
    details = {}
    ps = np.logspace(math.log10(1.01), 4.0, 200)
    for d, a in DESK:
        peak = C.kappa(d, a, (d - a) / 2.0)
        vals = np.array([C.kappa(d, a, (d - a) / p) for p in ps])
        below = bool(np.all(vals <= peak * (1.0 + 1e-14)))
        p_star = float(ps[np.argmax(vals)])
        near_two = abs(math.log(p_star / 2.0)) <= math.log(ps[1] / ps[0]) * 1.5
        ns = C.nu_star(d, a)
        nus = np.array([C.nu_of_p(d, a, p) for p in ps])
        mono = bool(np.all(np.diff(nus) > 0.0))
        lim = all(
            abs(C.nu_of_p(d, a, p) / ns - 1.0) <= 2.0 / p for p in (100.0, 1e3, 1e4)
        )
        details[f"d={d},a={a}"] = {
            "kappa_below_peak": below,
            "argmax_p": p_star,
            "monotone": mono,
            "limit": lim,
        }
        ok &= below and near_two and mono and lim
    return _result(2, "kappa maximum at p=2 and nu(p) -> nu_star", ok, details, t0)


def criterion_3():
    t0 = time.time()
    ok = True
    details = {}
    for d, a in DESK:
        ns = C.nu_star(d, a)
        worst = 0.0
        gs = []
        for nu in np.linspace(0.0, ns * (1 - 1e-6), 100):
            g = C.gamma_exponent(d, a, nu)
            gs.append(g)
            if nu > 0.0:
                worst = max(worst, abs(C.kappa(d, a, d - g) - nu * (g - a)))
        endpoint = abs(C.gamma_exponent(d, a, ns * (1 - 1e-6)) - a)
        dec = bool(np.all(np.diff(gs) < 0.0))
        start = gs[0] == float(d)
        details[f"d={d},a={a}"] = {
            "max_residual": worst,
            "endpoint_gap": endpoint,
            "decreasing": dec,
        }
        ok &= worst < 1e-12 and start and endpoint < 1e-3 and dec
    return _result(3, "Lyapunov exponent equation plug-back", ok, details, t0)


def _bandlimited_bump(grid, kmax=7, width=0.65, center=(0.4, -0.3)):
    xs = grid.coords()
    r2 = sum((x - c) ** 2 for x, c in zip(xs, center[: grid.d]))
    u = ScalarField(grid, np.exp(-r2 / width**2))
    return band_limit(u, kmax)


def criterion_4():
    t0 = time.time()
    g = TorusGrid(d=2, N=64)
    worst = 0.0
    half = g.N // 2
    for k0 in range(-half, half):
        for k1 in range(-half, half):
            if k0 == 0 and k1 == 0:
                continue
            xi_a = ((math.pi / 2.0) ** 2 * (k0 * k0 + k1 * k1)) ** (A2 / 2.0)
            u = plane_wave(g, (k0, k1), phase=0.3)
            au = fractional_laplacian(u, A2)
            worst = max(worst, float(np.abs(au.values - xi_a * u.values).max()) / xi_a)
    eig_ok = worst <= 1e-12

    gk = TorusGrid(d=2, N=128)
    u = _bandlimited_bump(gk)
    exact = fractional_laplacian(u, A2)
    got = kernel_apply(u, A2, M=6, levels=4)
    rel_apply = float(np.abs(got.values - exact.values).max()) / norm_inf(exact)

    gq = TorusGrid(d=2, N=256)
    uq = _bandlimited_bump(gq)
    lhs = inner(apply_power(uq, A2, 0.5), apply_power(uq, A2, 0.5))
    rhs = quadratic_form_direct(uq, A2, M=6, levels=4)
    rel_form = abs(rhs - lhs) / lhs

    ok = eig_ok and rel_apply <= 1e-6 and rel_form <= 1e-6
    return _result(
        4,
        "spectral operator: eigenvalues, kernel agreement, quadratic form",
        ok,
        {"eig_worst": worst, "kernel_rel": rel_apply, "form_rel": rel_form},
        t0,
    )


def criterion_5():
    t0 = time.time()
    g = TorusGrid(d=2, N=64)
    p, beta = 3.0, (2 - A2) / 6.0
    phi = make_phi(g, beta, alpha=A2)
    scaling_exact = np.array_equal(
        phi.power(p).field.values, make_phi(g, p * beta, alpha=A2).field.values
    )
    cross = float(
        np.abs(phi.field.values**p - make_phi(g, p * beta, alpha=A2).field.values).max()
    )

    gb = g_bounds(2, A2, 0.25, n_sup=401, n_cell=60)
    corner_gap = abs(gb["sup_87Q"] - gb["corner_value"])

    ds = make_drift(g, A2)
    t = g.radius()
    inside = t <= 1.0
    div_rel = float(
        np.abs(
            ds.div_q.values[inside] - (2 - A2) * t[inside] ** (-A2)
        ).max()
        / np.abs((2 - A2) * t[inside] ** (-A2)).max()
    )

    cs_div, cs_mag = [], []
    for eps in (0.1, 0.01, 0.001):
        dc = domination_constants(mollify(ds, eps))
        cs_div.append(dc["div_domination_C"])
        cs_mag.append(dc["magnitude_domination_C"])
    dom_ok = max(cs_div) < 100.0 and max(cs_mag) < 10.0

    ok = scaling_exact and cross <= 5e-13 and corner_gap <= 1e-10 and div_rel <= 1e-10 and dom_ok
    return _result(
        5,
        "Lyapunov scaling, corner estimate, drift divergence, dominations",
        ok,
        {
            "scaling_bitwise": scaling_exact,
            "scaling_cross": cross,
            "corner_gap": corner_gap,
            "div_rel": div_rel,
            "div_C": cs_div,
            "mag_C": cs_mag,
        },
        t0,
    )


def _stable(a: float, b: float, tol: float) -> bool:
    if a == 0.0 and b == 0.0:
        return True
    return abs(a - b) <= tol * max(a, b)


def criterion_6():
    t0 = time.time()
    details = {}
    ok = True

    # schrodinger across p, N
    sch = {}
    for N in (64, 128):
        g = TorusGrid(d=2, N=N)
        mem = positive_probe_members(g, A2)
        sch[N] = {
            p: max(c_schrodinger(u, p, A2) for u in mem)
            for p in (2.0, 4.0, 16.0, 64.0, 256.0)
        }
    for p in sch[64]:
        ok &= _stable(sch[64][p], sch[128][p], 0.10)
    pos = [v for v in sch[128].values() if v > 0]
    p_band = max(pos) / min(pos)
    ok &= p_band <= 4.0
    details["schrodinger"] = {"sups": sch, "p_band": p_band}

    # kolmogorov
    kol = {}
    for N in (64, 128):
        g = TorusGrid(d=2, N=N)
        ds = mollify(make_drift(g, A2), 0.01)
        mem = positive_probe_members(g, A2)
        kol[N] = max(c_kolmogorov(u, 8.0, ds)["c_emp"] for u in mem)
    ok &= _stable(kol[64], kol[128], 0.10) and np.isfinite(kol[128])
    details["kolmogorov"] = kol

    # exponential across eps, N
    expo = {}
    for N in (64, 128):
        g = TorusGrid(d=2, N=N)
        ds0 = make_drift(g, A2)
        mem = exponential_probe_members(g, A2)
        expo[N] = {
            eps: max(c_exponential(v, mollify(ds0, eps))["c_emp"] for v in mem)
            for eps in (0.1, 0.03, 0.01, 0.003)
        }
    for eps in expo[64]:
        ok &= _stable(expo[64][eps], expo[128][eps], 0.10)
    vals = list(expo[128].values())
    eps_band = max(vals) / min(vals)
    ok &= eps_band <= 2.0
    details["exponential"] = {"sups": expo, "eps_band": eps_band}

    # shifted: p-sweep plus the p=1024 match with the exponential form
    g = TorusGrid(d=2, N=64)
    ds = mollify(make_drift(g, A2), 0.01)
    mem = exponential_probe_members(g, A2)
    sh = {p: max(c_shifted(v, p, ds) for v in mem) for p in (64.0, 256.0, 1024.0)}
    g2 = TorusGrid(d=2, N=128)
    ds2 = mollify(make_drift(g2, A2), 0.01)
    mem2 = exponential_probe_members(g2, A2)
    sh128 = max(c_shifted(v, 1024.0, ds2) for v in mem2)
    ok &= _stable(sh[1024.0], sh128, 0.10)
    sup_e = max(c_exponential(v, ds)["c_emp"] for v in mem)
    match = abs(sh[1024.0] - sup_e) / sup_e
    ok &= match <= 0.01
    details["shifted"] = {"sups": sh, "exp_match_rel": match}

    return _result(6, "Hardy suite: stability and uniformity", ok, details, t0)


def criterion_7():
    t0 = time.time()
    rng = np.random.default_rng(2024)
    a = rng.uniform(-1.0, 1.0, 10**6)
    b = rng.uniform(-1.0, 1.0, 10**6)
    p = rng.uniform(1.0 + 1e-9, 64.0, 10**6)
    breg_min = float(bregman(a, b, p).min())

    ts = rng.uniform(0.0, 50.0, 10**6)
    ss = rng.uniform(0.0, 50.0, 10**6)
    m1, m2, m3 = sv_scalar(ts, ss)
    scale = np.maximum(1.0, 0.5 * (ts + ss) * (np.exp(ts) + np.exp(ss)))
    sv_min = float(min((m1 / scale).min(), (m2 / scale).min(), (m3 / scale).min()))

    g = TorusGrid(d=2, N=32)
    worst = 0.0
    for _ in range(100):
        v = rng.standard_normal(g.shape) * 2.0
        worst = min(worst, float((v * np.sinh(v) - 2.0 * (np.cosh(v) - 1.0)).min()))
        worst = min(worst, float((v * np.sinh(v) - (np.cosh(v) - 1.0)).min()))
    ok = breg_min >= -1e-12 and sv_min >= -1e-12 and worst >= -1e-12
    return _result(
        7,
        "Bregman, scalar SV and cosh/sinh sweeps",
        ok,
        {"bregman_min": breg_min, "sv_scaled_min": sv_min, "field_min": worst},
        t0,
    )


def criterion_8():
    t0 = time.time()
    g = TorusGrid(d=2, N=128)
    fam = make_family(
        g,
        FamilyRecipe(kind="band-limited-positive", seed=5, n_members=1, amplitude=1.5, kmax=4, positive=False),
        A2,
    )
    f = fam.members[0]
    ds0 = make_drift(g, A2)
    ok = True
    sup_ratios = {}
    cs = {}
    for eps in (0.1, 0.01):
        ds = mollify(ds0, eps)
        for lam in (20.0, 50.0, 100.0):
            res = solve_elliptic(lam, f, ds.b_eps, A2)
            sup_ratios[(lam, eps)] = res.apriori["sup_ratio"]
            cs[(lam, eps)] = res.apriori["energy_rhs_coeff"]
            ok &= res.apriori["sup_ratio"] <= 1.0 + 1e-6
    # one C per (d, alpha) across the eps-grid, at each lambda
    for lam in (20.0, 50.0, 100.0):
        pair = [cs[(lam, 0.1)], cs[(lam, 0.01)]]
        ok &= max(pair) / min(pair) <= 1.5

    lam = 20.0
    ds = mollify(ds0, 0.01)
    res = solve_elliptic(lam, f, ds.b_eps, A2)
    rng = np.random.default_rng(4)
    tests = [constant_field(g, 1.0), res.u] + [
        band_limit(ScalarField(g, rng.standard_normal(g.shape)), 8) for _ in range(18)
    ]
    wr = max(weak_residual(res, f, ds.b_eps, A2, tests))
    ok &= wr <= 1e-6 * norm_inf(f)

    uq = uniqueness_probe(lam, f, ds.b_eps, A2)
    ok &= uq["l2_gap"] <= 1e-9

    return _result(
        8,
        "elliptic a priori bounds, weak identity, uniqueness",
        ok,
        {
            "sup_ratios": {f"{k}": v for k, v in sup_ratios.items()},
            "energy_C": {f"{k}": v for k, v in cs.items()},
            "weak_residual_max": wr,
            "uniqueness_gap": uq["l2_gap"],
        },
        t0,
    )


def criterion_9():
    t0 = time.time()
    ok = True

    g = TorusGrid(d=2, N=64)
    fam = make_family(
        g,
        FamilyRecipe(kind="band-limited-positive", seed=5, n_members=1, amplitude=1.5, kmax=4, positive=False),
        A2,
    )
    f0 = fam.members[0]
    ds0 = make_drift(g, A2)

    ev0 = evolve(f0, ds0.b * 0.0, A2, t_end=2.0, dt=0.01)
    norms = np.array(ev0.orlicz_norms)
    mono = bool(np.all(np.diff(norms) <= 1e-8 * norms[:-1]))
    ok &= mono

    rates = {}
    for N in (64, 128):
        gg = TorusGrid(d=2, N=N)
        ff = make_family(
            gg,
            FamilyRecipe(kind="band-limited-positive", seed=5, n_members=1, amplitude=1.5, kmax=4, positive=False),
            A2,
        ).members[0]
        for eps in (0.03, 0.01):
            ds = mollify(make_drift(gg, A2), eps)
            bmax = ds.b_eps.magnitude().values.max()
            ev = evolve(ff, ds.b_eps, A2, t_end=1.0, dt=0.4 * gg.h / bmax)
            rates[(N, eps)] = ev.growth_rate
    ok &= abs(rates[(64, 0.03)] - rates[(64, 0.01)]) <= 0.15 * abs(rates[(64, 0.03)])
    ok &= abs(rates[(64, 0.01)] - rates[(128, 0.01)]) <= 0.15 * abs(rates[(64, 0.01)])

    # resolvent table above 4 * omega0_emp
    ds = mollify(ds0, 0.01)
    mem = exponential_probe_members(g, A2)
    c_sup = max(c_exponential(v, ds)["c_emp"] for v in mem)
    lam0 = default_lambda(ds0.b, A2)
    omega0 = max(max(rates.values()), c_sup, lam0)
    from .solver import resolvent_bound_check

    rows = resolvent_bound_check([4.0 * omega0, 8.0 * omega0], f0, ds.b_eps, A2, omega0)
    ok &= all(r["ratio"] <= 1.0 for r in rows)

    bmax = ds.b_eps.magnitude().values.max()
    dt0 = 0.4 * g.h / bmax
    ends = []
    for dt in (dt0, dt0 / 2.0, dt0 / 4.0):
        ev = evolve(f0, ds.b_eps, A2, t_end=0.5, dt=dt)
        ends.append(ev.orlicz_norms[-1])
    order = math.log2(abs(ends[0] - ends[2]) / abs(ends[1] - ends[2]))
    ok &= order >= 1.8

    return _result(
        9,
        "parabolic contractivity, growth-rate stability, dt order",
        ok,
        {
            "zero_drift_monotone": mono,
            "omega_emp": {f"{k}": v for k, v in rates.items()},
            "omega0": omega0,
            "resolvent_ratios": [r["ratio"] for r in rows],
            "dt_order": order,
        },
        t0,
    )


def criterion_10():
    t0 = time.time()
    ok = True
    norms = {}
    for N in (128, 256):
        g = TorusGrid(d=2, N=N)
        ds = make_drift(g, A2)
        norms[N] = t_norm(TOperator(drift=ds.b, alpha=A2, lam=8.0), iters=120)["t_norm"]
    ok &= np.isfinite(norms[256])
    ok &= abs(norms[256] - norms[128]) <= 0.15 * norms[128]

    g = TorusGrid(d=2, N=64)
    ds0 = make_drift(g, A2)
    op = TOperator(drift=ds0.b, alpha=A2, lam=8.0)
    rng = np.random.default_rng(3)
    adj_worst = 0.0
    for _ in range(5):
        u = band_limit(ScalarField(g, rng.standard_normal(g.shape)), 10)
        v = band_limit(ScalarField(g, rng.standard_normal(g.shape)), 10)
        lhs = inner(op.apply(u), v)
        rhs = inner(u, op.apply_adjoint(v))
        adj_worst = max(adj_worst, abs(lhs - rhs) / max(abs(lhs), 1.0))
    ok &= adj_worst <= 1e-10

    gsm = band_limit(ScalarField(g, rng.standard_normal(g.shape)), 4)
    hsm = band_limit(ScalarField(g, rng.standard_normal(g.shape)), 4)
    probes = []
    for n in range(6):
        ds = mollify(ds0, 0.1 * 2.0 ** (-n))
        te = TOperator(drift=ds.b_eps, alpha=A2, lam=8.0)
        probes.append(abs(inner(op.apply(gsm) - te.apply(gsm), hsm)))
    ok &= all(a > b for a, b in zip(probes, probes[1:]))

    return _result(
        10,
        "T operator: norm stability, adjoint, weak convergence",
        ok,
        {"t_norms": norms, "adjoint_worst": adj_worst, "probes": probes},
        t0,
    )


ALL_CRITERIA = [
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
    criterion_10,
]


def run_all():
    return [fn() for fn in ALL_CRITERIA]
