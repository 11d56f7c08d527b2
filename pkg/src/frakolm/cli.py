"""Command-line entry point wiring configs to the verification modules.

Every output (CSV or JSON) carries a run manifest: JSON reports embed it
under "manifest", CSV files get a sidecar `<path>.manifest.json`.  Outputs
are deterministic for a fixed config and version up to the timestamp field.

Exit codes: 0 success, 2 config error, 3 numerical-tolerance failure,
4 solver non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from datetime import datetime, timezone

import numpy as np

from . import __version__
from . import constants as C
from .constants import DomainError
from .grid import GridError, ScalarField, TorusGrid, load_field, norm_inf
from .kernel import TruncationError, kernel_apply
from .lyapunov import (
    check_supermedian,
    domination_constants,
    g_bounds,
    make_drift,
    mollify,
    riesz_eigen_check,
)
from .orlicz import orlicz_eval
from .solver import (
    SolverConvergenceError,
    TOperator,
    default_lambda,
    evolve,
    solve_elliptic,
    t_norm,
    weak_residual,
)
from .spectral import apply_power, band_limit, fractional_laplacian, plane_wave

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_TOLERANCE = 3
EXIT_SOLVER = 4


def _config_hash(cfg: dict) -> str:
    canon = json.dumps(cfg, sort_keys=True, default=str)
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


def make_manifest(command: str, cfg: dict, t0: float, extras: dict | None = None) -> dict:
    m = {
        "version": __version__,
        "command": command,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "config": cfg,
        "config_hash": _config_hash(cfg),
        "wall_time_s": round(time.time() - t0, 3),
    }
    if extras:
        m["constants"] = extras
    return m


def write_json(path, payload: dict):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1, sort_keys=True)
        fh.write("\n")


def write_csv(path, header, rows, manifest: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            # shortest round-trip float text
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    write_json(str(path) + ".manifest.json", manifest)


def _threads(args) -> int:
    if getattr(args, "threads", None):
        return args.threads
    env = os.environ.get("FRAKOLM_THREADS")
    return int(env) if env else 1


def _emit(args, payload: dict) -> None:
    out = getattr(args, "out", None)
    if out:
        write_json(out, payload)
    else:
        json.dump(payload, sys.stdout, indent=1, sort_keys=True)
        sys.stdout.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_constants(args):
    t0 = time.time()
    params = C.Params(
        d=args.d, alpha=args.alpha, beta=args.beta, p=args.p, nu=args.nu
    )
    table = C.ConstantsTable.evaluate(params)
    rows = [(q, i, v, r) for q, i, v, r in table.rows()]
    cfg = vars(args).copy()
    cfg.pop("func", None)
    manifest = make_manifest("constants", cfg, t0)
    if args.out:
        write_csv(args.out, ["quantity", "input", "value", "residual"], rows, manifest)
    else:
        for r in rows:
            print(",".join(map(str, r)))
    return EXIT_OK


def cmd_gamma_exponent(args):
    t0 = time.time()
    ns = C.nu_star(args.d, args.alpha)
    nus = np.linspace(0.0, ns * (1.0 - 1e-9), args.points)
    rows = []
    for nu in nus:
        g = C.gamma_exponent(args.d, args.alpha, float(nu))
        res = abs(C.kappa(args.d, args.alpha, args.d - g) - nu * (g - args.alpha)) if nu > 0 else 0.0
        rows.append((float(nu), g, res))
    cfg = vars(args).copy()
    cfg.pop("func", None)
    extras = {
        "d": args.d,
        "alpha": args.alpha,
        "nu_star": ns,
        "nu_sv": C.nu_sv(args.d, args.alpha),
    }
    manifest = make_manifest("gamma-exponent", cfg, t0, extras=extras)
    write_csv(args.out, ["nu", "gamma", "residual"], rows, manifest)
    return EXIT_OK


def cmd_spectral_check(args):
    t0 = time.time()
    grid = TorusGrid(d=args.d, N=args.n)
    rng = np.random.default_rng(args.seed)
    report = {}

    worst = 0.0
    half = grid.N // 2
    ks = [(1, 0), (0, 3), (2, 2), (half - 1, -half + 2)]
    for kvec in ks:
        kv = kvec + (0,) * (args.d - 2)
        xi = (np.pi / 2.0) * np.sqrt(sum(k * k for k in kv))
        u = plane_wave(grid, kv, phase=0.3)
        au = fractional_laplacian(u, args.alpha)
        worst = max(worst, float(np.abs(au.values - xi**args.alpha * u.values).max() / xi**args.alpha))
    report["eigenvalue_worst_rel"] = worst

    u = band_limit(ScalarField(grid, rng.standard_normal(grid.shape)), max(2, grid.N // 8))
    v = apply_power(apply_power(u, args.alpha, 0.5, 2.0), args.alpha, 0.5, 2.0)
    w = apply_power(u, args.alpha, 1.0, 2.0)
    report["power_semigroup_gap"] = float(np.abs(v.values - w.values).max())
    back = apply_power(apply_power(u, args.alpha, -1.0, 3.0), args.alpha, 1.0, 3.0)
    report["resolvent_identity_gap"] = float(np.abs(back.values - u.values).max())

    if args.alpha < 2.0 and args.d == 2:
        bump = band_limit(
            ScalarField(grid, np.exp(-(grid.radius() - 0.0) ** 2)), max(2, grid.N // 16)
        )
        exact = fractional_laplacian(bump, args.alpha)
        got = kernel_apply(bump, args.alpha, M=args.images)
        report["kernel_agreement_rel"] = float(
            np.abs(got.values - exact.values).max() / max(norm_inf(exact), 1e-300)
        )

    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload = {"report": report, "manifest": make_manifest("spectral-check", cfg, t0)}
    _emit(args, payload)
    tol_ok = report["eigenvalue_worst_rel"] <= 1e-12
    return EXIT_OK if tol_ok else EXIT_TOLERANCE


def cmd_drift_report(args):
    t0 = time.time()
    grid = TorusGrid(d=args.d, N=args.n)
    ds0 = make_drift(grid, args.alpha)
    ds = mollify(ds0, args.eps)
    dom = domination_constants(ds)
    margin, c3 = check_supermedian(grid, args.alpha, args.eps, ds.alpha1)
    gb = g_bounds(args.d, args.alpha, args.beta, n_sup=201, n_cell=60)
    eigen = riesz_eigen_check(grid, args.alpha, args.beta) if grid.N >= 128 else None
    payload = {
        "dominations": dom,
        "supermedian_C3": c3,
        "supermedian_margin_max": float(margin.values.max()),
        "g_bounds": {
            "sup_87Q": gb["sup_87Q"],
            "corner_value": gb["corner_value"],
            "l1_cells": {str(k): v for k, v in gb["l1_cells"].items()},
        },
        "riesz_eigen": eigen,
        "alpha1": ds.alpha1,
    }
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("drift-report", cfg, t0)
    _emit(args, payload)
    return EXIT_OK


def cmd_orlicz_norm(args):
    t0 = time.time()
    u = load_field(args.infile)
    ev = orlicz_eval(u)
    payload = {
        "norm": ev.norm,
        "bracket": list(ev.bracket),
        "iterations": ev.iterations,
        "tol": ev.tol,
    }
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("orlicz-norm", cfg, t0)
    _emit(args, payload)
    return EXIT_OK


def cmd_verify_hardy(args):
    from .hardy import (
        exponential_probe_members,
        positive_probe_members,
        c_exponential,
        c_kolmogorov,
        c_posteriori,
        c_schrodinger,
        c_shifted,
    )
    from concurrent.futures import ThreadPoolExecutor

    t0 = time.time()
    grid = TorusGrid(d=args.d, N=args.n)
    p_grid = [float(p) for p in args.p_grid.split(",")] if args.p_grid else [2.0, 8.0]
    eps_grid = [float(e) for e in args.eps_grid.split(",")] if args.eps_grid else [0.01]
    nthreads = _threads(args)

    def fam_map(fn, members):
        if nthreads > 1:
            with ThreadPoolExecutor(max_workers=nthreads) as ex:
                return list(ex.map(fn, members))
        return [fn(u) for u in members]

    ds0 = make_drift(grid, args.alpha)
    reports = []
    if args.ineq == "schrodinger":
        mem = positive_probe_members(grid, args.alpha, seed=args.seed)
        for p in p_grid:
            cs = fam_map(lambda u, p=p: c_schrodinger(u, p, args.alpha), mem)
            reports.append({"inequality": f"schrodinger[p={p:g}]", "family_sup": max(cs), "per_member": cs})
    elif args.ineq == "kolmogorov":
        mem = positive_probe_members(grid, args.alpha, seed=args.seed)
        for eps in eps_grid:
            ds = mollify(ds0, eps)
            for p in p_grid:
                outs = fam_map(lambda u, p=p, ds=ds: c_kolmogorov(u, p, ds), mem)
                reports.append(
                    {
                        "inequality": f"kolmogorov[p={p:g},eps={eps:g}]",
                        "family_sup": max(o["c_emp"] for o in outs),
                        "max_ibp_gap": max(o["ibp_gap"] for o in outs),
                        "per_member": [o["c_emp"] for o in outs],
                    }
                )
    elif args.ineq == "shifted":
        mem = exponential_probe_members(grid, args.alpha, seed=args.seed)
        for eps in eps_grid:
            ds = mollify(ds0, eps)
            for p in p_grid:
                cs = fam_map(lambda v, p=p, ds=ds: c_shifted(v, p, ds), mem)
                reports.append(
                    {"inequality": f"shifted[p={p:g},eps={eps:g}]", "family_sup": max(cs), "per_member": cs}
                )
    elif args.ineq == "exponential":
        mem = exponential_probe_members(grid, args.alpha, seed=args.seed)
        for eps in eps_grid:
            ds = mollify(ds0, eps)
            outs = fam_map(lambda v, ds=ds: c_exponential(v, ds), mem)
            reports.append(
                {
                    "inequality": f"exponential[eps={eps:g}]",
                    "family_sup": max(o["c_emp"] for o in outs),
                    "sup_c_sinh": max(o["c_sinh"] for o in outs),
                    "per_member": [o["c_emp"] for o in outs],
                }
            )
    elif args.ineq == "posteriori":
        from .hardy import FamilyRecipe, make_family

        mem = exponential_probe_members(grid, args.alpha, seed=args.seed)
        eps = eps_grid[0]
        ds = mollify(ds0, eps)
        c_sup = max(c_exponential(v, ds)["c_emp"] for v in mem)
        lam = max(args.lam, default_lambda(ds0.b, args.alpha))
        rough = make_family(
            grid, FamilyRecipe(kind="log-profile", betas=(0.3, 0.6), deltas=(0.01,)), args.alpha
        )
        outs = [c_posteriori(u, ds, lam=lam, c=c_sup) for u in rough.members]
        reports.append(
            {
                "inequality": f"posteriori[eps={eps:g},lam={lam:g}]",
                "margins": [o["margin"] for o in outs],
                "c_used": c_sup,
            }
        )
    else:
        raise DomainError(f"unknown inequality {args.ineq!r}")

    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload = {"reports": reports, "manifest": make_manifest("verify-hardy", cfg, t0)}
    _emit(args, payload)
    return EXIT_OK


def cmd_verify_sv(args):
    from .hardy import exponential_probe_members, sv2_margin, sv_scalar

    t0 = time.time()
    rng = np.random.default_rng(args.seed)
    t = rng.uniform(0.0, 50.0, args.samples)
    s = rng.uniform(0.0, 50.0, args.samples)
    m1, m2, m3 = sv_scalar(t, s)
    scale = np.maximum(1.0, 0.5 * (t + s) * (np.exp(t) + np.exp(s)))
    scalar_min = float(min((m1 / scale).min(), (m2 / scale).min(), (m3 / scale).min()))

    grid = TorusGrid(d=args.d, N=args.n)
    mem = exponential_probe_members(grid, args.alpha, seed=args.seed)
    outs = [sv2_margin(u, args.alpha) for u in mem]
    finite = [o["c_best"] for o in outs if np.isfinite(o["c_best"])]
    payload = {
        "scalar_scaled_min": scalar_min,
        "sv2_min_c_best": min(finite),
        "sv2_flag_below_8": bool(min(finite) < 8.0),
        "sv2_margins_8": [o["margin_8"] for o in outs],
    }
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("verify-sv", cfg, t0)
    _emit(args, payload)
    return EXIT_OK if scalar_min >= -1e-12 else EXIT_TOLERANCE


def cmd_compare_constants(args):
    from .hardy import constant_comparison

    t0 = time.time()
    ps = np.logspace(np.log10(1.01), 4.0, args.points)
    rows = constant_comparison(args.d, args.alpha, ps)
    table = [
        (r["p"], r["sv_weighted_kappa"], r["kappa_p"], r["nu_of_p"], r["nu_sv_route"])
        for r in rows
    ]
    cfg = vars(args).copy()
    cfg.pop("func", None)
    extras = {
        "d": args.d,
        "alpha": args.alpha,
        "nu_star": C.nu_star(args.d, args.alpha),
        "nu_sv": C.nu_sv(args.d, args.alpha),
    }
    manifest = make_manifest("compare-constants", cfg, t0, extras=extras)
    write_csv(
        args.out,
        ["p", "sv_weighted_kappa", "kappa_p", "nu_of_p", "nu_sv_route"],
        table,
        manifest,
    )
    return EXIT_OK


def cmd_t_norm(args):
    t0 = time.time()
    grid = TorusGrid(d=args.d, N=args.n)
    ds = mollify(make_drift(grid, args.alpha), args.eps)
    lam = args.lam if args.lam > 0 else default_lambda(ds.b, args.alpha)
    out = t_norm(TOperator(drift=ds.b_eps if args.eps > 0 else ds.b, alpha=args.alpha, lam=lam))
    payload = {"t_norm": out["t_norm"], "converged": out["converged"], "lam": lam}
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("t-norm", cfg, t0)
    _emit(args, payload)
    return EXIT_OK if out["converged"] else EXIT_TOLERANCE


def _preset_field(grid: TorusGrid, name: str, seed: int) -> ScalarField:
    if name == "mode":
        return plane_wave(grid, (2, 1) + (0,) * (grid.d - 2))
    if name == "bump":
        r2 = sum((x - 0.4) ** 2 for x in grid.coords())
        return band_limit(ScalarField(grid, np.exp(-r2 / 0.4)), grid.N // 8)
    if name == "random":
        rng = np.random.default_rng(seed)
        return band_limit(ScalarField(grid, rng.standard_normal(grid.shape)), 5)
    return load_field(name)


def cmd_solve_elliptic(args):
    t0 = time.time()
    grid = TorusGrid(d=args.d, N=args.n)
    f = _preset_field(grid, args.f, args.seed)
    ds = mollify(make_drift(grid, args.alpha), args.eps)
    drift = ds.b_eps
    res = solve_elliptic(args.lam, f, drift, args.alpha)
    rng = np.random.default_rng(args.seed)
    tests = [band_limit(ScalarField(grid, rng.standard_normal(grid.shape)), 8) for _ in range(5)]
    wr = weak_residual(res, f, drift, args.alpha, tests)
    payload = {
        "residual": res.residual,
        "iterations": res.iterations,
        "apriori": res.apriori,
        "weak_residual_max": max(wr),
        "lam": args.lam,
    }
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("solve-elliptic", cfg, t0)
    if args.dump_field:
        from .grid import save_field

        save_field(args.dump_field, res.u, extra={"manifest": payload["manifest"]})
    _emit(args, payload)
    ok = res.apriori["sup_ratio"] <= 1.0 + 1e-6
    return EXIT_OK if ok else EXIT_TOLERANCE


def cmd_evolve(args):
    t0 = time.time()
    grid = TorusGrid(d=args.d, N=args.n)
    f0 = _preset_field(grid, args.f, args.seed)
    ds = mollify(make_drift(grid, args.alpha), args.eps)
    drift = ds.b_eps if args.eps > 0 else ds.b * 0.0
    bmax = float(drift.magnitude().values.max())
    dt = args.dt if args.dt > 0 else (0.4 * grid.h / bmax if bmax > 0 else 0.01)
    ev = evolve(f0, drift, args.alpha, t_end=args.t_end, dt=dt, n_checkpoints=args.checkpoints)
    payload = {
        "times": ev.times,
        "orlicz_norms": ev.orlicz_norms,
        "growth_rate": ev.growth_rate,
        "dt": ev.dt,
        "scheme": ev.scheme,
    }
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("evolve", cfg, t0)
    _emit(args, payload)
    return EXIT_OK


def cmd_sweep(args):
    from . import acceptance

    t0 = time.time()
    results = acceptance.run_all()
    payload = {
        "criteria": results,
        "all_passed": all(r["passed"] for r in results),
    }
    cfg = vars(args).copy()
    cfg.pop("func", None)
    payload["manifest"] = make_manifest("sweep", cfg, t0)
    _emit(args, payload)
    for r in results:
        status = "PASS" if r["passed"] else "FAIL"
        print(f"[criterion {r['id']:2d}] {status}  {r['description']}  ({r['runtime_s']}s)", file=sys.stderr)
    return EXIT_OK if payload["all_passed"] else EXIT_TOLERANCE


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="frakolm", description=__doc__)
    ap.add_argument("--threads", type=int, default=0, help="worker threads (overrides FRAKOLM_THREADS)")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, n_default=64):
        p.add_argument("--d", type=int, default=2)
        p.add_argument("--alpha", type=float, default=1.5)
        p.add_argument("--n", type=int, default=n_default)
        p.add_argument("--seed", type=int, default=2024)
        p.add_argument("--out", default=None)

    p = sub.add_parser("constants", help="Gamma-ratio constants table")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, default=0.0)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--nu", type=float, default=0.0)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_constants)

    p = sub.add_parser("gamma-exponent", help="gamma(nu) curve with plug-back residuals")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--points", type=int, default=100)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gamma_exponent)

    p = sub.add_parser("spectral-check", help="multiplier-calculus invariant report")
    common(p, n_default=128)
    p.add_argument("--images", type=int, default=6, help="kernel image cutoff M")
    p.set_defaults(func=cmd_spectral_check)

    p = sub.add_parser("drift-report", help="drift, mollifier and g-bound diagnostics")
    common(p)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--beta", type=float, default=0.25)
    p.set_defaults(func=cmd_drift_report)

    p = sub.add_parser("orlicz-norm", help="Luxemburg norm of a stored field")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_orlicz_norm)

    p = sub.add_parser("verify-hardy", help="empirical Hardy constants")
    common(p)
    p.add_argument("--ineq", required=True,
                   choices=["schrodinger", "kolmogorov", "shifted", "exponential", "posteriori"])
    p.add_argument("--p-grid", default=None)
    p.add_argument("--eps-grid", default=None)
    p.add_argument("--lam", type=float, default=20.0)
    p.set_defaults(func=cmd_verify_hardy)

    p = sub.add_parser("verify-sv", help="scalar SV sweeps and the sinh form")
    common(p, n_default=64)
    p.add_argument("--samples", type=int, default=10**6)
    p.set_defaults(func=cmd_verify_sv)

    p = sub.add_parser("compare-constants", help="CSV behind the constant-comparison figures")
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--points", type=int, default=200)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_compare_constants)

    p = sub.add_parser("t-norm", help="power-iteration norm of the T operator")
    common(p)
    p.add_argument("--lam", type=float, default=0.0, help="0 selects the measured default")
    p.add_argument("--eps", type=float, default=0.0)
    p.set_defaults(func=cmd_t_norm)

    p = sub.add_parser("solve-elliptic", help="resolvent-preconditioned elliptic solve")
    common(p, n_default=128)
    p.add_argument("--lam", type=float, required=True)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--f", default="random", help="preset {mode,bump,random} or a field file")
    p.add_argument("--dump-field", default=None)
    p.set_defaults(func=cmd_solve_elliptic)

    p = sub.add_parser("evolve", help="Strang-split parabolic flow with Orlicz tracking")
    common(p)
    p.add_argument("--eps", type=float, default=0.01)
    p.add_argument("--t-end", type=float, default=1.0)
    p.add_argument("--dt", type=float, default=0.0, help="0 selects the CFL step")
    p.add_argument("--checkpoints", type=int, default=32)
    p.add_argument("--f", default="random")
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("sweep", help="run the acceptance suite, emit a roll-up JSON")
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)

    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (DomainError, GridError, ValueError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"tolerance failure: {exc} (tail bound {exc.tail_bound:.3e})", file=sys.stderr)
        return EXIT_TOLERANCE
    except SolverConvergenceError as exc:
        print(f"solver non-convergence: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
