import numpy as np
import pytest

from frakolm.grid import ScalarField, TorusGrid, constant_field, inner, norm_inf
from frakolm.hardy import FamilyRecipe, make_family
from frakolm.lyapunov import make_drift, mollify
from frakolm.orlicz import orlicz_norm
from frakolm.solver import (
    SolverConvergenceError,
    TOperator,
    default_lambda,
    evolve,
    mollification_convergence,
    resolvent_bound_check,
    solve_elliptic,
    t_norm,
    uniqueness_probe,
    weak_residual,
)
from frakolm.spectral import band_limit, plane_wave

D, ALPHA = 2, 1.5


@pytest.fixture(scope="module")
def grid():
    return TorusGrid(d=D, N=64)


@pytest.fixture(scope="module")
def drift0(grid):
    return make_drift(grid, ALPHA)


@pytest.fixture(scope="module")
def drift_eps(drift0):
    return mollify(drift0, 0.01)


@pytest.fixture(scope="module")
def smooth_f(grid):
    fam = make_family(
        grid,
        FamilyRecipe(kind="band-limited-positive", seed=5, n_members=1, amplitude=1.5, kmax=4, positive=False),
        ALPHA,
    )
    return fam.members[0]


class TestTOperator:
    def test_zero_drift_zero(self, grid, drift_eps, smooth_f):
        op = TOperator(drift=drift_eps.b_eps * 0.0, alpha=ALPHA, lam=8.0)
        assert norm_inf(op.apply(smooth_f)) == 0.0
        assert t_norm(op, iters=20)["t_norm"] == 0.0

    def test_linearity_in_drift(self, grid, drift_eps, smooth_f):
        op1 = TOperator(drift=drift_eps.b_eps, alpha=ALPHA, lam=8.0)
        op2 = TOperator(drift=drift_eps.b_eps * 2.0, alpha=ALPHA, lam=8.0)
        gap = norm_inf(op2.apply(smooth_f) - op1.apply(smooth_f) * 2.0)
        assert gap <= 1e-12 * max(norm_inf(op1.apply(smooth_f)), 1.0)
        n1 = t_norm(op1, iters=150)["t_norm"]
        n2 = t_norm(op2, iters=150)["t_norm"]
        assert n2 == pytest.approx(2.0 * n1, rel=1e-6)

    def test_adjoint_pairing(self, grid, drift0, smooth_f):
        rng = np.random.default_rng(3)
        op = TOperator(drift=drift0.b, alpha=ALPHA, lam=8.0)
        for _ in range(5):
            u = band_limit(ScalarField(grid, rng.standard_normal(grid.shape)), 10)
            v = band_limit(ScalarField(grid, rng.standard_normal(grid.shape)), 10)
            lhs = inner(op.apply(u), v)
            rhs = inner(u, op.apply_adjoint(v))
            assert abs(lhs - rhs) <= 1e-10 * max(abs(lhs), 1.0)

    def test_norm_refinement_stable(self):
        norms = []
        for N in (128, 256):
            g = TorusGrid(d=D, N=N)
            ds = make_drift(g, ALPHA)
            norms.append(t_norm(TOperator(drift=ds.b, alpha=ALPHA, lam=8.0), iters=120)["t_norm"])
        assert all(np.isfinite(n) for n in norms)
        assert abs(norms[1] - norms[0]) <= 0.15 * norms[0]

    def test_lambda_guard(self, drift_eps):
        with pytest.raises(ValueError):
            TOperator(drift=drift_eps.b_eps, alpha=ALPHA, lam=0.0)

    def test_default_lambda_dyadic(self, drift0):
        lam = default_lambda(drift0.b, ALPHA)
        assert lam in {2.0**k for k in range(-2, 12)}


class TestElliptic:
    def test_zero_drift_diagonal(self, grid, drift_eps):
        mode = plane_wave(grid, (2, 1))
        res = solve_elliptic(5.0, mode, drift_eps.b_eps * 0.0, ALPHA)
        xi_a = ((np.pi / 2.0) ** 2 * 5.0) ** (ALPHA / 2.0)
        assert norm_inf(res.u - mode * (1.0 / (5.0 + xi_a))) < 1e-12

    def test_constant_rhs(self, grid, drift_eps):
        res = solve_elliptic(7.0, constant_field(grid, 1.0), drift_eps.b_eps, ALPHA)
        assert norm_inf(res.u - 1.0 / 7.0) < 1e-12

    @pytest.mark.parametrize("lam,eps", [(20.0, 0.1), (50.0, 0.01), (100.0, 0.01)])
    def test_apriori_sup_bound(self, grid, drift0, smooth_f, lam, eps):
        ds = mollify(drift0, eps)
        res = solve_elliptic(lam, smooth_f, ds.b_eps, ALPHA)
        assert res.residual <= 1e-10 * max(norm_inf(smooth_f), 1.0)
        assert res.apriori["sup_ratio"] <= 1.0 + 1e-6

    def test_energy_estimate_eps_stable(self, grid, drift0, smooth_f):
        cs = []
        for eps in (0.1, 0.01):
            ds = mollify(drift0, eps)
            res = solve_elliptic(20.0, smooth_f, ds.b_eps, ALPHA)
            cs.append(res.apriori["energy_rhs_coeff"])
        assert max(cs) / min(cs) <= 1.5

    def test_weak_identity(self, grid, drift_eps, smooth_f):
        lam = 20.0
        res = solve_elliptic(lam, smooth_f, drift_eps.b_eps, ALPHA)
        rng = np.random.default_rng(4)
        tests = [constant_field(grid, 1.0), res.u]
        tests += [
            band_limit(ScalarField(grid, rng.standard_normal(grid.shape)), 8) for _ in range(20)
        ]
        rs = weak_residual(res, smooth_f, drift_eps.b_eps, ALPHA, tests)
        scale = norm_inf(smooth_f)
        assert max(rs) <= 1e-6 * scale

    def test_uniqueness_probe(self, grid, drift_eps, smooth_f):
        out = uniqueness_probe(20.0, smooth_f, drift_eps.b_eps, ALPHA)
        assert out["l2_gap"] <= 1e-9
        assert all(v < 1e-6 for v in out["blowup_sweep"].values())


class TestMollificationConvergence:
    def test_single_eps_degenerate(self, grid, drift0, smooth_f):
        out = mollification_convergence(20.0, smooth_f, [mollify(drift0, 0.1)] * 2, ALPHA)
        assert out["pair_distances"][0]["l2"] == 0.0

    def test_dyadic_sequence_decreasing(self, grid, drift0, smooth_f):
        sets = [mollify(drift0, 0.1 * 2.0 ** (-n)) for n in range(6)]
        out = mollification_convergence(20.0, smooth_f, sets, ALPHA)
        cosh_d = [r["cosh"] for r in out["pair_distances"]]
        assert all(a > b for a, b in zip(cosh_d, cosh_d[1:]))
        probes = out["t_weak_probe"]
        assert all(a > b for a, b in zip(probes, probes[1:]))


class TestEvolve:
    def test_cfl_guard(self, grid, drift_eps, smooth_f):
        with pytest.raises(SolverConvergenceError):
            evolve(smooth_f, drift_eps.b_eps, ALPHA, t_end=1.0, dt=1.0)

    def test_constant_invariant(self, grid, drift_eps):
        c = constant_field(grid, 1.3)
        ev = evolve(c, drift_eps.b_eps, ALPHA, t_end=0.1, dt=0.005)
        assert norm_inf(ev.checkpoints[-1] - 1.3) < 1e-12

    def test_zero_drift_cosh_monotone(self, grid, drift_eps, smooth_f):
        ev = evolve(smooth_f, drift_eps.b_eps * 0.0, ALPHA, t_end=2.0, dt=0.01)
        norms = np.array(ev.orlicz_norms)
        assert np.all(np.diff(norms) <= 1e-8 * norms[:-1])

    def test_growth_rate_stable(self, drift0):
        rates = {}
        for N in (64, 128):
            g = TorusGrid(d=D, N=N)
            ds = mollify(make_drift(g, ALPHA), 0.01)
            fam = make_family(
                g,
                FamilyRecipe(kind="band-limited-positive", seed=5, n_members=1, amplitude=1.5, kmax=4, positive=False),
                ALPHA,
            )
            bmax = ds.b_eps.magnitude().values.max()
            ev = evolve(fam.members[0], ds.b_eps, ALPHA, t_end=1.0, dt=0.4 * g.h / bmax)
            rates[N] = ev.growth_rate
        assert abs(rates[128] - rates[64]) <= 0.15 * abs(rates[64])

    def test_dt_halving_second_order(self, grid, drift_eps, smooth_f):
        bmax = drift_eps.b_eps.magnitude().values.max()
        dt0 = 0.4 * grid.h / bmax
        ends = []
        for dt in (dt0, dt0 / 2.0, dt0 / 4.0):
            ev = evolve(smooth_f, drift_eps.b_eps, ALPHA, t_end=0.5, dt=dt)
            ends.append(ev.orlicz_norms[-1])
        e1, e2 = abs(ends[0] - ends[2]), abs(ends[1] - ends[2])
        assert np.log2(e1 / e2) >= 1.8


class TestResolventTable:
    def test_constant_rhs_exact_ratio(self, grid, drift_eps):
        c0 = 2.0
        f = constant_field(grid, c0)
        omega0 = 1.0
        rows = resolvent_bound_check([8.0, 16.0], f, drift_eps.b_eps, ALPHA, omega0)
        for r in rows:
            # u = c0/lam exactly, so the ratio is 1 - omega0/lam
            assert r["ratio"] == pytest.approx(1.0 - omega0 / r["lam"], rel=1e-6)
            assert r["ratio"] <= 1.0

    def test_ratios_below_one(self, grid, drift_eps, smooth_f):
        rows = resolvent_bound_check([4.0, 8.0, 16.0, 32.0], smooth_f, drift_eps.b_eps, ALPHA, 1.0)
        assert all(r["ratio"] <= 1.0 for r in rows)
        # lambda doubling halves the norm asymptotically
        norms = [r["u_cosh"] for r in rows]
        slopes = [np.log2(norms[i] / norms[i + 1]) for i in range(len(norms) - 1)]
        assert slopes[-1] == pytest.approx(1.0, abs=0.35)

    def test_lambda_guard(self, grid, drift_eps, smooth_f):
        with pytest.raises(ValueError):
            resolvent_bound_check([0.5], smooth_f, drift_eps.b_eps, ALPHA, 1.0)
