import csv
import json
import shutil
import subprocess

import pytest

from figkit.cli import main as figkit_main
from figkit.render import FigureSpec, render

FRAKOLM = shutil.which("frakolm")

pytestmark = pytest.mark.skipif(FRAKOLM is None, reason="frakolm CLI not on PATH")


def run_producer(*argv):
    out = subprocess.run([FRAKOLM, *argv], capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    return out


@pytest.fixture(scope="module")
def produced(tmp_path_factory):
    """Real inputs produced through the primary's external interface."""
    root = tmp_path_factory.mktemp("inputs")
    run_producer("compare-constants", "--d", "2", "--alpha", "1.5",
                 "--points", "120", "--out", str(root / "fig12.csv"))
    run_producer("gamma-exponent", "--d", "2", "--alpha", "1.5",
                 "--points", "60", "--out", str(root / "gamma.csv"))
    run_producer("verify-hardy", "--ineq", "exponential", "--d", "2", "--alpha", "1.5",
                 "--n", "32", "--eps-grid", "0.1,0.01", "--out", str(root / "hardy.json"))
    run_producer("evolve", "--d", "2", "--alpha", "1.5", "--n", "32", "--eps", "0.01",
                 "--t-end", "0.2", "--checkpoints", "8", "--out", str(root / "flow.json"))
    return root


def spec_file(tmp_path, figure, inputs, output):
    p = tmp_path / f"{figure}.json"
    p.write_text(json.dumps({"figure": figure, "inputs": [str(i) for i in inputs], "output": str(output)}))
    return p


def test_kappa_vs_p_data_contract(produced, tmp_path):
    # curves cross only at p=2: validate the data behind the figure
    with open(produced / "fig12.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    ip, isv, ik = head.index("p"), head.index("sv_weighted_kappa"), head.index("kappa_p")
    for r in body:
        p, sv, k = float(r[ip]), float(r[isv]), float(r[ik])
        if abs(p - 2.0) > 0.05:
            assert sv < k
    sp = spec_file(tmp_path, "kappa_vs_p", [produced / "fig12.csv"], tmp_path / "kappa")
    assert figkit_main(["render", "--spec", str(sp)]) == 0
    assert (tmp_path / "kappa.png").exists() and (tmp_path / "kappa.svg").exists()


def test_nu_vs_p_asymptote(produced, tmp_path):
    with open(produced / "fig12.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    nu = [float(r[head.index("nu_of_p")]) for r in body]
    manifest = json.loads((produced / "fig12.csv.manifest.json").read_text())
    ns = manifest["constants"]["nu_star"]
    assert all(v < ns for v in nu)
    assert nu[-1] > 0.999 * ns  # approaches the asymptote from below
    sp = spec_file(tmp_path, "nu_vs_p", [produced / "fig12.csv"], tmp_path / "nu")
    assert figkit_main(["render", "--spec", str(sp)]) == 0


def test_gamma_vs_nu_endpoints(produced, tmp_path):
    with open(produced / "gamma.csv", newline="") as fh:
        rows = list(csv.reader(fh))
    head, body = rows[0], rows[1:]
    nus = [float(r[head.index("nu")]) for r in body]
    gs = [float(r[head.index("gamma")]) for r in body]
    manifest = json.loads((produced / "gamma.csv.manifest.json").read_text())
    consts = manifest["constants"]
    assert nus[0] == 0.0 and gs[0] == consts["d"]
    assert abs(gs[-1] - consts["alpha"]) < 0.05
    assert consts["nu_sv"] < consts["nu_star"]  # vertical line strictly left
    sp = spec_file(tmp_path, "gamma_vs_nu", [produced / "gamma.csv"], tmp_path / "gamma")
    assert figkit_main(["render", "--spec", str(sp)]) == 0


def test_deterministic_rerender_byte_identical(produced, tmp_path):
    sp = spec_file(tmp_path, "gamma_vs_nu", [produced / "gamma.csv"], tmp_path / "g1")
    assert figkit_main(["render", "--spec", str(sp)]) == 0
    first_png = (tmp_path / "g1.png").read_bytes()
    first_svg = (tmp_path / "g1.svg").read_bytes()
    assert figkit_main(["render", "--spec", str(sp)]) == 0
    assert (tmp_path / "g1.png").read_bytes() == first_png
    assert (tmp_path / "g1.svg").read_bytes() == first_svg


def test_manifest_hash_embedded(produced, tmp_path):
    sp = spec_file(tmp_path, "nu_vs_p", [produced / "fig12.csv"], tmp_path / "m")
    spec = FigureSpec.from_file(sp)
    out = render(spec)
    h = out["manifest_hash"].encode()
    assert h in (tmp_path / "m.svg").read_bytes()
    assert h in (tmp_path / "m.png").read_bytes()


def test_hardy_margins_and_orlicz_growth(produced, tmp_path):
    sp1 = spec_file(tmp_path, "hardy_margins", [produced / "hardy.json"], tmp_path / "h")
    assert figkit_main(["render", "--spec", str(sp1)]) == 0
    sp2 = spec_file(tmp_path, "orlicz_growth", [produced / "flow.json"], tmp_path / "o")
    assert figkit_main(["render", "--spec", str(sp2)]) == 0


def test_missing_columns_schema_error(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("a,b\n1,2\n")
    (tmp_path / "bad.csv.manifest.json").write_text("{}")
    sp = spec_file(tmp_path, "nu_vs_p", [bad], tmp_path / "x")
    assert figkit_main(["render", "--spec", str(sp)]) == 2


def test_missing_manifest_schema_error(tmp_path):
    orphan = tmp_path / "orphan.csv"
    orphan.write_text("p,nu_of_p\n2.0,0.1\n")
    sp = spec_file(tmp_path, "nu_vs_p", [orphan], tmp_path / "x")
    assert figkit_main(["render", "--spec", str(sp)]) == 2


def test_monotonicity_violation_exit_3(tmp_path):
    bad = tmp_path / "nonmono.csv"
    bad.write_text("nu,gamma,residual\n0.0,2.0,0\n0.1,1.5,0\n0.2,1.7,0\n")
    (tmp_path / "nonmono.csv.manifest.json").write_text("{}")
    sp = spec_file(tmp_path, "gamma_vs_nu", [bad], tmp_path / "x")
    assert figkit_main(["render", "--spec", str(sp)]) == 3


def test_empty_but_valid_csv(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("p,sv_weighted_kappa,kappa_p,nu_of_p,nu_sv_route\n")
    (tmp_path / "empty.csv.manifest.json").write_text("{}")
    sp = spec_file(tmp_path, "kappa_vs_p", [empty], tmp_path / "e")
    assert figkit_main(["render", "--spec", str(sp)]) == 0
    assert (tmp_path / "e.png").exists()


def test_unknown_figure_id(tmp_path):
    sp = tmp_path / "spec.json"
    sp.write_text(json.dumps({"figure": "nope", "inputs": [], "output": "x"}))
    assert figkit_main(["render", "--spec", str(sp)]) == 2
