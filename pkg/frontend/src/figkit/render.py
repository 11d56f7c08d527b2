"""Deterministic figure rendering from frakolm CSV/JSON outputs.

Five figure ids: kappa_vs_p and nu_vs_p (from compare-constants CSV),
gamma_vs_nu (from gamma-exponent CSV), hardy_margins (verify-hardy JSON)
and orlicz_growth (evolve JSON).  Inputs must carry a run manifest (embedded
for JSON, `<file>.manifest.json` sidecar for CSV); its hash is embedded in
the image metadata.  Rendering never calls the solver package: the file
contract is the whole interface.
"""

from __future__ import annotations

import csv
import hashlib
import json
import pathlib
from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

STYLE_FILE = pathlib.Path(__file__).parent / "style" / "figkit.mplstyle"

FIGURE_IDS = ("kappa_vs_p", "nu_vs_p", "gamma_vs_nu", "hardy_margins", "orlicz_growth")


class SchemaError(ValueError):
    """Input file does not match the documented contract."""


class SeriesError(ValueError):
    """A plotted series violates its monotonicity contract."""


@dataclass
class FigureSpec:
    figure: str
    inputs: list
    output: str
    style: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path) -> "FigureSpec":
        raw = json.loads(pathlib.Path(path).read_text())
        missing = {"figure", "inputs", "output"} - set(raw)
        if missing:
            raise SchemaError(f"figure spec missing keys: {sorted(missing)}")
        if raw["figure"] not in FIGURE_IDS:
            raise SchemaError(f"unknown figure id {raw['figure']!r}; expected one of {FIGURE_IDS}")
        return cls(
            figure=raw["figure"],
            inputs=list(raw["inputs"]),
            output=raw["output"],
            style=raw.get("style", {}),
        )


def _load_manifest(path: pathlib.Path, payload=None) -> dict:
    if payload is not None and "manifest" in payload:
        return payload["manifest"]
    sidecar = pathlib.Path(str(path) + ".manifest.json")
    if not sidecar.exists():
        raise SchemaError(f"{path} carries no run manifest (missing {sidecar.name})")
    return json.loads(sidecar.read_text())


def _manifest_hash(manifest: dict) -> str:
    return hashlib.sha256(json.dumps(manifest, sort_keys=True).encode()).hexdigest()[:16]


def read_csv_table(path, required_columns) -> tuple[dict, dict]:
    path = pathlib.Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected a header row")
    header = rows[0]
    missing = [c for c in required_columns if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing columns {missing} (header {header})")
    idx = {c: header.index(c) for c in header}
    cols = {c: np.array([float(r[idx[c]]) for r in rows[1:]]) for c in header}
    manifest = _load_manifest(path)
    return cols, manifest


def _finish(fig, spec: FigureSpec, manifest: dict):
    out = pathlib.Path(spec.output)
    out.parent.mkdir(parents=True, exist_ok=True)
    h = _manifest_hash(manifest)
    written = []
    for ext in ("png", "svg"):
        target = out.with_suffix(f".{ext}")
        if ext == "png":
            meta = {"Software": "figkit", "Comment": f"manifest:{h}"}
        else:
            meta = {"Date": None, "Creator": "figkit", "Description": f"manifest:{h}"}
        fig.savefig(target, metadata=meta)
        written.append(str(target))
    plt.close(fig)
    return {"outputs": written, "manifest_hash": h}


def _legend(ax):
    if ax.get_legend_handles_labels()[0]:
        ax.legend()


def render_kappa_vs_p(spec: FigureSpec):
    cols, manifest = read_csv_table(
        spec.inputs[0], ["p", "sv_weighted_kappa", "kappa_p"]
    )
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        if cols["p"].size:
            ax.semilogx(cols["p"], cols["kappa_p"], label="direct constant")
            ax.semilogx(cols["p"], cols["sv_weighted_kappa"], label="SV route")
            ax.axvline(2.0, color="0.6", lw=0.8, ls=":")
        ax.set_xlabel("p")
        ax.set_ylabel("coupling constant")
        _legend(ax)
        return _finish(fig, spec, manifest)


def render_nu_vs_p(spec: FigureSpec):
    cols, manifest = read_csv_table(spec.inputs[0], ["p", "nu_of_p"])
    nu = cols["nu_of_p"]
    if nu.size and not np.all(np.diff(nu) > 0.0):
        raise SeriesError("nu(p) series is not strictly increasing")
    consts = manifest.get("constants", {})
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        if nu.size:
            ax.semilogx(cols["p"], nu, label="nu(p)")
        if "nu_star" in consts:
            ax.axhline(consts["nu_star"], color="C3", lw=1.0, ls="--", label="critical coupling")
        ax.set_xlabel("p")
        ax.set_ylabel("nu")
        _legend(ax)
        return _finish(fig, spec, manifest)


def render_gamma_vs_nu(spec: FigureSpec):
    cols, manifest = read_csv_table(spec.inputs[0], ["nu", "gamma"])
    gam = cols["gamma"]
    if gam.size and not np.all(np.diff(gam) < 0.0):
        raise SeriesError("gamma(nu) series is not strictly decreasing")
    consts = manifest.get("constants", {})
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        if gam.size:
            ax.plot(cols["nu"], gam, label="exponent gamma(nu)")
        if "nu_sv" in consts:
            ax.axvline(consts["nu_sv"], color="C2", lw=1.0, ls=":", label="SV-attainable coupling")
        if "nu_star" in consts:
            ax.axvline(consts["nu_star"], color="C3", lw=1.0, ls="--", label="critical coupling")
        if "alpha" in consts:
            ax.axhline(consts["alpha"], color="0.6", lw=0.8, ls=":")
        ax.set_xlabel("nu")
        ax.set_ylabel("gamma")
        _legend(ax)
        return _finish(fig, spec, manifest)


def render_hardy_margins(spec: FigureSpec):
    path = pathlib.Path(spec.inputs[0])
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    if "reports" not in payload:
        raise SchemaError(f"{path}: missing 'reports' key")
    manifest = _load_manifest(path, payload)
    labels = [r["inequality"] for r in payload["reports"]]
    sups = [r.get("family_sup", float("nan")) for r in payload["reports"]]
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        if labels:
            y = np.arange(len(labels))
            ax.barh(y, sups, color="C0")
            ax.set_yticks(y, labels, fontsize=8)
        ax.set_xlabel("family-sup empirical constant")
        fig.tight_layout()
        return _finish(fig, spec, manifest)


def render_orlicz_growth(spec: FigureSpec):
    path = pathlib.Path(spec.inputs[0])
    try:
        payload = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc
    missing = {"times", "orlicz_norms"} - set(payload)
    if missing:
        raise SchemaError(f"{path}: missing keys {sorted(missing)}")
    manifest = _load_manifest(path, payload)
    t = np.asarray(payload["times"])
    n = np.asarray(payload["orlicz_norms"])
    with plt.style.context(str(STYLE_FILE)):
        fig, ax = plt.subplots()
        if t.size:
            ax.semilogy(t, n, marker="o", ms=3, label="cosh-1 norm")
            rate = payload.get("growth_rate")
            if rate is not None and n.size:
                ax.semilogy(t, n[0] * np.exp(rate * t), ls="--", color="C3",
                            label=f"fit slope {rate:.3g}")
        ax.set_xlabel("t")
        ax.set_ylabel("Luxemburg norm")
        _legend(ax)
        return _finish(fig, spec, manifest)


RENDERERS = {
    "kappa_vs_p": render_kappa_vs_p,
    "nu_vs_p": render_nu_vs_p,
    "gamma_vs_nu": render_gamma_vs_nu,
    "hardy_margins": render_hardy_margins,
    "orlicz_growth": render_orlicz_growth,
}


def render(spec: FigureSpec):
    return RENDERERS[spec.figure](spec)
