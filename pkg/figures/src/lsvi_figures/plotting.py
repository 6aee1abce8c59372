"""Figure generation from sweep CSVs.

Two figure families:

* convergence panels: one panel per (dataset, method), one curve per initial
  scaling rho, looseness against iteration on a log axis.
* final looseness: one panel per dataset, one curve per method, final
  looseness against rho on log-log axes.

Looseness is the gap to the best (lowest) objective value observed across all
input rows, matching the sweep tool's definition.  Inputs are read-only and
rendering carries no timestamps or environment-dependent state, so identical
inputs produce identical image bytes.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .io import read_summary, read_trace

_METHOD_ORDER = {"naive": 0, "projected": 1, "proximal": 2}

_STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "lines.linewidth": 1.2,
    "legend.fontsize": 7,
}


@dataclass(frozen=True)
class FigureSpec:
    trace_paths: tuple = ()
    summary_paths: tuple = ()
    out_dir: str = "."
    image_format: str = "png"
    log_iterations: bool = False
    log_looseness: bool = True

    def out_path(self, stem: str) -> Path:
        return Path(self.out_dir) / f"{stem}.{self.image_format}"


def _method_key(method: str):
    return (_METHOD_ORDER.get(method, len(_METHOD_ORDER)), method)


def _looseness_floor(values: np.ndarray) -> np.ndarray:
    """Mask nonpositive gaps (the best point itself) off a log axis."""
    out = values.astype(float).copy()
    out[~(out > 0.0)] = np.nan
    return out


def _collect_traces(spec: FigureSpec):
    rows = []
    for path in spec.trace_paths:
        rows.extend(read_trace(path))
    if not rows:
        raise ValueError("no trace rows found in the given files")
    return rows


def plot_convergence(spec: FigureSpec):
    """Render the looseness-vs-iteration panel grid.

    Returns ``(path, manifest)`` where manifest maps (dataset, method) to the
    number of curves in that panel.  Diverged runs are truncated at their last
    finite value and end with an x marker.
    """
    rows = _collect_traces(spec)
    finite_vals = [float(r["neg_elbo"]) for r in rows if np.isfinite(float(r["neg_elbo"]))]
    if not finite_vals:
        raise ValueError("all objective values are non-finite")
    best = min(finite_vals)

    datasets = sorted({r["dataset"] for r in rows})
    methods = sorted({r["method"] for r in rows}, key=_method_key)
    cells: dict = {}
    for r in rows:
        key = (r["dataset"], r["method"], float(r["rho"]))
        cells.setdefault(key, []).append(r)

    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(
            len(datasets),
            len(methods),
            figsize=(3.2 * len(methods), 2.6 * len(datasets)),
            squeeze=False,
        )
        manifest: dict = {}
        for i, dataset in enumerate(datasets):
            for j, method in enumerate(methods):
                ax = axes[i][j]
                rhos = sorted({k[2] for k in cells if k[0] == dataset and k[1] == method})
                for rho in rhos:
                    runs = cells[(dataset, method, rho)]
                    runs.sort(key=lambda r: int(r["iteration"]))
                    iters = np.array([int(r["iteration"]) for r in runs])
                    vals = np.array([float(r["neg_elbo"]) for r in runs])
                    keep = np.isfinite(vals)
                    iters, vals = iters[keep], vals[keep]
                    loose = _looseness_floor(vals - best)
                    diverged = runs[0]["status"] == "diverged"
                    marker_kw = {"marker": "x", "markevery": [len(iters) - 1]} if diverged and len(iters) else {}
                    ax.plot(iters, loose, label=f"rho={rho:g}", **marker_kw)
                manifest[(dataset, method)] = len(rhos)
                ax.set_title(f"{dataset}\n{method}", fontsize=8)
                if spec.log_looseness:
                    ax.set_yscale("log")
                if spec.log_iterations:
                    ax.set_xscale("log")
                if i == len(datasets) - 1:
                    ax.set_xlabel("iteration")
                if j == 0:
                    ax.set_ylabel("looseness")
                if len(rhos) <= 8:
                    ax.legend(loc="upper right")
        fig.tight_layout()
        out = spec.out_path("convergence")
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
        plt.close(fig)
    return out, manifest


def plot_final_looseness(spec: FigureSpec):
    """Render final looseness against rho, one curve per method, log-log.

    Returns ``(path, manifest)`` with manifest mapping dataset to the number
    of method curves in its panel.
    """
    rows = []
    for path in spec.summary_paths:
        rows.extend(read_summary(path))
    if not rows:
        raise ValueError("no summary rows found in the given files")

    datasets = sorted({r["dataset"] for r in rows})
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(
            1, len(datasets), figsize=(3.6 * len(datasets), 2.8), squeeze=False
        )
        manifest: dict = {}
        for i, dataset in enumerate(datasets):
            ax = axes[0][i]
            subset = [r for r in rows if r["dataset"] == dataset]
            methods = sorted({r["method"] for r in subset}, key=_method_key)
            for method in methods:
                pts = sorted(
                    (float(r["rho"]), float(r["final_looseness"]))
                    for r in subset
                    if r["method"] == method
                )
                rho = np.array([p[0] for p in pts])
                loose = _looseness_floor(np.array([p[1] for p in pts]))
                ax.plot(rho, loose, marker="o", markersize=2.5, label=method)
            manifest[dataset] = len(methods)
            ax.set_xscale("log")
            if spec.log_looseness:
                ax.set_yscale("log")
            ax.set_xlabel("initial scaling rho")
            ax.set_ylabel("final looseness")
            ax.set_title(dataset, fontsize=8)
            ax.legend()
        fig.tight_layout()
        out = spec.out_path("final_looseness")
        out.parent.mkdir(parents=True, exist_ok=True)
        fig.savefig(out)
        plt.close(fig)
    return out, manifest
