"""Experiment configuration and (method, rho) sweeps with CSV emission.

A sweep runs every configured optimization method from every configured
initial scaling ``rho`` on one target, records full objective traces, and
writes:

* ``<dataset>_trace.csv``   one row per recorded iteration (versioned header)
* ``<dataset>_summary.csv`` one row per (method, rho) cell (versioned header)
* ``sweep_summary.json``    machine-readable sweep metadata

"Looseness" is the gap between a recorded objective value and the best
(lowest) objective value observed anywhere in the same sweep; the summary
reports it for each cell's final iterate.

Config files are plain ``key = value`` text; every key has a default:

    data = synth            "synth" or a CSV path
    model = logistic        linear | logistic | quadratic
    synth_n = 100           synthetic design rows
    synth_d = 5             synthetic design columns
    quad_a = 4.0            curvature of the quadratic target
    quad_dim = 3            dimension of the quadratic target
    quad_z =                comma floats, minimizer of the quadratic (default 0)
    methods = naive,projected,proximal
    rho = auto              "auto" (log grid around 1/sqrt(M)) or comma floats
    rho_points = 25         size of the auto rho grid
    gamma = auto            "auto" | one_over_M | one_over_2M | explicit float
    max_iters = 2000
    grad_tolerance = 1e-8
    seed = 0
    out_dir =               default from LSVI_OUTDIR, else "results"
    standardize = false     per-column feature standardization
    workers = 1             concurrent sweep cells
    grid_path =             logistic table cache (default <out_dir>/logistic_grid.npz)
    dataset_name =          label override for output rows and filenames

The auto rho grid is logarithmic from ``1e-4 / sqrt(M)`` to ``1e2 / sqrt(M)``,
bracketing the regime where naive descent jumps and the regime where all
methods converge slowly.  The auto step-size rule is ``1/M`` for naive and
proximal descent and ``1/(2M)`` for projected descent.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import grid as grid_mod
from .data import load_dataset, synth_dataset
from .energy import (
    EnergyModel,
    LinearRegressionEnergy,
    LogisticRegressionEnergy,
    QuadraticEnergy,
)
from .exceptions import ConfigError, DataError
from .locscale import standard_gaussian
from .optimize import OptimTrace, OptimizerConfig, run
from .sweep_io import TRACE_HEADER, SUMMARY_HEADER, write_csv

ENV_OUT_DIR = "LSVI_OUTDIR"
GAMMA_RULES = ("auto", "one_over_M", "one_over_2M")


@dataclass(frozen=True)
class ExperimentConfig:
    data: str = "synth"
    model: str = "logistic"
    synth_n: int = 100
    synth_d: int = 5
    quad_a: float = 4.0
    quad_dim: int = 3
    quad_z: tuple = ()
    methods: tuple = ("naive", "projected", "proximal")
    rho: tuple | str = "auto"
    rho_points: int = 25
    gamma: float | str = "auto"
    max_iters: int = 2000
    grad_tolerance: float = 1e-8
    seed: int = 0
    out_dir: str = ""
    standardize: bool = False
    workers: int = 1
    grid_path: str = ""
    dataset_name: str = ""

    def resolved_out_dir(self) -> Path:
        if self.out_dir:
            return Path(self.out_dir)
        return Path(os.environ.get(ENV_OUT_DIR, "results"))


_BOOL_VALUES = {"true": True, "1": True, "yes": True, "false": False, "0": False, "no": False}


def _parse_bool(raw: str, key: str) -> bool:
    try:
        return _BOOL_VALUES[raw.strip().lower()]
    except KeyError:
        raise ConfigError(f"{key}: expected a boolean, got {raw!r}") from None


def _parse_int(raw: str, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {raw!r}") from None


def _parse_float(raw: str, key: str) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {raw!r}") from None


def parse_config(path) -> ExperimentConfig:
    """Parse a key=value config file; unknown keys and bad values are errors."""
    cfg = ExperimentConfig()
    updates: dict = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        raw = raw.split("#", 1)[0].strip()
        if key in ("data", "model", "out_dir", "grid_path", "dataset_name"):
            updates[key] = raw
        elif key in ("synth_n", "synth_d", "rho_points", "max_iters", "seed", "workers"):
            updates[key] = _parse_int(raw, key)
        elif key in ("quad_a", "quad_dim", "grad_tolerance"):
            updates[key] = _parse_int(raw, key) if key == "quad_dim" else _parse_float(raw, key)
        elif key == "quad_z":
            updates[key] = tuple(_parse_float(v, key) for v in raw.split(",") if v.strip())
        elif key == "methods":
            updates[key] = tuple(v.strip() for v in raw.split(",") if v.strip())
        elif key == "rho":
            if raw == "auto":
                updates[key] = "auto"
            else:
                updates[key] = tuple(_parse_float(v, key) for v in raw.split(",") if v.strip())
        elif key == "gamma":
            updates[key] = raw if raw in GAMMA_RULES else _parse_float(raw, key)
        elif key == "standardize":
            updates[key] = _parse_bool(raw, key)
        else:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
    return validate_config(replace(cfg, **updates))


def validate_config(cfg: ExperimentConfig) -> ExperimentConfig:
    if not cfg.methods:
        raise ConfigError("methods list is empty")
    for method in cfg.methods:
        if method not in ("naive", "projected", "proximal"):
            raise ConfigError(f"unknown method {method!r}")
    if cfg.model not in ("linear", "logistic", "quadratic"):
        raise ConfigError(f"unknown model {cfg.model!r}")
    if isinstance(cfg.rho, tuple):
        if not cfg.rho:
            raise ConfigError("rho list is empty")
        if any(r < 0 for r in cfg.rho):
            raise ConfigError("rho values must be nonnegative")
        if "naive" in cfg.methods and any(r == 0 for r in cfg.rho):
            raise ConfigError("naive descent cannot start at rho = 0")
    if cfg.rho_points < 1:
        raise ConfigError("rho_points must be positive")
    if isinstance(cfg.gamma, float) and cfg.gamma <= 0:
        raise ConfigError("explicit gamma must be positive")
    if cfg.max_iters < 1:
        raise ConfigError("max_iters must be positive")
    if cfg.workers < 1:
        raise ConfigError("workers must be positive")
    return cfg


def _dataset_label(cfg: ExperimentConfig) -> str:
    if cfg.dataset_name:
        return cfg.dataset_name
    if cfg.model == "quadratic":
        return f"quadratic-a{cfg.quad_a:g}-d{cfg.quad_dim}"
    if cfg.data == "synth":
        return f"synth-{cfg.model}-n{cfg.synth_n}-d{cfg.synth_d}-s{cfg.seed}"
    return Path(cfg.data).stem


def _build_model(cfg: ExperimentConfig, out_dir: Path) -> EnergyModel:
    if cfg.model == "quadratic":
        z = np.asarray(cfg.quad_z, dtype=float) if cfg.quad_z else np.zeros(cfg.quad_dim)
        if z.shape != (cfg.quad_dim,):
            raise ConfigError("quad_z length must equal quad_dim")
        return QuadraticEnergy(cfg.quad_a, z)
    if cfg.data == "synth":
        data = synth_dataset(cfg.model, cfg.synth_n, cfg.synth_d, cfg.seed)
    else:
        data = load_dataset(cfg.data, cfg.model, standardize=cfg.standardize)
    if cfg.model == "linear":
        return LinearRegressionEnergy(data)
    table = _load_or_build_grid(cfg, out_dir)
    return LogisticRegressionEnergy(data, grid=table)


def _load_or_build_grid(cfg: ExperimentConfig, out_dir: Path) -> grid_mod.GridTable:
    path = Path(cfg.grid_path) if cfg.grid_path else out_dir / "logistic_grid.npz"
    if path.exists():
        return grid_mod.GridTable.load(path)
    table = grid_mod.build_grid()
    path.parent.mkdir(parents=True, exist_ok=True)
    table.save(path)
    return table


def _gamma_for(cfg: ExperimentConfig, method: str, M: float) -> float:
    if isinstance(cfg.gamma, float):
        return cfg.gamma
    if cfg.gamma == "one_over_M":
        return 1.0 / M
    if cfg.gamma == "one_over_2M":
        return 1.0 / (2.0 * M)
    # auto: the per-method rule
    return 1.0 / (2.0 * M) if method == "projected" else 1.0 / M


def _rho_grid(cfg: ExperimentConfig, M: float) -> np.ndarray:
    if isinstance(cfg.rho, tuple):
        return np.asarray(cfg.rho, dtype=float)
    return np.logspace(-4.0, 2.0, cfg.rho_points) / np.sqrt(M)


def _check_writable(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory {out_dir} is not writable: {exc}") from exc


@dataclass
class SweepResult:
    dataset: str
    trace_path: Path
    summary_path: Path
    json_path: Path
    best_neg_elbo: float
    cells: list = field(default_factory=list)


def _final_finite(trace: OptimTrace) -> tuple[int, float]:
    finite = np.isfinite(trace.neg_elbo)
    if not np.any(finite):
        return -1, float("nan")
    idx = int(np.nonzero(finite)[0][-1])
    return int(trace.iterations[idx]), float(trace.neg_elbo[idx])


def run_sweep(cfg: ExperimentConfig) -> SweepResult:
    """Run every (method, rho) cell and emit trace/summary files."""
    cfg = validate_config(cfg)
    out_dir = cfg.resolved_out_dir()
    _check_writable(out_dir)

    model = _build_model(cfg, out_dir)
    base = standard_gaussian(model.dim)
    M = model.smoothness_M
    rhos = _rho_grid(cfg, M)
    if "naive" in cfg.methods and np.any(rhos == 0.0):
        raise ConfigError("naive descent cannot start at rho = 0")
    label = _dataset_label(cfg)

    cells = [(mi, method, ri, float(rho)) for mi, method in enumerate(cfg.methods) for ri, rho in enumerate(rhos)]

    def run_cell(cell):
        _, method, _, rho = cell
        gamma = _gamma_for(cfg, method, M)
        opt = OptimizerConfig(
            method=method,
            gamma=gamma,
            max_iters=cfg.max_iters,
            grad_tolerance=cfg.grad_tolerance,
            init_rho=rho,
        )
        return run(model, base, opt)

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            traces = list(pool.map(run_cell, cells))
    else:
        traces = [run_cell(cell) for cell in cells]

    # deterministic merge: cells are already in (method, rho) order
    best = min(
        float(np.min(t.neg_elbo[np.isfinite(t.neg_elbo)]))
        for t in traces
        if np.any(np.isfinite(t.neg_elbo))
    )

    trace_rows = []
    summary_rows = []
    cell_reports = []
    for cell, trace in zip(cells, traces):
        _, method, _, rho = cell
        gamma = _gamma_for(cfg, method, M)
        for k in range(len(trace)):
            trace_rows.append(
                [
                    label,
                    method,
                    repr(rho),
                    repr(gamma),
                    str(int(trace.iterations[k])),
                    repr(float(trace.neg_elbo[k])),
                    repr(float(trace.grad_norm[k])),
                    trace.status,
                ]
            )
        last_iter, final_value = _final_finite(trace)
        looseness = final_value - best
        summary_rows.append(
            [
                label,
                method,
                repr(rho),
                repr(gamma),
                str(last_iter),
                repr(final_value),
                repr(looseness),
                trace.status,
            ]
        )
        cell_reports.append(
            {
                "method": method,
                "rho": rho,
                "gamma": gamma,
                "status": trace.status,
                "final_neg_elbo": final_value,
                "final_looseness": looseness,
            }
        )

    trace_path = out_dir / f"{label}_trace.csv"
    summary_path = out_dir / f"{label}_summary.csv"
    json_path = out_dir / "sweep_summary.json"
    write_csv(trace_path, TRACE_HEADER, trace_rows)
    write_csv(summary_path, SUMMARY_HEADER, summary_rows)
    payload = {
        "format": "lsvi-sweep-summary-v1",
        "dataset": label,
        "smoothness_M": M,
        "best_neg_elbo": best,
        "methods": list(cfg.methods),
        "rho_grid": [float(r) for r in rhos],
        "seed": cfg.seed,
        "outputs": {"trace": trace_path.name, "summary": summary_path.name},
        "cells": cell_reports,
    }
    json_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return SweepResult(
        dataset=label,
        trace_path=trace_path,
        summary_path=summary_path,
        json_path=json_path,
        best_neg_elbo=best,
        cells=cell_reports,
    )
