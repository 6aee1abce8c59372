"""Deterministic first-order loops on the negative evidence bound.

Three methods on the objective ``l(w) + h(w)`` (expected energy plus
neg-entropy):

* naive: plain gradient descent on both terms; requires an invertible initial
  scale and is the method that exhibits "jumps" when started too close to
  singular.
* projected: gradient descent followed by Euclidean projection onto the
  well-conditioned region; runs on a fully parameterized scale because the
  projection does not preserve triangularity.
* proximal: a gradient step on the energy only, followed by the closed-form
  neg-entropy prox; runs on triangular parameters and tolerates a zero
  initial scale.

Every run is strictly sequential and contains no randomness, so traces are
bit-identical across repeats.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .energy import EnergyModel
from .exceptions import SingularScaleError
from .geometry import SmoothRegion, in_region, project, prox_neg_entropy
from .locscale import (
    FULL,
    LOWER_TRIANGULAR,
    BaseDistribution,
    Params,
    neg_entropy,
    neg_entropy_grad,
)

METHODS = ("naive", "projected", "proximal")


@dataclass(frozen=True)
class OptimizerConfig:
    method: str
    gamma: float
    max_iters: int = 10_000
    grad_tolerance: float = 1e-8
    init_rho: float = 0.0
    record_params: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.gamma < 0 or (self.gamma == 0 and self.method != "naive"):
            raise ValueError("gamma must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.grad_tolerance < 0:
            raise ValueError("grad_tolerance must be nonnegative")
        if self.init_rho < 0:
            raise ValueError("init_rho must be nonnegative")


@dataclass
class OptimTrace:
    """Per-iteration record of an optimizer run.

    The initial iterate is recorded only when its objective value is finite;
    a zero-scale start (legal for the proximal method) enters the trace at
    iteration 1.  Event flags describe the step that produced the iterate.
    """

    method: str
    iterations: np.ndarray
    neg_elbo: np.ndarray
    grad_norm: np.ndarray
    projected: np.ndarray
    prox_applied: np.ndarray
    diag_clamped: np.ndarray
    status: str
    final_params: Params
    params_history: list[Params] | None = None

    def __len__(self) -> int:
        return len(self.iterations)


class _TraceBuilder:
    def __init__(self, method: str, record_params: bool):
        self.method = method
        self.record_params = record_params
        self.iterations: list[int] = []
        self.neg_elbo: list[float] = []
        self.grad_norm: list[float] = []
        self.projected: list[bool] = []
        self.prox_applied: list[bool] = []
        self.diag_clamped: list[bool] = []
        self.history: list[Params] = []

    def add(self, i, value, residual, w, *, was_projected=False, was_prox=False, was_clamped=False):
        self.iterations.append(int(i))
        self.neg_elbo.append(float(value))
        self.grad_norm.append(float(residual))
        self.projected.append(bool(was_projected))
        self.prox_applied.append(bool(was_prox))
        self.diag_clamped.append(bool(was_clamped))
        if self.record_params:
            self.history.append(w)

    def finish(self, status: str, w: Params) -> OptimTrace:
        return OptimTrace(
            method=self.method,
            iterations=np.asarray(self.iterations, dtype=int),
            neg_elbo=np.asarray(self.neg_elbo, dtype=float),
            grad_norm=np.asarray(self.grad_norm, dtype=float),
            projected=np.asarray(self.projected, dtype=bool),
            prox_applied=np.asarray(self.prox_applied, dtype=bool),
            diag_clamped=np.asarray(self.diag_clamped, dtype=bool),
            status=status,
            final_params=w,
            params_history=self.history if self.record_params else None,
        )


def init_params(d: int, rho: float) -> Params:
    """Standard start: zero location, ``rho * I`` scale, triangular tag."""
    if rho < 0:
        raise ValueError("rho must be nonnegative")
    return Params(np.zeros(d), rho * np.eye(d), LOWER_TRIANGULAR)


def neg_elbo(model: EnergyModel, base: BaseDistribution, w: Params) -> float:
    """Objective value ``l(w) + h(w)`` with absolute constants."""
    return model.expected(w, base) + neg_entropy(w, base)


def _neg_elbo_or_inf(model, base, w) -> float:
    if not w.is_finite():
        return float("inf")
    try:
        return neg_elbo(model, base, w)
    except SingularScaleError:
        return float("inf")


def _full_grad(model, base, w) -> Params:
    return model.expected_grad(w, base) + neg_entropy_grad(w)


def run_naive(model: EnergyModel, base: BaseDistribution, cfg: OptimizerConfig) -> OptimTrace:
    """Plain gradient descent ``w <- w - gamma * (grad l + grad h)``."""
    if cfg.init_rho == 0:
        raise ValueError("naive descent needs an invertible initial scale (rho > 0)")
    w = init_params(model.dim, cfg.init_rho)
    tb = _TraceBuilder("naive", cfg.record_params)
    status = "max_iters"
    for i in range(cfg.max_iters + 1):
        value = _neg_elbo_or_inf(model, base, w)
        try:
            g = _full_grad(model, base, w)
            residual = g.norm()
        except SingularScaleError:
            g = None
            residual = float("inf")
        tb.add(i, value, residual, w)
        if g is None or not np.isfinite(value) or not np.isfinite(residual):
            status = "diverged"
            break
        if residual <= cfg.grad_tolerance:
            status = "converged"
            break
        if i == cfg.max_iters:
            break
        w = w - cfg.gamma * g
    return tb.finish(status, w)


def run_projected(
    model: EnergyModel,
    base: BaseDistribution,
    cfg: OptimizerConfig,
    region: SmoothRegion,
) -> OptimTrace:
    """Projected descent on a fully parameterized scale.

    The starting point is projected into the region (so a zero initial scale
    is legal), every recorded iterate is a member, and convergence is measured
    by the projected-gradient residual ``|w - proj(w - gamma g)| / gamma``.
    """
    w = project(init_params(model.dim, cfg.init_rho).as_full(), region)
    tb = _TraceBuilder("projected", cfg.record_params)
    status = "max_iters"
    was_projected = True
    for i in range(cfg.max_iters + 1):
        value = _neg_elbo_or_inf(model, base, w)
        try:
            g = _full_grad(model, base, w)
        except SingularScaleError:
            g = None
        if g is None or not g.is_finite():
            tb.add(i, value, float("inf"), w, was_projected=was_projected)
            status = "diverged"
            break
        raw = w - cfg.gamma * g
        if not raw.is_finite():
            tb.add(i, value, float("inf"), w, was_projected=was_projected)
            status = "diverged"
            break
        w_next = project(raw, region)
        residual = (w - w_next).norm() / cfg.gamma
        tb.add(i, value, residual, w, was_projected=was_projected)
        if not np.isfinite(value):
            status = "diverged"
            break
        if residual <= cfg.grad_tolerance:
            status = "converged"
            break
        if i == cfg.max_iters:
            break
        was_projected = not in_region(raw, region)
        w = w_next
    return tb.finish(status, w)


def run_proximal(model: EnergyModel, base: BaseDistribution, cfg: OptimizerConfig) -> OptimTrace:
    """Energy gradient step followed by the closed-form neg-entropy prox.

    A gradient step that drives a diagonal entry negative is clamped to zero
    before the prox (the prox domain is nonnegative diagonals); the event is
    flagged since with a step size at most 1/M it is never expected to fire.
    """
    w = init_params(model.dim, cfg.init_rho)
    tb = _TraceBuilder("proximal", cfg.record_params)
    status = "max_iters"
    was_prox = False
    was_clamped = False
    seen_finite = False
    for i in range(cfg.max_iters + 1):
        value = _neg_elbo_or_inf(model, base, w)
        try:
            residual = _full_grad(model, base, w).norm()
        except SingularScaleError:
            residual = float("inf")
        if i == 0 and not np.isfinite(value):
            # Zero diagonals are a legal start; recording begins at the first
            # finite iterate.
            pass
        else:
            tb.add(i, value, residual, w, was_prox=was_prox, was_clamped=was_clamped)
            if not np.isfinite(value):
                status = "diverged"
                break
            seen_finite = True
            if residual <= cfg.grad_tolerance:
                status = "converged"
                break
        if i == cfg.max_iters:
            break
        g = model.expected_grad(w, base)
        half = w - cfg.gamma * g
        if not half.is_finite():
            tb.add(i + 1, float("inf"), float("inf"), half, was_prox=False)
            status = "diverged"
            break
        diag = np.diag(half.C)
        was_clamped = bool(np.any(diag < 0))
        if was_clamped:
            C_fixed = half.C.copy()
            np.fill_diagonal(C_fixed, np.maximum(diag, 0.0))
            half = Params(half.m, C_fixed, LOWER_TRIANGULAR)
        w = prox_neg_entropy(half, cfg.gamma)
        was_prox = True
    if status == "diverged" and not seen_finite:
        status = "diverged"
    return tb.finish(status, w)


def run(model, base, cfg: OptimizerConfig, region: SmoothRegion | None = None) -> OptimTrace:
    """Dispatch on the configured method."""
    if cfg.method == "naive":
        return run_naive(model, base, cfg)
    if cfg.method == "projected":
        if region is None:
            region = SmoothRegion(model.smoothness_M)
        return run_projected(model, base, cfg, region)
    return run_proximal(model, base, cfg)
