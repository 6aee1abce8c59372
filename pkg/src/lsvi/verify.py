"""Numerical certification of the structural claims the optimizers rely on.

Each certificate samples parameter pairs from a documented distribution,
evaluates exact gradients or objective values, and reports the worst ratio or
violation seen together with a pass flag.  Certificates are deterministic
given (claim, seed, trials) and reduce by a max over trials, so the trial
order is irrelevant.

Pair sampling: locations are uniform on [-5, 5]; scale matrices are lower
triangular with off-diagonal entries uniform on [-2, 2] and diagonals uniform
on [0.1, 2]; one pair in ten differs in a single coordinate to probe
coordinate-wise bounds.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .energy import EnergyModel
from .geometry import SmoothRegion, project
from .locscale import FULL, LOWER_TRIANGULAR, BaseDistribution, Params, neg_entropy_grad

# Tolerances: multiplicative on smoothness ratios (gradients are exact closed
# forms), additive on convexity midpoints, additive on solution-region
# boundaries (optimizer residual noise).
SMOOTHNESS_RTOL = 1e-9
CONVEXITY_ATOL = 1e-12
SOLUTION_ATOL = 1e-6
DIAG_BOUND_ATOL = 1e-9


@dataclass(frozen=True)
class CertificateReport:
    claim: str
    trials: int
    worst: float
    threshold: float
    passed: bool
    seed: int
    detail: str = ""

    def to_dict(self) -> dict:
        return asdict(self)


def sample_params(rng: np.random.Generator, d: int, tag: str = FULL) -> Params:
    m = rng.uniform(-5.0, 5.0, size=d)
    C = rng.uniform(-2.0, 2.0, size=(d, d))
    C = np.tril(C, k=-1)
    C[np.arange(d), np.arange(d)] = rng.uniform(0.1, 2.0, size=d)
    return Params(m, C, tag)


def _perturb_single_coordinate(rng: np.random.Generator, w: Params) -> Params:
    flat = w.flatten()
    idx = int(rng.integers(flat.size))
    delta = rng.uniform(0.1, 1.0) * (1.0 if rng.random() < 0.5 else -1.0)
    flat[idx] += delta
    return Params.from_flat(flat, w.d, w.structure_tag)


def sample_pair(rng: np.random.Generator, d: int, tag: str = FULL) -> tuple[Params, Params]:
    w = sample_params(rng, d, tag)
    if rng.random() < 0.1:
        return w, _perturb_single_coordinate(rng, w)
    return w, sample_params(rng, d, tag)


def certify_smoothness(
    model: EnergyModel,
    base: BaseDistribution,
    trials: int = 1000,
    seed: int = 0,
    M: float | None = None,
    claim: str = "",
) -> CertificateReport:
    """Worst gradient-difference ratio of the expected energy over random pairs."""
    M = model.smoothness_M if M is None else float(M)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(trials):
        w, v = sample_pair(rng, model.dim)
        dist = (w - v).norm()
        if dist == 0.0:
            continue
        diff = (model.expected_grad(w, base) - model.expected_grad(v, base)).norm()
        worst = max(worst, diff / dist)
    threshold = M * (1.0 + SMOOTHNESS_RTOL)
    return CertificateReport(
        claim=claim or "energy-smoothness",
        trials=trials,
        worst=worst,
        threshold=threshold,
        passed=worst <= threshold,
        seed=seed,
        detail=f"M={M!r}",
    )


def certify_convexity(
    model: EnergyModel,
    base: BaseDistribution,
    trials: int = 1000,
    seed: int = 0,
    c: float | None = None,
    claim: str = "",
) -> CertificateReport:
    """Midpoint convexity of the expected energy, optionally strong with constant c.

    For each sampled (w, v, alpha) checks ``l(alpha w + beta v) <= alpha l(w)
    + beta l(v)`` within an additive tolerance; with c given the same test
    runs on ``l - (c/2) |w|^2``.
    """
    rng = np.random.default_rng(seed)
    cc = 0.0 if c is None else float(c)

    def reduced(w: Params) -> float:
        val = model.expected(w, base)
        if cc:
            val -= 0.5 * cc * (float(w.m @ w.m) + float(np.sum(w.C * w.C)))
        return val

    worst = -math.inf
    for _ in range(trials):
        w, v = sample_pair(rng, model.dim)
        alpha = rng.uniform(0.0, 1.0)
        mid = alpha * w + (1.0 - alpha) * v
        violation = reduced(mid) - (alpha * reduced(w) + (1.0 - alpha) * reduced(v))
        worst = max(worst, violation)
    name = claim or ("energy-strong-convexity" if c is not None else "energy-convexity")
    return CertificateReport(
        claim=name,
        trials=trials,
        worst=worst,
        threshold=CONVEXITY_ATOL,
        passed=worst <= CONVEXITY_ATOL,
        seed=seed,
        detail=f"c={cc!r}" if c is not None else "",
    )


def certify_solution_region(w_star: Params, M: float, claim: str = "") -> CertificateReport:
    """At a stationary point the smallest singular value must reach 1/sqrt(M)."""
    sigma_min = float(np.linalg.svd(w_star.C, compute_uv=False).min())
    violation = 1.0 / math.sqrt(M) - sigma_min
    return CertificateReport(
        claim=claim or "solution-in-region",
        trials=1,
        worst=violation,
        threshold=SOLUTION_ATOL,
        passed=violation <= SOLUTION_ATOL,
        seed=0,
        detail=f"sigma_min={sigma_min!r}, threshold=1/sqrt({M!r})",
    )


def certify_strong_solution(
    w_star: Params, c: float, z_star: np.ndarray, d: int, claim: str = ""
) -> CertificateReport:
    """Solution norm bound under strong convexity: |C|_F^2 + |m - z*|^2 <= d/c."""
    z_star = np.asarray(z_star, dtype=float)
    r = w_star.m - z_star
    lhs = float(np.sum(w_star.C * w_star.C) + r @ r)
    bound = math.inf if c <= 0 else d / c
    violation = lhs - bound
    return CertificateReport(
        claim=claim or "solution-norm-bound",
        trials=1,
        worst=violation,
        threshold=SOLUTION_ATOL,
        passed=violation <= SOLUTION_ATOL,
        seed=0,
        detail=f"lhs={lhs!r}, bound={bound!r}",
    )


def certify_elbo_smooth_on_region(
    model: EnergyModel,
    base: BaseDistribution,
    M: float | None = None,
    trials: int = 1000,
    seed: int = 0,
    claim: str = "",
) -> CertificateReport:
    """Smoothness of the full objective (2M) and the neg-entropy alone (M)
    over pairs sampled inside the well-conditioned region.

    The worst value reported is the larger of the two ratios, each normalized
    by its constant, so 1.0 is the theoretical boundary.
    """
    M = model.smoothness_M if M is None else float(M)
    region = SmoothRegion(M)
    rng = np.random.default_rng(seed)
    worst_norm = 0.0
    worst_total = 0.0
    worst_h = 0.0
    for _ in range(trials):
        w = project(sample_params(rng, model.dim).as_full(), region)
        v = project(sample_params(rng, model.dim).as_full(), region)
        dist = (w - v).norm()
        if dist == 0.0:
            continue
        gh_w = neg_entropy_grad(w)
        gh_v = neg_entropy_grad(v)
        diff_h = (gh_w - gh_v).norm()
        diff_total = (
            (model.expected_grad(w, base) + gh_w) - (model.expected_grad(v, base) + gh_v)
        ).norm()
        worst_h = max(worst_h, diff_h / dist)
        worst_total = max(worst_total, diff_total / dist)
        worst_norm = max(worst_norm, diff_h / (M * dist), diff_total / (2.0 * M * dist))
    threshold = 1.0 + SMOOTHNESS_RTOL
    return CertificateReport(
        claim=claim or "objective-smooth-on-region",
        trials=trials,
        worst=worst_norm,
        threshold=threshold,
        passed=worst_norm <= threshold,
        seed=seed,
        detail=f"entropy_ratio={worst_h!r} (bound {M!r}), total_ratio={worst_total!r} (bound {2 * M!r})",
    )


def certify_diag_grad_bound(
    model: EnergyModel,
    base: BaseDistribution,
    trials: int = 200,
    seed: int = 0,
    claim: str = "",
) -> CertificateReport:
    """For diagonal scale matrices, |dl/dC_ii| <= M |C_ii| coordinate-wise."""
    M = model.smoothness_M
    rng = np.random.default_rng(seed)
    d = model.dim
    worst = -math.inf
    for _ in range(trials):
        m = rng.uniform(-5.0, 5.0, size=d)
        diag = rng.uniform(0.0, 2.0, size=d)
        diag[rng.random(d) < 0.1] = 0.0  # include exact zeros
        w = Params(m, np.diag(diag), FULL)
        gC = model.expected_grad(w, base).C
        worst = max(worst, float(np.max(np.abs(np.diag(gC)) - M * diag)))
    return CertificateReport(
        claim=claim or "diagonal-scale-gradient-bound",
        trials=trials,
        worst=worst,
        threshold=DIAG_BOUND_ATOL,
        passed=worst <= DIAG_BOUND_ATOL,
        seed=seed,
        detail=f"M={M!r}",
    )


def finite_diff_grad(fn, w: Params, h_step: float) -> Params:
    """Central finite differences of a scalar function over the free coordinates.

    For triangular parameters only the lower-triangle coordinates are
    perturbed; upper entries stay exactly zero.  Non-finite evaluations are
    rejected.
    """
    if h_step <= 0:
        raise ValueError("h_step must be positive")
    d = w.d
    tag = w.structure_tag
    gm = np.zeros(d)
    gC = np.zeros((d, d))

    def probe(m, C):
        val = fn(Params(m, C, tag))
        if not np.isfinite(val):
            raise ValueError("function evaluated to a non-finite value")
        return val

    for i in range(d):
        m_plus = w.m.copy()
        m_minus = w.m.copy()
        m_plus[i] += h_step
        m_minus[i] -= h_step
        gm[i] = (probe(m_plus, w.C) - probe(m_minus, w.C)) / (2.0 * h_step)
    for i in range(d):
        cols = range(i + 1) if tag == LOWER_TRIANGULAR else range(d)
        for j in cols:
            C_plus = w.C.copy()
            C_minus = w.C.copy()
            C_plus[i, j] += h_step
            C_minus[i, j] -= h_step
            gC[i, j] = (probe(w.m, C_plus) - probe(w.m, C_minus)) / (2.0 * h_step)
    return Params(gm, gC, tag)


def rate_bound(M: float, D: float, sigma: float, N: int) -> tuple[float, float]:
    """Step size and stationarity bound for gradient descent with noisy
    gradients on an M-smooth objective.

    Returns ``gamma = min(1/M, D / (sigma sqrt(N)))`` and the bound
    ``M^2 D^2 / N + 2 D M sigma / sqrt(N)`` on the mean squared gradient
    norm after N iterations.  With sigma = 0 the rate is 1/N at step 1/M.
    """
    if M < 0 or D < 0 or sigma < 0:
        raise ValueError("M, D and sigma must be nonnegative")
    if N < 1:
        raise ValueError("N must be at least 1")
    inv_m = math.inf if M == 0 else 1.0 / M
    gamma = inv_m if sigma == 0 else min(inv_m, D / (sigma * math.sqrt(N)))
    # factored form keeps the decimal examples exact: MD(MD + 2 sigma sqrt(N))/N
    bound = M * D * (M * D + 2.0 * sigma * math.sqrt(N)) / N
    return gamma, bound
