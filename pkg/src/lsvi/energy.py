"""Target energies f(z) = -log p(z, x) and their exact expectations.

Each model exposes the pointwise energy and gradient, the exact expected
energy ``l(w) = E[f(C u + m)]`` under a standardized Gaussian base, its exact
gradient in ``w``, a smoothness constant ``M`` bounding the Lipschitz constant
of the energy gradient, and (where available) a strong-convexity constant
``c <= M``.

Closed forms used here (all for a standardized base, so ``E[u] = 0`` and
``Cov[u] = I``):

* isotropic quadratic ``f(z) = (a/2) |z - z0|^2``:
  ``E f = (a/2) (|m - z0|^2 + |C|_F^2)`` since the variance of ``C u + m``
  contributes ``tr(C C^T) = |C|_F^2``.

* Gaussian-prior linear regression, unit noise:
  ``f(z) = (1/2)|z|^2 + (d/2) log 2pi + (1/2) sum_n (y_n - x_n^T z)^2
  + (N/2) log 2pi``.  With ``z = C u + m`` the residual ``y_n - x_n^T z`` is
  ``(y_n - x_n^T m) - x_n^T C u``, a zero-mean perturbation with variance
  ``|C^T x_n|^2``, so ``E[(y_n - x_n^T z)^2] = (y_n - x_n^T m)^2 +
  |C^T x_n|^2`` and the expected energy is exact without sampling.

* Gaussian-prior logistic regression: ``x_n^T z`` is a scalar Gaussian with
  mean ``x_n^T m`` and standard deviation ``|C^T x_n|``, so each likelihood
  term reduces to the one-dimensional integral
  ``E[log sigmoid(y_n x_n^T z)] = g(y_n x_n^T m, |C^T x_n|)`` with
  ``g(a, b) = E[log sigmoid(a + b t)]``, ``t ~ N(0, 1)``.  The integral is
  evaluated from a precomputed spline table when the query is in range and by
  direct Gauss-Hermite quadrature otherwise.

Constant terms (``(d/2) log 2pi`` and friends) are kept so objective values
are absolute and comparable across optimizers.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from .exceptions import DataError, GridRangeError
from .grid import GridTable, log_sigmoid
from .locscale import (
    FULL,
    LOWER_TRIANGULAR,
    BaseDistribution,
    Params,
    gauss_hermite,
)

LOG_2PI = float(np.log(2.0 * np.pi))


def _project_structure(gC: np.ndarray, tag: str) -> np.ndarray:
    return np.tril(gC) if tag == LOWER_TRIANGULAR else gC


class EnergyModel:
    """Interface shared by all targets.

    Concrete models define ``dim``, ``smoothness_M``, optionally
    ``strong_convexity_c``, the pointwise ``value``/``grad`` and the exact
    ``expected``/``expected_grad``.
    """

    dim: int
    smoothness_M: float
    strong_convexity_c: float | None = None

    def value(self, z: np.ndarray) -> float:
        raise NotImplementedError

    def grad(self, z: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def expected(self, w: Params, base: BaseDistribution | None = None) -> float:
        raise NotImplementedError

    def expected_grad(self, w: Params, base: BaseDistribution | None = None) -> Params:
        raise NotImplementedError

    def _check_consistency(self):
        if self.strong_convexity_c is not None and self.strong_convexity_c > self.smoothness_M:
            raise ValueError("strong convexity constant must not exceed the smoothness constant")


@dataclass(frozen=True)
class GlmDataset:
    """Design matrix plus response for a linear or logistic model."""

    X: np.ndarray
    y: np.ndarray
    kind: str  # "linear" | "logistic"

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        y = np.asarray(self.y, dtype=float)
        if X.ndim != 2:
            raise DataError("X must be a 2-d design matrix")
        if y.shape != (X.shape[0],):
            raise DataError("row count of X must equal len(y)")
        if self.kind not in ("linear", "logistic"):
            raise DataError(f"unknown dataset kind {self.kind!r}")
        if self.kind == "logistic" and not np.all(np.isin(y, (-1.0, 1.0))):
            raise DataError("logistic responses must be in {-1, +1}")
        X = X.copy()
        y = y.copy()
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def dim(self) -> int:
        return self.X.shape[1]


def smoothness_constant(data: GlmDataset) -> float:
    """Lipschitz constant of the energy gradient for the GLM targets.

    ``1 + sigma_max(X X^T)`` for the linear model and
    ``1 + sigma_max(X X^T) / 4`` for the logistic model, where ``sigma_max``
    is the largest eigenvalue (computed on the smaller Gram matrix).
    """
    if data.n == 0:
        raise DataError("need a nonempty design matrix")
    X = data.X
    gram = X @ X.T if data.n <= data.dim else X.T @ X
    top = float(np.linalg.eigvalsh(gram).max())
    if data.kind == "linear":
        return 1.0 + top
    return 1.0 + 0.25 * top


class QuadraticEnergy(EnergyModel):
    """Isotropic quadratic ``f(z) = (a/2) |z - z_star|^2 + constant``."""

    def __init__(self, a: float, z_star: np.ndarray, constant: float = 0.0):
        if a <= 0:
            raise ValueError("curvature a must be positive")
        self.a = float(a)
        self.z_star = np.asarray(z_star, dtype=float)
        self.constant = float(constant)
        self.dim = self.z_star.shape[0]
        self.smoothness_M = self.a
        self.strong_convexity_c = self.a
        self._check_consistency()

    def value(self, z: np.ndarray) -> float:
        r = np.asarray(z, dtype=float) - self.z_star
        return 0.5 * self.a * float(r @ r) + self.constant

    def grad(self, z: np.ndarray) -> np.ndarray:
        return self.a * (np.asarray(z, dtype=float) - self.z_star)

    def expected(self, w: Params, base: BaseDistribution | None = None) -> float:
        r = w.m - self.z_star
        return 0.5 * self.a * float(r @ r + np.sum(w.C * w.C)) + self.constant

    def expected_grad(self, w: Params, base: BaseDistribution | None = None) -> Params:
        gm = self.a * (w.m - self.z_star)
        gC = _project_structure(self.a * w.C, w.structure_tag)
        return Params(gm, gC, w.structure_tag)


def gaussian_target(variance: float, z_star: np.ndarray) -> QuadraticEnergy:
    """Negative log density of an isotropic Gaussian N(z_star, variance I)."""
    z_star = np.asarray(z_star, dtype=float)
    d = z_star.shape[0]
    const = 0.5 * d * float(np.log(2.0 * np.pi * variance))
    return QuadraticEnergy(1.0 / variance, z_star, constant=const)


class LinearRegressionEnergy(EnergyModel):
    """Standard-Gaussian prior, unit-noise Gaussian likelihood."""

    def __init__(self, data: GlmDataset):
        if data.kind != "linear":
            raise DataError("expected a linear dataset")
        self.data = data
        self.dim = data.dim
        # an empty design reduces to the prior, whose curvature is exactly 1
        self.smoothness_M = smoothness_constant(data) if data.n else 1.0
        self.strong_convexity_c = 1.0
        self._gram = data.X.T @ data.X
        self._const = 0.5 * self.dim * LOG_2PI + 0.5 * data.n * LOG_2PI
        self._check_consistency()

    def value(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        resid = self.data.y - self.data.X @ z
        return 0.5 * float(z @ z) + 0.5 * float(resid @ resid) + self._const

    def grad(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        return z + self.data.X.T @ (self.data.X @ z - self.data.y)

    def expected(self, w: Params, base: BaseDistribution | None = None) -> float:
        X, y = self.data.X, self.data.y
        resid = y - X @ w.m
        spread = X @ w.C  # row n is (C^T x_n)^T
        return 0.5 * float(
            w.m @ w.m + np.sum(w.C * w.C) + resid @ resid + np.sum(spread * spread)
        ) + self._const

    def expected_grad(self, w: Params, base: BaseDistribution | None = None) -> Params:
        X, y = self.data.X, self.data.y
        gm = w.m + X.T @ (X @ w.m - y)
        gC = w.C + self._gram @ w.C
        return Params(gm, _project_structure(gC, w.structure_tag), w.structure_tag)


class LogisticRegressionEnergy(EnergyModel):
    """Standard-Gaussian prior, binary logistic likelihood with +-1 labels.

    When constructed with a grid table, likelihood terms are interpolated
    from the table; query points that fall outside the tabulated ranges
    (large iterates produced by unstable optimizer settings) are evaluated by
    direct quadrature with the same Gauss-Hermite rule, so objective traces
    stay exact rather than erroring out mid-run.
    """

    def __init__(self, data: GlmDataset, grid: GridTable | None = None, quad_nodes: int = 200):
        if data.kind != "logistic":
            raise DataError("expected a logistic dataset")
        self.data = data
        self.grid = grid
        self.dim = data.dim
        self.smoothness_M = smoothness_constant(data)
        self.strong_convexity_c = 1.0
        nodes = grid.quad_nodes if grid is not None else quad_nodes
        self._nodes, self._weights = gauss_hermite(nodes)
        self._prior_const = 0.5 * self.dim * LOG_2PI
        self._check_consistency()

    def value(self, z: np.ndarray) -> float:
        z = np.asarray(z, dtype=float)
        margins = self.data.y * (self.data.X @ z)
        return 0.5 * float(z @ z) + self._prior_const - float(np.sum(log_sigmoid(margins)))

    def grad(self, z: np.ndarray) -> np.ndarray:
        z = np.asarray(z, dtype=float)
        margins = self.data.y * (self.data.X @ z)
        return z - self.data.X.T @ (expit(-margins) * self.data.y)

    def _queries(self, w: Params):
        a = self.data.y * (self.data.X @ w.m)
        spread = self.data.X @ w.C
        b = np.linalg.norm(spread, axis=1)
        return a, b, spread

    def _g_quad(self, a: np.ndarray, b: np.ndarray):
        z = a[:, None] + np.outer(b, self._nodes)
        sn = expit(-z)
        g = log_sigmoid(z) @ self._weights
        ga = sn @ self._weights
        gb = (sn * self._nodes[None, :]) @ self._weights
        return g, ga, gb

    def _g_parts(self, a: np.ndarray, b: np.ndarray):
        if self.grid is None:
            return self._g_quad(a, b)
        inside = self.grid.contains(a, b)
        if np.all(inside):
            return self.grid.eval(a, b)
        g = np.empty_like(a)
        ga = np.empty_like(a)
        gb = np.empty_like(a)
        if np.any(inside):
            g[inside], ga[inside], gb[inside] = self.grid.eval(a[inside], b[inside])
        out = ~inside
        g[out], ga[out], gb[out] = self._g_quad(a[out], b[out])
        return g, ga, gb

    def expected(self, w: Params, base: BaseDistribution | None = None) -> float:
        a, b, _ = self._queries(w)
        g, _, _ = self._g_parts(a, b)
        prior = 0.5 * float(w.m @ w.m + np.sum(w.C * w.C))
        return prior + self._prior_const - float(np.sum(g))

    def expected_grad(self, w: Params, base: BaseDistribution | None = None) -> Params:
        X, y = self.data.X, self.data.y
        a, b, spread = self._queries(w)
        _, ga, gb = self._g_parts(a, b)
        gm = w.m - X.T @ (ga * y)
        # d|C^T x|/dC = x (x^T C) / |C^T x|; the b = 0 limit contributes zero
        # because g is even in b.
        safe = b > 0.0
        coef = np.where(safe, gb / np.where(safe, b, 1.0), 0.0)
        gC = w.C - X.T @ (coef[:, None] * spread)
        return Params(gm, _project_structure(gC, w.structure_tag), w.structure_tag)


def quadratic_expected(model: QuadraticEnergy, w: Params) -> float:
    """Exact expected quadratic energy (no sampling)."""
    return model.expected(w)


def linreg_expected(data: GlmDataset, w: Params) -> float:
    """Exact expected linear-regression energy, absolute constants included."""
    return LinearRegressionEnergy(data).expected(w)


def logreg_expected(data: GlmDataset, w: Params, grid: GridTable) -> float:
    """Expected logistic energy through the grid; out-of-range queries are errors."""
    model = LogisticRegressionEnergy(data, grid=grid)
    a, b, _ = model._queries(w)
    inside = grid.contains(a, b)
    if not np.all(inside):
        bad = int(np.flatnonzero(~inside)[0])
        raise GridRangeError(a[bad], b[bad], grid.a_range, grid.b_range)
    g, _, _ = grid.eval(a, b)
    prior = 0.5 * float(w.m @ w.m + np.sum(w.C * w.C))
    return prior + 0.5 * data.dim * LOG_2PI - float(np.sum(g))


def expected_grad(model: EnergyModel, w: Params) -> Params:
    """Exact gradient of the model's expected energy, structure respected."""
    return model.expected_grad(w)
