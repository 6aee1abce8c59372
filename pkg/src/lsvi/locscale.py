"""Location-scale family parameterization.

A location-scale distribution is the law of ``C @ u + m`` where ``u`` is drawn
from a fixed base distribution with mean zero and identity covariance.  The
parameter vector ``w = (m, C)`` concatenates the location vector and the scale
matrix; its Euclidean norm satisfies ``|w|^2 = |m|^2 + |C|_F^2``, which is the
identity all smoothness and convexity checks in this package lean on.

Two scale structures are supported.  Optimizers that use the diagonal
proximal update run on lower-triangular ``C``; verification routines may use a
fully parameterized ``C``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.special import roots_hermitenorm

from .exceptions import DimensionMismatchError, SingularScaleError

FULL = "full"
LOWER_TRIANGULAR = "lower_triangular"

# Diagonal entries below this are treated as an exact singularity (underflow
# guard for the triangular log-det path).
_DIAG_TINY = 1e-300


def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for expectations against the standard normal.

    The weights are normalized to sum to one, so
    ``sum(w_k * f(t_k)) ~ E[f(t)]`` for ``t ~ N(0, 1)``.
    """
    if n < 1:
        raise ValueError("need at least one quadrature node")
    nodes, weights = roots_hermitenorm(int(n))
    weights = weights / weights.sum()
    return nodes, weights


@dataclass(frozen=True)
class Params:
    """Variational parameters ``w = (m, C)``.

    m: location vector, shape (d,)
    C: scale matrix, shape (d, d)
    structure_tag: FULL or LOWER_TRIANGULAR; triangular parameters must have
        exact zeros above the diagonal.
    """

    m: np.ndarray
    C: np.ndarray
    structure_tag: str = FULL

    def __post_init__(self):
        m = np.asarray(self.m, dtype=float)
        C = np.asarray(self.C, dtype=float)
        if m.ndim != 1:
            raise DimensionMismatchError(f"m must be a vector, got shape {m.shape}")
        d = m.shape[0]
        if C.shape != (d, d):
            raise DimensionMismatchError(
                f"C must be {d}x{d} to match len(m)={d}, got shape {C.shape}"
            )
        if self.structure_tag not in (FULL, LOWER_TRIANGULAR):
            raise ValueError(f"unknown structure_tag {self.structure_tag!r}")
        if self.structure_tag == LOWER_TRIANGULAR and np.any(np.triu(C, k=1) != 0.0):
            raise ValueError("lower_triangular parameters must have zero upper triangle")
        m = m.copy()
        C = C.copy()
        m.flags.writeable = False
        C.flags.writeable = False
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "C", C)

    @property
    def d(self) -> int:
        return self.m.shape[0]

    def flatten(self) -> np.ndarray:
        """Concatenate m and the row-major entries of C."""
        return np.concatenate([self.m, self.C.ravel()])

    @classmethod
    def from_flat(cls, vec: np.ndarray, d: int, structure_tag: str = FULL) -> "Params":
        vec = np.asarray(vec, dtype=float)
        if vec.shape != (d + d * d,):
            raise DimensionMismatchError(f"flat vector must have length {d + d * d}")
        return cls(vec[:d], vec[d:].reshape(d, d), structure_tag)

    def norm(self) -> float:
        return float(np.sqrt(self.m @ self.m + np.sum(self.C * self.C)))

    def _binary_tag(self, other: "Params") -> str:
        if self.structure_tag != other.structure_tag:
            raise ValueError("structure tags must match for parameter arithmetic")
        return self.structure_tag

    def __add__(self, other: "Params") -> "Params":
        return Params(self.m + other.m, self.C + other.C, self._binary_tag(other))

    def __sub__(self, other: "Params") -> "Params":
        return Params(self.m - other.m, self.C - other.C, self._binary_tag(other))

    def __mul__(self, scalar: float) -> "Params":
        return Params(self.m * scalar, self.C * scalar, self.structure_tag)

    __rmul__ = __mul__

    def as_full(self) -> "Params":
        return self if self.structure_tag == FULL else Params(self.m, self.C, FULL)

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.m)) and np.all(np.isfinite(self.C)))


@dataclass(frozen=True)
class BaseDistribution:
    """Descriptor of the standardized base density.

    Only the standard Gaussian is implemented; the tag leaves room for other
    standardized, spherically symmetric bases without an interface change.
    """

    kind: str
    dim: int
    quad_points: np.ndarray = field(repr=False)
    quad_weights: np.ndarray = field(repr=False)

    @property
    def entropy(self) -> float:
        """Differential entropy in nats (analytic for the Gaussian)."""
        return 0.5 * self.dim * float(np.log(2.0 * np.pi * np.e))

    @property
    def quadrature(self) -> list[tuple[float, float]]:
        return list(zip(self.quad_points.tolist(), self.quad_weights.tolist()))

    def log_density(self, u: np.ndarray) -> float:
        u = np.asarray(u, dtype=float)
        return float(-0.5 * self.dim * np.log(2.0 * np.pi) - 0.5 * (u @ u))


def standard_gaussian(dim: int, quad_nodes: int = 200) -> BaseDistribution:
    nodes, weights = gauss_hermite(quad_nodes)
    return BaseDistribution("standard_gaussian", int(dim), nodes, weights)


@dataclass(frozen=True)
class StandardizingTransform:
    """Affine map (shift, scale) that standardizes a base with mean mu, cov Sigma."""

    shift: np.ndarray
    scale: np.ndarray

    def apply(self, u: np.ndarray) -> np.ndarray:
        return u @ self.scale.T + self.shift


def affine_map(w: Params, u: np.ndarray) -> np.ndarray:
    """The map ``u -> C @ u + m`` that realizes a draw from the family."""
    u = np.asarray(u, dtype=float)
    if u.shape != (w.d,):
        raise DimensionMismatchError(f"u has shape {u.shape}, expected ({w.d},)")
    return w.C @ u + w.m


def _log_abs_det_triangular(C: np.ndarray) -> float:
    diag = np.diag(C)
    if np.any(np.abs(diag) < _DIAG_TINY):
        raise SingularScaleError("scale matrix has a (near-)zero diagonal entry")
    return float(np.sum(np.log(np.abs(diag))))


def _log_abs_det_full(C: np.ndarray) -> float:
    # pivoted LU through slogdet for numerical stability on full matrices
    sign, logdet = np.linalg.slogdet(C)
    if sign == 0 or not np.isfinite(logdet):
        raise SingularScaleError("scale matrix is singular")
    return float(logdet)


def log_abs_det(w: Params) -> float:
    if w.structure_tag == LOWER_TRIANGULAR:
        return _log_abs_det_triangular(w.C)
    return _log_abs_det_full(w.C)


def log_density(w: Params, base: BaseDistribution, z: np.ndarray) -> float:
    """Log density of the location-scale distribution at a point z."""
    z = np.asarray(z, dtype=float)
    if z.shape != (w.d,):
        raise DimensionMismatchError(f"z has shape {z.shape}, expected ({w.d},)")
    logdet = log_abs_det(w)
    if w.structure_tag == LOWER_TRIANGULAR:
        u = solve_triangular(w.C, z - w.m, lower=True)
    else:
        u = np.linalg.solve(w.C, z - w.m)
    return base.log_density(u) - logdet


def neg_entropy(w: Params, base: BaseDistribution) -> float:
    """Negative differential entropy: ``-Entropy[base] - log|det C|``."""
    return -base.entropy - log_abs_det(w)


def neg_entropy_grad(w: Params) -> Params:
    """Gradient of the neg-entropy: zero in m, ``-C^{-T}`` in C.

    For triangular parameters the gradient lives on the free (lower) entries;
    the lower-triangular projection of ``-C^{-T}`` is ``-diag(1 / C_ii)``.
    """
    if w.structure_tag == LOWER_TRIANGULAR:
        diag = np.diag(w.C)
        if np.any(np.abs(diag) < _DIAG_TINY):
            raise SingularScaleError("scale matrix has a (near-)zero diagonal entry")
        gC = np.diag(-1.0 / diag)
        return Params(np.zeros(w.d), gC, LOWER_TRIANGULAR)
    try:
        Cinv = np.linalg.inv(w.C)
    except np.linalg.LinAlgError as exc:
        raise SingularScaleError("scale matrix is singular") from exc
    if not np.all(np.isfinite(Cinv)):
        raise SingularScaleError("scale matrix is numerically singular")
    return Params(np.zeros(w.d), -Cinv.T, FULL)


def standardize(mean: np.ndarray, cov: np.ndarray) -> StandardizingTransform:
    """Transform that maps a base with the given moments to mean 0, cov I.

    Returns shift ``-Sigma^{-1/2} mu`` and scale ``Sigma^{-1/2}`` (symmetric
    square root).  The covariance must be symmetric positive definite.
    """
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)
    d = mean.shape[0]
    if cov.shape != (d, d):
        raise DimensionMismatchError("covariance shape does not match mean length")
    if not np.allclose(cov, cov.T, rtol=1e-10, atol=1e-12):
        raise ValueError("covariance must be symmetric")
    eigvals, eigvecs = np.linalg.eigh(cov)
    if np.min(eigvals) <= 0.0:
        raise ValueError("covariance must be positive definite")
    inv_sqrt = (eigvecs / np.sqrt(eigvals)) @ eigvecs.T
    return StandardizingTransform(shift=-inv_sqrt @ mean, scale=inv_sqrt)


def sample(w: Params, base: BaseDistribution, seed: int, n: int) -> np.ndarray:
    """Draw n vectors ``C @ u + m``; deterministic for a given seed."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if base.kind != "standard_gaussian":
        raise ValueError(f"unsupported base kind {base.kind!r}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal((int(n), w.d))
    return u @ w.C.T + w.m
