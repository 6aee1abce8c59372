"""Precomputed table of the expected log-sigmoid under a normal perturbation.

The table stores ``g(a, b) = E[log sigmoid(a + b t)]`` for ``t ~ N(0, 1)`` on a
regular (a, b) grid, evaluated by Gauss-Hermite quadrature, together with a
bicubic spline so logistic energies and their gradients can be evaluated
quickly.  Out-of-range queries are hard errors rather than extrapolations;
silent extrapolation would corrupt convergence traces.

File format (``save``/``load``): a NumPy ``.npz`` archive with keys
``format_version`` (int), ``a_lo``, ``a_hi``, ``b_hi`` (floats), ``n_a``,
``n_b``, ``quad_nodes`` (ints) and ``values`` (float array of shape
``(n_a, n_b)``).  The spline is refit deterministically on load.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import RectBivariateSpline

from .exceptions import GridRangeError
from .locscale import gauss_hermite

GRID_FORMAT_VERSION = 1

# Defaults sized so the spline reproduces its own quadrature rule to
# ~1e-7 absolute in value and ~1e-5 in the partials over the whole range.
DEFAULT_A_RANGE = (-40.0, 40.0)
DEFAULT_B_RANGE = (0.0, 30.0)
DEFAULT_RESOLUTION = (801, 301)
DEFAULT_QUAD_NODES = 200


def log_sigmoid(x):
    """Numerically stable ``log(sigmoid(x))``."""
    return -np.logaddexp(0.0, -np.asarray(x, dtype=float))


@dataclass
class GridTable:
    """Tabulated g(a, b) with C1 spline interpolation of g and its partials."""

    a_lo: float
    a_hi: float
    b_hi: float
    n_a: int
    n_b: int
    quad_nodes: int
    values: np.ndarray
    _spline: RectBivariateSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (self.n_a, self.n_b):
            raise ValueError("values shape does not match the declared resolution")
        self._spline = RectBivariateSpline(
            self.a_grid, self.b_grid, self.values, kx=3, ky=3, s=0
        )

    @property
    def a_grid(self) -> np.ndarray:
        return np.linspace(self.a_lo, self.a_hi, self.n_a)

    @property
    def b_grid(self) -> np.ndarray:
        return np.linspace(0.0, self.b_hi, self.n_b)

    @property
    def a_range(self) -> tuple[float, float]:
        return (self.a_lo, self.a_hi)

    @property
    def b_range(self) -> tuple[float, float]:
        return (0.0, self.b_hi)

    def contains(self, a, b) -> np.ndarray:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        return (a >= self.a_lo) & (a <= self.a_hi) & (b >= 0.0) & (b <= self.b_hi)

    def eval(self, a, b):
        """Interpolated ``(g, dg/da, dg/db)`` at in-range query points."""
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        inside = self.contains(a, b)
        if not np.all(inside):
            bad = np.argwhere(~np.atleast_1d(inside))[0]
            a_bad = np.atleast_1d(a)[tuple(bad)] if a.ndim else float(a)
            b_bad = np.atleast_1d(b)[tuple(bad)] if b.ndim else float(b)
            raise GridRangeError(a_bad, b_bad, self.a_range, self.b_range)
        g = self._spline.ev(a, b)
        ga = self._spline.ev(a, b, dx=1)
        gb = self._spline.ev(a, b, dy=1)
        return g, ga, gb

    def save(self, path) -> None:
        np.savez(
            path,
            format_version=np.int64(GRID_FORMAT_VERSION),
            a_lo=self.a_lo,
            a_hi=self.a_hi,
            b_hi=self.b_hi,
            n_a=np.int64(self.n_a),
            n_b=np.int64(self.n_b),
            quad_nodes=np.int64(self.quad_nodes),
            values=self.values,
        )

    @classmethod
    def load(cls, path) -> "GridTable":
        with np.load(path) as npz:
            version = int(npz["format_version"])
            if version != GRID_FORMAT_VERSION:
                raise ValueError(
                    f"grid file format v{version} unsupported (expected v{GRID_FORMAT_VERSION})"
                )
            return cls(
                a_lo=float(npz["a_lo"]),
                a_hi=float(npz["a_hi"]),
                b_hi=float(npz["b_hi"]),
                n_a=int(npz["n_a"]),
                n_b=int(npz["n_b"]),
                quad_nodes=int(npz["quad_nodes"]),
                values=npz["values"],
            )

    def header(self) -> dict:
        return {
            "format_version": GRID_FORMAT_VERSION,
            "a_range": [self.a_lo, self.a_hi],
            "b_range": [0.0, self.b_hi],
            "resolution": [self.n_a, self.n_b],
            "quad_nodes": self.quad_nodes,
        }


def build_grid(
    a_range: tuple[float, float] = DEFAULT_A_RANGE,
    b_range: tuple[float, float] = DEFAULT_B_RANGE,
    resolution: tuple[int, int] = DEFAULT_RESOLUTION,
    quad_nodes: int = DEFAULT_QUAD_NODES,
) -> GridTable:
    """Tabulate g on a regular grid by Gauss-Hermite quadrature.

    ``values[i, j] = sum_k w_k log_sigmoid(a_i + b_j t_k)`` with the nodes and
    weights of :func:`lsvi.locscale.gauss_hermite`.  The b = 0 column is the
    quadrature of a constant integrand and is stored as ``log_sigmoid(a)``
    exactly.
    """
    a_lo, a_hi = float(a_range[0]), float(a_range[1])
    b_lo, b_hi = float(b_range[0]), float(b_range[1])
    n_a, n_b = int(resolution[0]), int(resolution[1])
    if not a_lo < a_hi:
        raise ValueError("a range must satisfy a_lo < a_hi")
    if b_lo != 0.0 or b_hi <= 0.0:
        raise ValueError("b range must be [0, b_hi] with b_hi > 0")
    if n_a < 16 or n_b < 16:
        raise ValueError("resolution must be at least 16x16")
    if quad_nodes < 32:
        raise ValueError("need at least 32 quadrature nodes")

    nodes, weights = gauss_hermite(quad_nodes)
    a = np.linspace(a_lo, a_hi, n_a)[:, None]
    b = np.linspace(0.0, b_hi, n_b)[None, :]
    values = np.zeros((n_a, n_b))
    for t_k, w_k in zip(nodes, weights):
        values += w_k * log_sigmoid(a + b * t_k)
    values[:, 0] = log_sigmoid(a[:, 0])
    return GridTable(
        a_lo=a_lo,
        a_hi=a_hi,
        b_hi=b_hi,
        n_a=n_a,
        n_b=n_b,
        quad_nodes=int(quad_nodes),
        values=values,
    )


def grid_eval(grid: GridTable, a: float, b: float) -> tuple[float, float, float]:
    """Scalar in-range lookup of ``(g, dg/da, dg/db)``."""
    if b < 0:
        raise GridRangeError(a, b, grid.a_range, grid.b_range)
    g, ga, gb = grid.eval(float(a), float(b))
    return float(g), float(ga), float(gb)
