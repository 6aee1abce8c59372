"""Constraint geometry: the well-conditioned region, its projection, and the
proximal operator of the neg-entropy.

The region for a smoothness constant M is the set of parameters whose scale
matrix has all singular values at least ``1 / sqrt(M)``.  Euclidean projection
onto it clamps the singular values from below (a full SVD, cost Omega(d^3));
the neg-entropy prox touches only the d diagonal entries (cost Omega(d)).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .locscale import FULL, LOWER_TRIANGULAR, Params

# Membership tolerance so project -> in_region round-trips are stable.
_MEMBERSHIP_SLACK = 1e-12


@dataclass(frozen=True)
class SmoothRegion:
    """Parameters whose scale has singular values >= 1 / sqrt(M)."""

    M: float

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError("smoothness constant must be positive")

    @property
    def sigma_min_threshold(self) -> float:
        return 1.0 / np.sqrt(self.M)


def in_region(w: Params, region: SmoothRegion) -> bool:
    sigma = np.linalg.svd(w.C, compute_uv=False)
    return bool(sigma.min() >= region.sigma_min_threshold - _MEMBERSHIP_SLACK)


def project(w: Params, region: SmoothRegion) -> Params:
    """Euclidean projection onto the region: clamp singular values from below.

    Members (boundary included) are returned unchanged.  The clamp generally
    destroys triangularity, so a projected non-member keeps its triangular tag
    only when the recomposed matrix happens to still satisfy it (e.g. diagonal
    scale matrices).
    """
    if not w.is_finite():
        raise ValueError("cannot project parameters with non-finite entries")
    if in_region(w, region):
        return w
    U, S, Vt = np.linalg.svd(w.C)
    T = np.maximum(S, region.sigma_min_threshold)
    C_new = (U * T) @ Vt
    tag = w.structure_tag
    if tag == LOWER_TRIANGULAR and np.any(np.triu(C_new, k=1) != 0.0):
        tag = FULL
    return Params(w.m, C_new, tag)


def prox_neg_entropy(w: Params, gamma: float) -> Params:
    """Proximal step of the neg-entropy for triangular scale matrices.

    Solves, per diagonal entry, ``argmin_{x>0} -log x + (x - C_ii)^2 / (2
    gamma)``, whose closed form is ``(C_ii + sqrt(C_ii^2 + 4 gamma)) / 2``.
    Location and off-diagonal entries are unchanged; every output diagonal is
    strictly positive (a zero input maps to ``sqrt(gamma)``).
    """
    if gamma <= 0:
        raise ValueError("gamma must be positive")
    if w.structure_tag != LOWER_TRIANGULAR:
        raise ValueError("prox requires lower_triangular parameters")
    diag = np.diag(w.C)
    negative = np.nonzero(diag < 0)[0]
    if negative.size:
        raise ValueError(f"diagonal entry {int(negative[0])} is negative ({diag[negative[0]]!r})")
    # hypot fuses sqrt(C_ii^2 + 4*gamma) without overflow; the sum form has no
    # cancellation because both terms are nonnegative.
    new_diag = 0.5 * (diag + np.hypot(diag, 2.0 * np.sqrt(gamma)))
    C_new = w.C.copy()
    np.fill_diagonal(C_new, new_diag)
    return Params(w.m, C_new, LOWER_TRIANGULAR)
