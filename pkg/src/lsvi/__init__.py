"""Deterministic variational inference for location-scale families.

The package minimizes the negative evidence bound ``l(w) + h(w)`` for
location-scale variational families with exact (sampling-free) energies,
provides projected and proximal first-order methods whose step sizes come
from certified smoothness constants, and ships a verification harness that
numerically checks the structural claims those methods rely on.
"""

from .energy import (
    EnergyModel,
    GlmDataset,
    LinearRegressionEnergy,
    LogisticRegressionEnergy,
    QuadraticEnergy,
    gaussian_target,
    smoothness_constant,
)
from .exceptions import (
    ConfigError,
    DataError,
    DimensionMismatchError,
    GridRangeError,
    LsviError,
    SingularScaleError,
)
from .geometry import SmoothRegion, in_region, project, prox_neg_entropy
from .grid import GridTable, build_grid, grid_eval
from .locscale import (
    FULL,
    LOWER_TRIANGULAR,
    BaseDistribution,
    Params,
    StandardizingTransform,
    affine_map,
    log_density,
    neg_entropy,
    neg_entropy_grad,
    sample,
    standard_gaussian,
    standardize,
)
from .optimize import (
    OptimTrace,
    OptimizerConfig,
    init_params,
    neg_elbo,
    run_naive,
    run_projected,
    run_proximal,
)
from .verify import (
    CertificateReport,
    certify_convexity,
    certify_elbo_smooth_on_region,
    certify_smoothness,
    certify_solution_region,
    certify_strong_solution,
    finite_diff_grad,
    rate_bound,
)

__version__ = "0.1.0"
