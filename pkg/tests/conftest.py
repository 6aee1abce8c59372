import numpy as np
import pytest

from lsvi.data import synth_dataset
from lsvi.energy import LogisticRegressionEnergy
from lsvi.grid import build_grid
from lsvi.locscale import standard_gaussian


@pytest.fixture(scope="session")
def default_grid():
    """Default-resolution lookup table, built once per session."""
    return build_grid()


@pytest.fixture(scope="session")
def logistic_100x5():
    return synth_dataset("logistic", 100, 5, seed=1)


@pytest.fixture(scope="session")
def logistic_model(logistic_100x5, default_grid):
    return LogisticRegressionEnergy(logistic_100x5, grid=default_grid)


@pytest.fixture(scope="session")
def base3():
    return standard_gaussian(3)


def rand_lower(rng, d, diag_lo=0.3, diag_hi=2.0):
    """Well-conditioned random lower-triangular scale matrix."""
    C = np.tril(rng.uniform(-1.0, 1.0, size=(d, d)), k=-1)
    C[np.arange(d), np.arange(d)] = rng.uniform(diag_lo, diag_hi, size=d)
    return C
