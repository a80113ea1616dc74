import os

# Pin BLAS threading before numpy loads: timing-sensitive tests need stable
# single-thread behavior on small matrices.
for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")

import numpy as np
import pytest

from simrsma import make_scenario, synthesize_channels

DESK_CONFIG = {
    "num_layers": 4,
    "elements_per_layer": 16,
    "num_users": 4,
    "num_groups": 2,
    "master_seed": 1234,
}


@pytest.fixture(scope="session")
def desk_scenario():
    return make_scenario(DESK_CONFIG)


@pytest.fixture(scope="session")
def desk_channels(desk_scenario):
    return synthesize_channels(desk_scenario)


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
