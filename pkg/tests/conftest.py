import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from plateau_rf.design import table1_filters

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", max_examples=1000, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

TWO_PI = 2 * np.pi


@pytest.fixture(scope="session")
def table1():
    return table1_filters()


def random_ladder_elements(rng, n):
    """Random alternating or mixed lumped ladder for oracle comparisons."""
    from plateau_rf.network import SeriesCapacitor, SeriesInductor, ShuntCapacitor, ShuntInductor

    kinds = [SeriesCapacitor, ShuntInductor, SeriesInductor, ShuntCapacitor]
    out = []
    for _ in range(n):
        k = kinds[rng.integers(len(kinds))]
        if k in (SeriesCapacitor, ShuntCapacitor):
            out.append(k(10 ** rng.uniform(-15, -12)))
        else:
            out.append(k(10 ** rng.uniform(-10, -8)))
    return out
