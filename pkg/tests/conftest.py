import time

import pytest

from hypersig.gpt import enumerate_extremal_measurements
from hypersig.squit import bipartite_group, get_model


@pytest.fixture(scope="session")
def group():
    return bipartite_group()


@pytest.fixture(scope="session")
def hs_enumeration():
    """Single-threaded HS enumeration, shared by every test that needs it, with its wall time."""
    model = get_model("HS")
    t0 = time.perf_counter()
    meas = enumerate_extremal_measurements(model.system(), 2, 9, workers=1)
    return meas, time.perf_counter() - t0


@pytest.fixture(scope="session")
def pr_enumeration():
    model = get_model("PR")
    return enumerate_extremal_measurements(model.system(), 2, 9)
