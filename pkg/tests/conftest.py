import time

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from geoflow_lab.ensemble import ArcEnsemble
from geoflow_lab.surfaces import SurfaceModel

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

# acceptance lines, printed at the end of the run
ACCEPTANCE_LOG: list[str] = []
# wall-clock seconds of the shared ensemble builds
BUILD_SECONDS: dict[str, float] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "invariant: property test from an invariant suite")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LOG:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LOG:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def torus():
    return SurfaceModel.torus()


@pytest.fixture(scope="session")
def genus2():
    return SurfaceModel.genus2()


@pytest.fixture(scope="session")
def torus_ensemble(torus):
    """16 pairs up to T = 50."""
    return ArcEnsemble.build(torus, 50.0, pairs=16, seed=5, threads=1)


@pytest.fixture(scope="session")
def genus2_small(genus2):
    """4 pairs up to T = 9; cheap enough for property tests."""
    return ArcEnsemble.build(genus2, 9.0, pairs=4, seed=3, threads=1)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(scope="session")
def genus2_ensemble(genus2):
    """16 pairs up to T = 12; shared by the genus-2 estimator tests."""
    start = time.perf_counter()
    ens = ArcEnsemble.build(genus2, 12.0, pairs=16, seed=1, threads=1)
    BUILD_SECONDS["genus2_ensemble"] = time.perf_counter() - start
    return ens
