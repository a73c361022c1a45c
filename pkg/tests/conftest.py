import time

import pytest

from alexandrov_lorentz.cellulation import gauss_image, octagon_cellulation
from alexandrov_lorentz.fixtures import fixture_hulls
from alexandrov_lorentz.hull import induced_metric

# filled by test_acceptance, printed in the terminal summary
ACCEPTANCE = {}
TIMINGS = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture(scope="session")
def fixtures20():
    t = time.perf_counter()
    out = fixture_hulls(20, seed=0)
    TIMINGS["fixtures20"] = time.perf_counter() - t
    return out


@pytest.fixture(scope="session")
def hulls(fixtures20):
    # a handful for the more expensive per-item tests
    return fixtures20[:6]


@pytest.fixture(scope="session")
def cells(fixtures20):
    return [gauss_image(fx.surface) for fx in fixtures20]


@pytest.fixture(scope="session")
def metrics(fixtures20):
    return [induced_metric(fx.surface) for fx in fixtures20]


@pytest.fixture(scope="session")
def octagon():
    return octagon_cellulation()
