import math
import warnings

import pytest

from blochvariety.lattice import WaveVectorSplit, build_index_set


@pytest.fixture(scope="session")
def basis1():
    return build_index_set(1)


@pytest.fixture(scope="session")
def basis0():
    return build_index_set(0)


@pytest.fixture
def gx_split():
    return WaveVectorSplit((0.0, 0.0, 0.0), (1.0, 0.0, 0.0), math.pi)


@pytest.fixture(autouse=True)
def _quiet_admissibility():
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*not admissible.*")
        yield


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
