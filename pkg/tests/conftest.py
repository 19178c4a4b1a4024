import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from eon_aco.io import load_topology  # noqa: E402
from eon_aco.network import NetworkState, Topology  # noqa: E402

ACCEPTANCE_LINES = {}


@pytest.fixture(scope="session")
def nsfnet():
    topo, modtable = load_topology("nsfnet14")
    return topo, modtable


@pytest.fixture
def empty_nsfnet(nsfnet):
    return NetworkState(nsfnet[0])


@pytest.fixture
def line3():
    # 1 - 2 - 3 with 8 slots
    return Topology([(1, 2, 300.0), (2, 3, 400.0)], slots=8)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
