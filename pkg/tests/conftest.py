import pytest

from pqcone import cone_consts, plap
from pqcone.grid import GridDomain


@pytest.fixture(scope="session")
def line257():
    return GridDomain.interval(257)


@pytest.fixture(scope="session")
def line1025():
    return GridDomain.interval(1025)


@pytest.fixture(scope="session")
def consts257(line257):
    return cone_consts.compute_constants(line257, 2.0, 2.0, plap.SolverConfig())


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
