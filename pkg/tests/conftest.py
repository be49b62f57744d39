import pytest

from rodtip import GaussianState, natural_units
from rodtip.grid import AngularGrid

ACCEPTANCE_LINES = []


@pytest.fixture
def nat():
    """Natural units with hbar = 0.01, the headline cross-validation setting."""
    return natural_units(0.01)


@pytest.fixture
def state():
    return GaussianState(0.1)


@pytest.fixture(scope="session")
def grid1024():
    return AngularGrid(1024)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
