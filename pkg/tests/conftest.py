import numpy as np
import pytest

from weakmzi.verify import parameter_grid

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid():
    """20 x 20 raw (r, t) grid scaled onto r^2 + t^2 = 1."""
    return parameter_grid(20)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
