import numpy as np
import pytest

from tilefft import default_table

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20121)


@pytest.fixture(scope="session")
def table():
    return default_table()


def random_signal(rng, n):
    return rng.uniform(-1, 1, n) + 1j * rng.uniform(-1, 1, n)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
