import numpy as np
import pytest

from polarsar3d.checks import random_ongrid_instance
from polarsar3d.kgrid import KGrid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def small_grid():
    return KGrid((6, 5, 7), [7.0, 6.0, 5.0], [3.0, -2.0, 400.0])


@pytest.fixture
def ongrid(rng):
    return random_ongrid_instance(rng, dims=(6, 5, 4), m=60)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
