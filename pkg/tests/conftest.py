import math

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []

GAME_GRID = [k * math.pi / 200 for k in range(101)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
