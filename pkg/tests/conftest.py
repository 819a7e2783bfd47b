import json
from pathlib import Path

import numpy as np
import pytest

from slspectra.potential import Potential

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def oracle_values():
    return json.loads((FIXTURES / "oracle_values.json").read_text())


@pytest.fixture
def cos2():
    return Potential([2.0])


@pytest.fixture
def cos2_sin1():
    return Potential([2.0], [1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import ACCEPTANCE_LINES

    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
