import numpy as np
import pytest

from dnaga.channel import ChannelParams
from dnaga.scenario import Cell, Deployment, generate_hex_lattice


@pytest.fixture(scope="session")
def params():
    return ChannelParams()


@pytest.fixture(scope="session")
def hex228():
    return generate_hex_lattice(55.43, 228)


@pytest.fixture(scope="session")
def hex19():
    return generate_hex_lattice(55.43, 19)


def isolated(n=1, spacing=1.0, dist="uniform"):
    """Cells far enough apart that their coverage regions never touch."""
    cells = tuple(Cell(i, (i * spacing, 0.0), ue_distribution=dist) for i in range(n))
    return Deployment(cells, (-0.1, -0.1, (n - 1) * spacing + 0.1, 0.1), 0)


def pair(d_km, dist="uniform"):
    return isolated(2, d_km, dist)


def rng(seed=0):
    return np.random.default_rng(seed)


# one line per acceptance criterion, printed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
