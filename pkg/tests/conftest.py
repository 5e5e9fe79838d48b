import numpy as np
import pytest

from interface_scattering.evolve import SpectralData
from interface_scattering.numerics import make_grid, make_kgrid
from interface_scattering.potential import build_potential

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture(scope="session")
def jost_grid():
    return make_grid(-2.0, 0.0, 1.0, 3.0, (101, 201, 101))


@pytest.fixture(scope="session")
def barrier(jost_grid):
    return build_potential({"kind": "barrier", "height": 4.0}, jost_grid)


@pytest.fixture(scope="session")
def wide_grid():
    return make_grid(-10.0, 0.0, 1.0, 11.0, (401, 201, 421))


@pytest.fixture(scope="session")
def wide_barrier(wide_grid):
    return build_potential({"kind": "barrier", "height": 4.0}, wide_grid)


@pytest.fixture(scope="session")
def box_grid():
    return make_grid(-30.0, 0.0, 1.0, 31.0, (1501, 201, 1501))


@pytest.fixture(scope="session")
def spectral(box_grid):
    """Default 1024-node window on the barrier."""
    V = build_potential({"kind": "barrier", "height": 4.0}, box_grid)
    return SpectralData(V, make_kgrid(), jobs=4)


@pytest.fixture
def rng():
    return np.random.default_rng(7)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[n])
