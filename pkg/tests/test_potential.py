import numpy as np
import pytest

from interface_scattering.numerics import ConfigurationError, make_grid
from interface_scattering.potential import build_potential, check_positive, zero_potential


@pytest.fixture(scope="module")
def grid():
    return make_grid(-1.0, 0.0, 1.0, 2.0, (11, 41, 11))


def test_barrier_values_and_norms(grid):
    V = build_potential({"kind": "barrier", "height": 4.0}, grid)
    left, mid, right = V.values
    assert np.all(left == 0) and np.all(right == 0) and np.all(mid == 4.0)
    assert V.l1_norm == pytest.approx(4.0)
    assert V.linf_norm == 4.0
    assert check_positive(V)


def test_well_is_negative(grid):
    V = build_potential({"kind": "well", "depth": 2.5}, grid)
    assert np.all(V.support_values == -2.5)
    assert not check_positive(V)


def test_bump_is_smooth_and_supported(grid):
    V = build_potential({"kind": "bumps", "bumps": [{"center": 0.5, "width": 0.5, "scale": 2.0}]},
                        grid)
    x = grid.segments[1]
    assert V.support_values[np.argmin(np.abs(x - 0.5))] == pytest.approx(2.0)
    assert np.all(V.support_values[np.abs(x - 0.5) >= 0.25] == 0.0)
    assert V.l1_norm == pytest.approx(0.5, rel=1e-3)


def test_samples_round_trip(grid):
    flat = np.zeros(grid.size)
    n0 = grid.n_per_segment[0]
    flat[n0:n0 + 41] = np.linspace(0, 1, 41)
    V = build_potential({"kind": "samples", "values": flat.tolist()}, grid)
    assert np.allclose(V.flat(), flat)


def test_samples_reject_exterior_values(grid):
    flat = np.zeros(grid.size)
    flat[0] = 1.0
    with pytest.raises(ConfigurationError):
        build_potential({"kind": "samples", "values": flat.tolist()}, grid)


@pytest.mark.parametrize("record", [
    {},
    {"kind": "spike"},
    {"kind": "barrier"},
    {"kind": "barrier", "height": "tall"},
    {"kind": "barrier", "height": float("nan")},
    {"kind": "bumps", "bumps": []},
    {"kind": "bumps", "bumps": [{"center": 0.9, "width": 0.5, "scale": 1.0}]},
])
def test_rejects_bad_records(grid, record):
    with pytest.raises(ConfigurationError):
        build_potential(record, grid)


def test_on_grid_rebuilds_record(grid):
    V = build_potential({"kind": "barrier", "height": 3.0}, grid)
    W = V.on_grid(grid.refined())
    assert W.support_values.size == 81 and np.all(W.support_values == 3.0)
    with pytest.raises(ConfigurationError):
        V.on_grid(make_grid(-1.0, 0.0, 2.0, 3.0, (11, 41, 11)))


def test_zero_potential(grid):
    V = zero_potential(grid)
    assert V.l1_norm == 0.0 and not check_positive(V)


def test_samples_are_read_only(grid):
    V = build_potential({"kind": "barrier", "height": 1.0}, grid)
    with pytest.raises(ValueError):
        V.support_values[0] = 2.0
