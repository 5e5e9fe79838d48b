import numpy as np
import pytest

from interface_scattering.eigen import psi_minus_theta
from interface_scattering.evolve import (
    SpectralData,
    SpectralFunction,
    build_wave_operator,
    forward_transform,
    gaussian_packet,
    intertwining_residual,
    inverse_transform,
    phase_resolution,
    propagate_free,
    propagate_theta,
    remainder_norm,
    spectral_bump,
    wave_limit_deviation,
    wave_operator_matrix,
)
from interface_scattering.numerics import ConfigurationError, WaveFunction, make_kgrid
from interface_scattering.potential import build_potential, zero_potential

THETA = (0.01, 0.01)


def gaussian_free_evolution(grid, center, momentum, width, t):
    """Closed-form solution of ``i u_t = -u_xx`` for the packet of :func:`gaussian_packet`."""
    s = width ** 2 + 1j * t
    def fn(x):
        return (width / np.sqrt(s) * np.exp(1j * momentum * x - 1j * momentum ** 2 * t)
                * np.exp(-((x - center - 2 * momentum * t) ** 2) / (4 * s)))
    return WaveFunction.from_callable(grid, fn)


def l2_gap(u, v):
    return np.sqrt(sum(h_w @ np.abs(a - b) ** 2 for h_w, a, b in
                       zip(_weights(u.grid), u.values, v.values)))


def _weights(grid):
    from interface_scattering.numerics import simpson_weights
    return [simpson_weights(n, h) for n, h in zip(grid.n_per_segment, grid.spacing)]


@pytest.fixture(scope="module")
def small(box_grid):
    V = build_potential({"kind": "barrier", "height": 4.0}, box_grid)
    return SpectralData(V, make_kgrid(0.05, 8.0, 256), jobs=4)


@pytest.fixture(scope="module")
def free(box_grid):
    return SpectralData(zero_potential(box_grid), make_kgrid(), jobs=4)


@pytest.fixture(scope="module")
def packet(box_grid):
    # kept clear of the support so the window truncation stays negligible
    return gaussian_packet(box_grid, -12.0, 2.0, 2.0)


@pytest.fixture(scope="module")
def op_small(small):
    return build_wave_operator(THETA, small)


class TestTransforms:
    def test_parseval(self, spectral, packet):
        assert forward_transform(packet, spectral).norm() == pytest.approx(packet.norm(), rel=1e-8)

    def test_round_trip(self, spectral, packet):
        back = inverse_transform(forward_transform(packet, spectral), spectral)
        assert l2_gap(back, packet) / packet.norm() < 1e-6

    def test_free_case_is_ordinary_fourier_transform(self, free, box_grid):
        phi = gaussian_packet(box_grid, -3.0, 2.0, 1.5)
        k = free.kgrid.nodes
        exact = np.sqrt(2) * 1.5 * np.exp(-(1.5 * (k - 2.0)) ** 2 - 1j * (k - 2.0) * (-3.0))
        assert np.max(np.abs(forward_transform(phi, free).values - exact)) < 1e-6

    def test_tiny_barrier_close_to_free(self, free, box_grid):
        V = build_potential({"kind": "barrier", "height": 1e-8}, box_grid)
        tiny = SpectralData(V, free.kgrid, jobs=4)
        phi = WaveFunction.from_flat(box_grid, gaussian_packet(box_grid, -3.0, 2.0, 1.5).flat())
        ref = forward_transform(WaveFunction.from_flat(free.grid, phi.flat()), free).values
        assert np.max(np.abs(forward_transform(phi, tiny).values - ref)) < 1e-5

    def test_spike_reproduces_eigenfunction(self, small):
        m = 150
        k = small.kgrid.nodes[m]
        f = np.zeros(small.kgrid.n_k, dtype=complex)
        f[m] = 1.0 / small.kgrid.weights[m]
        u = inverse_transform(SpectralFunction(small.kgrid, f), small, THETA)
        psi = psi_minus_theta(k, THETA, small.V).function
        for a, b in zip(u.values, psi.values):
            assert np.allclose(np.sqrt(2 * np.pi) * a, b, atol=1e-10)

    def test_linearity(self, small, packet, box_grid):
        other = gaussian_packet(box_grid, 4.0, -1.5, 1.0)
        combo = WaveFunction.from_flat(box_grid, 2.0 * packet.flat() - 1j * other.flat())
        lhs = forward_transform(combo, small).values
        rhs = 2.0 * forward_transform(packet, small).values - 1j * forward_transform(other, small).values
        assert np.allclose(lhs, rhs, atol=1e-12)

    def test_mismatched_window_rejected(self, small, free):
        with pytest.raises(ConfigurationError):
            inverse_transform(SpectralFunction(free.kgrid, np.zeros(free.kgrid.n_k)), small)

    def test_wrong_length_rejected(self, small):
        with pytest.raises(ConfigurationError):
            SpectralFunction(small.kgrid, np.zeros(3))


class TestWaveOperator:
    def test_identity_at_zero(self, small):
        op = build_wave_operator((0.0, 0.0), small)
        assert op.deviation == 0.0
        assert np.array_equal(op.matrix, np.eye(small.kgrid.n_k))

    def test_kernel_matches_spatial_route(self, spectral):
        f = spectral_bump(spectral.kgrid, 1.5, 0.5)
        # the theta = 0 spatial round trip removes the shared quadrature error
        spatial = forward_transform(inverse_transform(f, spectral, THETA), spectral).values
        base = forward_transform(inverse_transform(f, spectral), spectral).values
        W = wave_operator_matrix(THETA, spectral)
        gap = (W - np.eye(W.shape[0])) @ f.values
        ref = spatial - base
        assert np.linalg.norm(gap - ref) / np.linalg.norm(ref) < 1e-4

    def test_inverse_and_neumann_series(self, op_small):
        assert op_small.solve_residual < 1e-10
        assert op_small.neumann_gap is not None and op_small.neumann_gap < 1e-6

    def test_neumann_skipped_for_larger_parameters(self, small):
        assert build_wave_operator((0.05, 0.0), small).neumann_gap is None

    def test_deviation_is_first_order(self, small):
        devs = [build_wave_operator((r, 0.0), small).deviation for r in (1e-2, 1e-3)]
        assert devs[0] / devs[1] == pytest.approx(10, rel=0.02)

    @pytest.mark.parametrize("entry", [(100, 140), (10, 245)])
    def test_holomorphic_in_parameters(self, small, entry):
        # real and imaginary difference quotients agree
        h = 1e-4
        i, j = entry
        real = (wave_operator_matrix((0.01 + h, 0.0), small)[i, j]
                - wave_operator_matrix((0.01 - h, 0.0), small)[i, j]) / (2 * h)
        imag = (wave_operator_matrix((0.01 + 1j * h, 0.0), small)[i, j]
                - wave_operator_matrix((0.01 - 1j * h, 0.0), small)[i, j]) / (2j * h)
        assert abs(real) > 0 and abs(real - imag) < 1e-4

    @pytest.mark.parametrize("theta", [(0.2, 0.0), (0.0, 0.11j), (0.1,)])
    def test_out_of_range_parameters_rejected(self, small, theta):
        with pytest.raises(ConfigurationError):
            build_wave_operator(theta, small)


class TestIntertwining:
    def test_reference_case_small(self, spectral):
        phi = inverse_transform(spectral_bump(spectral.kgrid, 2.0, 0.4), spectral)
        assert intertwining_residual(phi, (0.0, 0.0), spectral) < 1e-3

    def test_phase_invariance(self, spectral):
        phi = inverse_transform(spectral_bump(spectral.kgrid, 2.0, 0.4), spectral)
        a = intertwining_residual(phi, (0.02, 0.02), spectral)
        b = intertwining_residual(phi.scaled(np.exp(0.7j)), (0.02, 0.02), spectral)
        assert a == pytest.approx(b, rel=1e-10)

    def test_zero_function_rejected(self, small, box_grid):
        zero = WaveFunction.from_callable(box_grid, lambda x: 0 * x)
        with pytest.raises(ConfigurationError):
            intertwining_residual(zero, THETA, small)


class TestPropagation:
    def test_free_packet_matches_closed_form(self, free, box_grid):
        phi = gaussian_packet(box_grid, -10.0, 2.0, 2.0)
        moved = propagate_free(phi, 3.0, free)
        exact = gaussian_free_evolution(box_grid, -10.0, 2.0, 2.0, 3.0)
        assert l2_gap(moved, exact) / exact.norm() < 1e-4

    def test_free_propagation_is_unitary(self, spectral, packet):
        moved = propagate_free(packet, 5.0, spectral)
        assert moved.norm() == pytest.approx(packet.norm(), rel=1e-4)

    def test_group_property(self, op_small):
        lhs = op_small.propagator(2.0) @ op_small.propagator(3.0)
        assert np.max(np.abs(lhs - op_small.propagator(5.0))) < 1e-8

    def test_theta_propagation_at_time_zero(self, spectral, packet):
        op = build_wave_operator(THETA, spectral)
        moved = propagate_theta(packet, 0.0, op, spectral)
        assert l2_gap(moved, packet) / packet.norm() < 1e-3

    def test_remainder_vanishes_without_perturbation(self, small):
        op = build_wave_operator((0.0, 0.0), small)
        assert remainder_norm(7.0, op) == 0.0

    def test_propagator_is_lipschitz_in_time(self, op_small):
        gaps = [np.linalg.norm(op_small.propagator(5.0 + d) - op_small.propagator(5.0), 2)
                for d in (1e-3, 1e-4)]
        assert gaps[0] / gaps[1] == pytest.approx(10, rel=0.01)

    def test_remainder_is_continuous_in_time(self, op_small):
        r1, r2 = remainder_norm(5.0, op_small), remainder_norm(5.001, op_small)
        assert abs(r1 - r2) < 1e-3 * r1

    def test_remainder_bounded_by_deviation(self, op_small):
        # ||W E W^-1 - E|| <= ||W - I|| (1 + ||W^-1||)
        bound = op_small.deviation * (2 + op_small.deviation / (1 - op_small.deviation))
        assert remainder_norm(20.0, op_small) <= bound

    def test_window_mismatch_rejected(self, free, small, packet, op_small, box_grid):
        with pytest.raises(ConfigurationError):
            propagate_theta(WaveFunction.from_flat(free.grid, packet.flat()), 1.0, op_small, free)


class TestWaveLimit:
    def test_zero_parameters_give_zero(self, small):
        op = build_wave_operator((0.0, 0.0), small)
        f = spectral_bump(small.kgrid, 1.0, 0.5)
        assert wave_limit_deviation(f, op, -8.0) < 1e-12

    def test_time_zero_is_deviation_from_identity(self, small, op_small):
        f = spectral_bump(small.kgrid, 1.0, 0.5)
        diff = f.values - op_small.matrix @ f.values
        ref = np.sqrt(np.sum(small.kgrid.weights * np.abs(diff) ** 2))
        assert wave_limit_deviation(f, op_small, 0.0) == pytest.approx(ref, rel=1e-8)

    def test_positive_time_rejected(self, small, op_small):
        with pytest.raises(ConfigurationError):
            wave_limit_deviation(spectral_bump(small.kgrid, 1.0, 0.5), op_small, 1.0)

    def test_phase_resolution_formula(self):
        kg = make_kgrid(0.05, 8.0, 2048)
        step = 7.95 / 1023
        assert phase_resolution(kg, 1.0, -32.0) == pytest.approx(64.0 * step)
        assert phase_resolution(kg, 1.0, -32.0) <= 0.5
        assert phase_resolution(make_kgrid(0.05, 8.0, 1024), 1.0, -32.0) > 0.5
