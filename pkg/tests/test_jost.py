import numpy as np
import pytest

from interface_scattering.jost import (
    free_continuation,
    jost_csv_rows,
    jost_pair,
    jost_wronskian,
    jost_wronskian_w0,
    ode_jost_oracle,
    picard_jost,
    sin_over_zeta,
    wronskian_table,
)
from interface_scattering.numerics import ConfigurationError, NumericalError
from interface_scattering.potential import build_potential, zero_potential


def barrier_right_solution(x, zeta, height, a=0.0, b=1.0):
    """Closed-form right Jost solution of a rectangular barrier on ``[a, b]``."""
    x = np.asarray(x, dtype=float)
    q = np.sqrt(complex(zeta * zeta - height))
    ub, dub = np.exp(1j * zeta * b), 1j * zeta * np.exp(1j * zeta * b)
    inside = ub * np.cos(q * (x - b)) + dub * (np.sin(q * (x - b)) / q)
    ua = ub * np.cos(q * (a - b)) + dub * np.sin(q * (a - b)) / q
    dua = -q * ub * np.sin(q * (a - b)) + dub * np.cos(q * (a - b))
    outside = ua * np.cos(zeta * (x - a)) + dua * np.sin(zeta * (x - a)) / zeta
    return np.where(x > b, np.exp(1j * zeta * x), np.where(x < a, outside, inside))


class TestClosedForms:
    def test_linear_interior_at_matched_energy(self, barrier):
        # zeta^2 equals the barrier height, so the interior solution is affine
        sol, diag = picard_jost("right", 2.0, barrier)
        assert diag.converged
        assert sol.chi[1][0] == pytest.approx(1.402448017104221 + 1.7415910999199666j, abs=1e-8)
        assert np.allclose(sol.chi[1], np.exp(2j) * (1 + 2j * (sol.grid.segments[1] - 1)),
                           atol=1e-10)

    def test_jost_function_at_matched_energy(self, barrier):
        assert jost_wronskian(2.0, barrier) == pytest.approx(np.exp(2j) * (-4 - 4j), abs=1e-8)

    @pytest.mark.parametrize("zeta", [0.7, 3.1, 1.5 + 0.5j, 2.5j])
    def test_barrier_against_transfer_formula(self, barrier, zeta):
        sol, _ = picard_jost("right", zeta, barrier)
        x = sol.grid.nodes
        ref = barrier_right_solution(x, zeta, 4.0)
        assert np.max(np.abs(np.concatenate(sol.chi) - ref)) < 1e-8 * np.max(np.abs(ref))

    @pytest.mark.parametrize("side,sign", [("right", 1), ("left", -1)])
    def test_free_case_is_plane_wave(self, jost_grid, side, sign):
        sol, diag = picard_jost(side, 1.3, zero_potential(jost_grid))
        x = jost_grid.nodes
        assert np.max(np.abs(np.concatenate(sol.chi) - np.exp(sign * 1.3j * x))) < 1e-14
        assert diag.iterations <= 1

    def test_free_jost_function(self, jost_grid):
        assert jost_wronskian(0.9, zero_potential(jost_grid)) == pytest.approx(-1.8j, abs=1e-13)


class TestPicard:
    @pytest.mark.parametrize("zeta", [0.5, 4.0, 2.0 + 1.0j])
    def test_matches_rk4_oracle(self, barrier, zeta):
        for side in ("left", "right"):
            sol, _ = picard_jost(side, zeta, barrier)
            ref = ode_jost_oracle(side, zeta, barrier)
            for s, r in zip(sol.chi, ref.chi):
                assert np.max(np.abs(s - r)) < 1e-7

    def test_terms_obey_factorial_bound(self, barrier):
        # each term is bounded by (l1 * kernel bound)^n / n!
        _, diag = picard_jost("right", 1.0, barrier)
        c = diag.kernel_bound * barrier.l1_norm
        bounds = [c ** n / np.prod(np.arange(1, n + 1)) for n in range(len(diag.term_sup_norms))]
        assert all(t <= 1.01 * bd + 1e-15 for t, bd in zip(diag.term_sup_norms, bounds))

    def test_wronskian_constant_across_segments(self, barrier):
        plus, minus = jost_pair(1.7 + 0.2j, barrier)
        table = np.concatenate(wronskian_table(plus, minus))
        assert np.ptp(np.abs(table)) < 1e-10

    def test_evaluate_matches_nodes(self, barrier):
        sol, _ = picard_jost("left", 1.1, barrier)
        x = sol.grid.nodes
        u, du = sol.evaluate(x)
        assert np.allclose(u, np.concatenate(sol.chi), atol=1e-12)
        xm = np.array([0.3333, 0.71])
        assert np.allclose(sol.evaluate(xm)[0], ode_jost_oracle("left", 1.1, barrier).evaluate(xm)[0],
                           atol=1e-7)


class TestWronskianIdentity:
    @pytest.mark.parametrize("k", [0.3, 1.0, 2.0, 4.5])
    def test_modulus_identity(self, barrier, k):
        pair = jost_pair(k, barrier)
        w = jost_wronskian(k, barrier, pair)
        w0 = jost_wronskian_w0(k, barrier, pair)
        assert abs(w) ** 2 - abs(w0) ** 2 == pytest.approx(4 * k * k, rel=1e-10)

    def test_conjugation_shortcut_matches_direct(self, barrier):
        pair = jost_pair(1.4, barrier)
        assert jost_wronskian_w0(1.4, barrier, pair) == pytest.approx(
            jost_wronskian_w0(1.4, barrier), abs=1e-12)


class TestHelpers:
    def test_sin_over_zeta_small_branch(self):
        d = np.array([0.0, 1e-6, 0.5])
        assert np.allclose(sin_over_zeta(0.0, d), d)
        assert sin_over_zeta(2.0, d)[2] == pytest.approx(np.sin(1.0) / 2.0)
        assert sin_over_zeta(1e-3, d)[1] == pytest.approx(1e-6, rel=1e-12)

    def test_free_continuation_solves_equation(self):
        x = np.linspace(0, 1, 5)
        u, du = free_continuation(x, 0.0, 1.0, 0.0, 2.0)
        assert np.allclose(u, np.cos(2 * x)) and np.allclose(du, -2 * np.sin(2 * x))

    def test_csv_rows(self, barrier):
        sol, _ = picard_jost("right", 1.0, barrier)
        rows = jost_csv_rows(sol)
        assert len(rows) == sol.grid.size and len(rows[0]) == 5


class TestErrors:
    def test_lower_half_plane_rejected(self, barrier):
        with pytest.raises(ConfigurationError):
            picard_jost("right", 1.0 - 0.1j, barrier)

    def test_bad_side_rejected(self, barrier):
        with pytest.raises(ConfigurationError):
            picard_jost("up", 1.0, barrier)
        with pytest.raises(ConfigurationError):
            ode_jost_oracle("down", 1.0, barrier)

    def test_bad_tolerance_rejected(self, barrier):
        with pytest.raises(ConfigurationError):
            picard_jost("right", 1.0, barrier, tol=0.0)

    def test_coarse_support_flags_wronskian_spread(self):
        from interface_scattering.numerics import make_grid
        g = make_grid(-1.0, 0.0, 1.0, 2.0, (5, 5, 5))
        V = build_potential({"kind": "barrier", "height": 400.0}, g)
        with pytest.raises(NumericalError):
            jost_wronskian(1.0, V)


class TestRealAxis:
    @pytest.mark.parametrize("k", [0.3, 1.7, 4.0])
    def test_conjugation_symmetry(self, barrier, k):
        for side in ("left", "right"):
            pos, _ = picard_jost(side, k, barrier)
            neg, _ = picard_jost(side, -k, barrier)
            for p, n in zip(pos.chi, neg.chi):
                assert np.max(np.abs(n - np.conj(p))) < 1e-10
        assert jost_wronskian(-k, barrier) == pytest.approx(np.conj(jost_wronskian(k, barrier)),
                                                           abs=1e-10)

    @pytest.mark.parametrize("k", [0.5, 2.0, 6.0])
    def test_rescaled_solution_bounded(self, barrier, k):
        sol, diag = picard_jost("right", k, barrier)
        bound = np.exp(diag.kernel_bound * barrier.l1_norm)
        assert max(np.max(np.abs(b)) for b in sol.b_rescaled) <= bound

    def test_positive_potential_jost_function_bounds(self, barrier):
        ks = np.linspace(-6.0, 6.0, 61)
        assert all(abs(jost_wronskian(k, barrier)) >= 2 * abs(k) - 1e-12 for k in ks)
        assert abs(jost_wronskian(0.0, barrier)) > 1.0

    @pytest.mark.parametrize("zeta", [2j, 0.5 + 2j, 3.0 + 0.1j])
    def test_oracle_agreement_up_the_imaginary_axis(self, barrier, zeta):
        sol, _ = picard_jost("right", zeta, barrier)
        ref = ode_jost_oracle("right", zeta, barrier)
        assert max(np.max(np.abs(s - r)) for s, r in zip(sol.chi, ref.chi)) < 1e-6
