"""Jost solutions by Picard iteration of the rescaled Volterra equation, with an RK4 oracle.

For ``Im zeta >= 0`` the right solution equals ``exp(i zeta x)`` for ``x >= b``
and the left solution equals ``exp(-i zeta x)`` for ``x <= a``.  Writing
``chi_right = exp(i zeta x) b_right`` gives

    b_right(x) = 1 - int_x^b kappa(t - x) V(t) b_right(t) dt,
    kappa(d)   = -exp(i zeta d) sin(zeta d) / zeta,

which is solved on the support segment; the left solution is obtained by
reflecting the support.  Outside the support both solutions are continued
with the free propagator.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Literal

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from .numerics import (
    ConfigurationError,
    NumericalError,
    SpatialGrid,
    WaveFunction,
    tail_integral_weights,
)
from .potential import Potential

__all__ = [
    "JostSolution",
    "PicardDiagnostics",
    "picard_jost",
    "ode_jost_oracle",
    "jost_pair",
    "jost_wronskian",
    "jost_wronskian_w0",
    "wronskian_table",
    "sin_over_zeta",
    "free_continuation",
    "jost_csv_rows",
]

Side = Literal["left", "right"]
SMALL_ARGUMENT = 1e-4
WRONSKIAN_SPREAD_TOL = 1e-8


@dataclass(frozen=True)
class PicardDiagnostics:
    iterations: int
    term_sup_norms: tuple[float, ...]
    converged: bool
    residual: float
    kernel_bound: float


@dataclass(frozen=True, eq=False)
class JostSolution:
    """Samples of a Jost solution and its derivative on every segment of the grid."""

    side: Side
    zeta: complex
    grid: SpatialGrid
    chi: tuple[np.ndarray, np.ndarray, np.ndarray]
    chi_prime: tuple[np.ndarray, np.ndarray, np.ndarray]
    b_rescaled: tuple[np.ndarray, np.ndarray, np.ndarray]
    b_rescaled_prime: tuple[np.ndarray, np.ndarray, np.ndarray]
    support_potential: np.ndarray = field(repr=False)

    def traces(self) -> dict[str, tuple[complex, complex]]:
        """One-sided ``(value, derivative)`` at ``a-``, ``a+``, ``b-``, ``b+``."""
        c, d = self.chi, self.chi_prime
        return {
            "a-": (complex(c[0][-1]), complex(d[0][-1])),
            "a+": (complex(c[1][0]), complex(d[1][0])),
            "b-": (complex(c[1][-1]), complex(d[1][-1])),
            "b+": (complex(c[2][0]), complex(d[2][0])),
        }

    def as_wavefunction(self) -> WaveFunction:
        return WaveFunction(self.grid, self.chi, self.chi_prime)

    def evaluate(self, x: np.ndarray | float) -> tuple[np.ndarray, np.ndarray]:
        """``(chi, chi')`` at arbitrary points; support points use Hermite interpolation.

        Points equal to ``a`` or ``b`` are read from the support segment.
        """
        x = np.atleast_1d(np.asarray(x, dtype=float))
        g, z = self.grid, self.zeta
        u = np.empty(x.shape, dtype=complex)
        du = np.empty(x.shape, dtype=complex)
        left, right = x < g.a, x > g.b
        mid = ~(left | right)
        xs = g.segments[1]
        if np.any(mid):
            chi2 = (self.support_potential - z * z) * self.chi[1]
            u[mid] = CubicHermiteSpline(xs, self.chi[1], self.chi_prime[1])(x[mid])
            du[mid] = CubicHermiteSpline(xs, self.chi_prime[1], chi2)(x[mid])
        ua, dua = self.chi[1][0], self.chi_prime[1][0]
        ub, dub = self.chi[1][-1], self.chi_prime[1][-1]
        if np.any(left):
            u[left], du[left] = free_continuation(x[left], g.a, ua, dua, z)
        if np.any(right):
            u[right], du[right] = free_continuation(x[right], g.b, ub, dub, z)
        return u, du


def sin_over_zeta(zeta: complex, delta: np.ndarray) -> np.ndarray:
    """``sin(zeta d) / zeta`` with a Taylor branch for ``|zeta d| < 1e-4`` (covers ``zeta = 0``)."""
    delta = np.asarray(delta, dtype=float)
    s = zeta * delta
    out = np.empty(delta.shape, dtype=complex)
    small = np.abs(s) < SMALL_ARGUMENT
    s2 = s[small] ** 2
    out[small] = delta[small] * (1.0 - s2 / 6.0 + s2 * s2 / 120.0)
    big = ~small
    out[big] = np.sin(s[big]) / zeta
    return out


def free_continuation(x: np.ndarray, x0: float, u0: complex, du0: complex,
                      zeta: complex) -> tuple[np.ndarray, np.ndarray]:
    """Solution of ``-u'' = zeta^2 u`` with data ``(u0, du0)`` at ``x0``."""
    d = np.asarray(x, dtype=float) - x0
    c = np.cos(zeta * d)
    s = sin_over_zeta(zeta, d)
    return u0 * c + du0 * s, -zeta * zeta * u0 * s + du0 * c


@lru_cache(maxsize=32)
def _tail_weights(n: int, spacing: float) -> np.ndarray:
    return tail_integral_weights(n, spacing)


@lru_cache(maxsize=8)
def _offset_index(n: int) -> np.ndarray:
    j = np.arange(n)
    return j[None, :] - j[:, None] + (n - 1)


def _solve_rescaled(x: np.ndarray, v: np.ndarray, zeta: complex, tol: float,
                    max_iter: int) -> tuple[np.ndarray, np.ndarray, PicardDiagnostics]:
    """Picard iteration for the right-side rescaled equation on a uniform support grid."""
    n = x.size
    tail = _tail_weights(n, float(x[1] - x[0]))
    # the kernel depends on t_i - x_j only, so it is evaluated once per offset
    offsets = (np.arange(-(n - 1), n)) * float(x[1] - x[0])
    kappa = -np.exp(1j * zeta * offsets) * sin_over_zeta(zeta, offsets)
    index = _offset_index(n)
    op = tail * kappa[index] * v[None, :]
    d_op = -tail * np.exp(2j * zeta * offsets)[index] * v[None, :]
    bound = float(np.max(np.abs(kappa[n - 1:])))  # |kappa| over d in [0, b - a]

    b = np.ones(n, dtype=complex)
    term = b.copy()
    norms = [1.0]
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        term = -(op @ term)
        b += term
        s = float(np.max(np.abs(term)))
        norms.append(s)
        if s < tol:
            converged = True
            break
        if not np.isfinite(s):
            break
    residual = float(np.max(np.abs(b - (1.0 - op @ b))))
    diag = PicardDiagnostics(iterations, tuple(norms), converged, residual, bound)
    if not converged:
        raise NumericalError(
            f"Picard iteration did not reach tol={tol:g} in {max_iter} steps "
            f"(last term {norms[-1]:.3e}) at zeta={zeta}"
        )
    return b, d_op @ b, diag


def picard_jost(side: Side, zeta: complex, V: Potential, tol: float = 1e-13,
                max_iter: int = 64) -> tuple[JostSolution, PicardDiagnostics]:
    """Jost solution for one side via the Picard series of the rescaled Volterra equation."""
    zeta = complex(zeta)
    _check_side_zeta(side, zeta)
    if tol <= 0:
        raise ConfigurationError("tol must be positive")
    g = V.grid
    xs = g.segments[1]
    v = V.support_values
    if side == "right":
        bs, dbs, diag = _solve_rescaled(xs, v, zeta, tol, max_iter)
    else:
        bm, dbm, diag = _solve_rescaled(-xs[::-1], v[::-1], zeta, tol, max_iter)
        bs, dbs = bm[::-1].copy(), -dbm[::-1]
    return _assemble(side, zeta, V, bs, dbs), diag


def _assemble(side: Side, zeta: complex, V: Potential, bs: np.ndarray,
              dbs: np.ndarray) -> JostSolution:
    g = V.grid
    xl, xs, xr = g.segments
    sign = 1.0 if side == "right" else -1.0
    phase_s = np.exp(sign * 1j * zeta * xs)
    chi_s = phase_s * bs
    dchi_s = phase_s * (sign * 1j * zeta * bs + dbs)
    if side == "right":
        chi_r = np.exp(1j * zeta * xr)
        dchi_r = 1j * zeta * chi_r
        chi_l, dchi_l = free_continuation(xl, g.a, chi_s[0], dchi_s[0], zeta)
    else:
        chi_l = np.exp(-1j * zeta * xl)
        dchi_l = -1j * zeta * chi_l
        chi_r, dchi_r = free_continuation(xr, g.b, chi_s[-1], dchi_s[-1], zeta)
    chi = (chi_l, chi_s, chi_r)
    dchi = (dchi_l, dchi_s, dchi_r)
    b_tab = tuple(np.exp(-sign * 1j * zeta * x) * c for x, c in zip(g.segments, chi))
    db_tab = tuple(
        np.exp(-sign * 1j * zeta * x) * (d - sign * 1j * zeta * c)
        for x, c, d in zip(g.segments, chi, dchi)
    )
    return JostSolution(side, zeta, g, chi, dchi, b_tab, db_tab, V.support_values)


def _check_side_zeta(side: str, zeta: complex) -> None:
    if side not in ("left", "right"):
        raise ConfigurationError(f"side must be 'left' or 'right', got {side!r}")
    if zeta.imag < 0:
        raise ConfigurationError(f"Jost solutions need Im zeta >= 0, got {zeta}")


def _rk4_march(x: np.ndarray, vfun, zeta: complex, u0: complex, du0: complex,
               substeps: int) -> tuple[np.ndarray, np.ndarray]:
    """March ``u'' = (V - zeta^2) u`` along the nodes ``x`` (any direction)."""
    z2 = zeta * zeta
    u = np.empty(x.size, dtype=complex)
    du = np.empty(x.size, dtype=complex)
    u[0], du[0] = u0, du0
    y = np.array([u0, du0], dtype=complex)

    def rhs(xx: float, yy: np.ndarray) -> np.ndarray:
        return np.array([yy[1], (vfun(xx) - z2) * yy[0]])

    for i in range(x.size - 1):
        h = (x[i + 1] - x[i]) / substeps
        if abs(h) < 1e-14:
            raise NumericalError("RK4 step size underflow")
        xx = x[i]
        for _ in range(substeps):
            k1 = rhs(xx, y)
            k2 = rhs(xx + h / 2, y + h / 2 * k1)
            k3 = rhs(xx + h / 2, y + h / 2 * k2)
            k4 = rhs(xx + h, y + h * k3)
            y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            xx += h
        u[i + 1], du[i + 1] = y
    return u, du


def ode_jost_oracle(side: Side, zeta: complex, V: Potential, substeps: int = 4) -> JostSolution:
    """Independent Jost solution: classical RK4 marched inward from the exterior data."""
    zeta = complex(zeta)
    _check_side_zeta(side, zeta)
    g = V.grid
    xl, xs, xr = g.segments
    vs = V.support_values

    def v_support(xx: float) -> float:
        return float(np.interp(xx, xs, vs))

    def v_zero(xx: float) -> float:
        return 0.0

    if side == "right":
        chi_r = np.exp(1j * zeta * xr)
        dchi_r = 1j * zeta * chi_r
        us, dus = _rk4_march(xs[::-1], v_support, zeta, chi_r[0], dchi_r[0], substeps)
        chi_s, dchi_s = us[::-1], dus[::-1]
        ul, dul = _rk4_march(xl[::-1], v_zero, zeta, chi_s[0], dchi_s[0], substeps)
        chi_l, dchi_l = ul[::-1], dul[::-1]
    else:
        chi_l = np.exp(-1j * zeta * xl)
        dchi_l = -1j * zeta * chi_l
        chi_s, dchi_s = _rk4_march(xs, v_support, zeta, chi_l[-1], dchi_l[-1], substeps)
        chi_r, dchi_r = _rk4_march(xr, v_zero, zeta, chi_s[-1], dchi_s[-1], substeps)
    sign = 1.0 if side == "right" else -1.0
    chi = (chi_l, chi_s, chi_r)
    dchi = (dchi_l, dchi_s, dchi_r)
    b_tab = tuple(np.exp(-sign * 1j * zeta * x) * c for x, c in zip(g.segments, chi))
    db_tab = tuple(
        np.exp(-sign * 1j * zeta * x) * (d - sign * 1j * zeta * c)
        for x, c, d in zip(g.segments, chi, dchi)
    )
    return JostSolution(side, zeta, g, chi, dchi, b_tab, db_tab, vs)


def jost_pair(zeta: complex, V: Potential, tol: float = 1e-13) -> tuple[JostSolution, JostSolution]:
    """``(chi_right, chi_left)`` at one spectral parameter."""
    plus, _ = picard_jost("right", zeta, V, tol=tol)
    minus, _ = picard_jost("left", zeta, V, tol=tol)
    return plus, minus


def wronskian_table(f: JostSolution, g: JostSolution) -> tuple[np.ndarray, ...]:
    """Pointwise ``f g' - f' g`` on every segment."""
    return tuple(
        fc * gd - fd * gc
        for fc, fd, gc, gd in zip(f.chi, f.chi_prime, g.chi, g.chi_prime)
    )


def _checked_wronskian(f: JostSolution, g: JostSolution) -> complex:
    table = wronskian_table(f, g)
    ref = complex(table[1][0])
    probes = np.array([t[t.size // 2] for t in table])
    spread = float(np.max(np.abs(probes - ref)))
    if spread > WRONSKIAN_SPREAD_TOL * (1.0 + abs(ref)):
        raise NumericalError(
            f"Wronskian varies by {spread:.3e} across the grid; refine the support segment"
        )
    return ref


def jost_wronskian(zeta: complex, V: Potential,
                   pair: tuple[JostSolution, JostSolution] | None = None) -> complex:
    """Jost function ``w = chi_right chi_left' - chi_right' chi_left``, read at node ``a+``.

    The value is re-read at the middle node of each segment and the call fails
    when the spread exceeds ``1e-8 (1 + |w|)``.
    """
    plus, minus = pair if pair is not None else jost_pair(zeta, V)
    return _checked_wronskian(plus, minus)


def jost_wronskian_w0(k: float, V: Potential,
                      pair: tuple[JostSolution, JostSolution] | None = None) -> complex:
    """Wronskian of ``chi_right(., -k)`` and ``chi_left(., k)`` for real ``k``.

    ``pair`` may carry ``(chi_right(., k), chi_left(., k))``; the reflected
    right solution is then taken as the complex conjugate, which is exact for
    real potentials and real ``k``.
    """
    k = float(np.real(k))
    if pair is None:
        plus_neg, _ = picard_jost("right", complex(-k, 0.0), V)
        minus, _ = picard_jost("left", complex(k, 0.0), V)
    else:
        plus, minus = pair
        plus_neg = conjugate_solution(plus)
    return _checked_wronskian(plus_neg, minus)


def conjugate_solution(sol: JostSolution) -> JostSolution:
    """Solution at ``-conj(zeta)`` obtained by conjugation (real potentials)."""
    conj = lambda tabs: tuple(np.conj(t) for t in tabs)  # noqa: E731
    return JostSolution(sol.side, -np.conj(sol.zeta), sol.grid, conj(sol.chi),
                        conj(sol.chi_prime), conj(sol.b_rescaled),
                        conj(sol.b_rescaled_prime), sol.support_potential)


def jost_csv_rows(sol: JostSolution) -> list[tuple[float, float, float, float, float]]:
    """Rows ``(x, Re chi, Im chi, Re chi', Im chi')`` over all nodes, duplicates included."""
    x = sol.grid.nodes
    c = np.concatenate(sol.chi)
    d = np.concatenate(sol.chi_prime)
    return [(float(xi), float(ci.real), float(ci.imag), float(di.real), float(di.imag))
            for xi, ci, di in zip(x, c, d)]
