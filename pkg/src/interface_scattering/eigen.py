"""Generalized eigenfunctions of the reference and perturbed operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .jost import JostSolution, jost_pair
from .krein import (
    DefectBasis,
    krein_coefficients,
    boundary_maps,
    green_kernels,
    interface_matrices,
    interface_residuals,
    m_matrix,
)
from .numerics import (
    ConfigurationError,
    NumericalError,
    WaveFunction,
    first_derivative,
    second_derivative_interior,
)
from .potential import Potential

__all__ = [
    "GeneralizedEigenfunction",
    "ExpansionCoefficients",
    "psi_minus_free",
    "psi_minus_theta",
    "expansion_coefficients",
    "adjoint_theta",
    "apply_operator",
    "pde_residual",
    "adjoint_pairing_check",
    "plateau_envelope",
    "enveloped",
]


@dataclass(frozen=True, eq=False)
class GeneralizedEigenfunction:
    """Scattering state at momentum ``k``.

    For ``k > 0`` the exterior form is ``e^{ikx} + R e^{-ikx}`` left of the
    support and ``T e^{ikx}`` right of it; for ``k < 0`` the roles of the two
    sides are exchanged.
    """

    k: float
    theta: tuple[complex, complex]
    function: WaveFunction
    R: complex
    T: complex
    fit_residual: float

    @property
    def values(self) -> tuple[np.ndarray, ...]:
        return self.function.values

    @property
    def derivative(self) -> tuple[np.ndarray, ...]:
        return self.function.derivative


@dataclass(frozen=True)
class ExpansionCoefficients:
    k: float
    theta: tuple[complex, complex]
    c: np.ndarray


def adjoint_theta(theta: Sequence[complex]) -> tuple[complex, complex]:
    """Parameters of the adjoint operator: ``(t1, t2) -> (-conj t2, -conj t1)``."""
    t1, t2 = (complex(v) for v in theta)
    return (-np.conj(t2), -np.conj(t1))


def _check_k(k: float) -> float:
    k = float(k)
    if k == 0.0 or not np.isfinite(k):
        raise ConfigurationError("generalized eigenfunctions need a finite k != 0")
    return k


def _exterior_fit(psi: WaveFunction, k: float) -> tuple[complex, complex, float]:
    """Least-squares amplitudes on both exterior segments; returns ``(R, T, residual)``."""
    xl, _, xr = psi.grid.segments
    left, _, right = psi.values

    def fit(x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
        basis = np.column_stack([np.exp(1j * k * x), np.exp(-1j * k * x)])
        coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
        return coef, float(np.max(np.abs(basis @ coef - y)))

    (lin, lout), rl = fit(xl, left)
    (rin, rout), rr = fit(xr, right)
    if k > 0:
        # incoming unit wave from the left, nothing incoming from the right
        return lout, rin, max(rl, rr, abs(lin - 1.0), abs(rout))
    # for k < 0, e^{ikx} travels leftwards: incoming from the right
    return rout, lin, max(rl, rr, abs(rin - 1.0), abs(lout))


def _free_state(k: float, V: Potential,
                pair: tuple[JostSolution, JostSolution] | None) -> tuple[WaveFunction, DefectBasis]:
    zeta = abs(k)
    basis = green_kernels(zeta, V, pair if pair is not None else jost_pair(zeta, V))
    plus, minus = basis.pair
    if k > 0:
        src, c = plus, -2j * k / basis.w
    else:
        src, c = minus, 2j * k / basis.w
    psi = WaveFunction(V.grid, tuple(c * v for v in src.chi), tuple(c * d for d in src.chi_prime))
    return psi, basis


def psi_minus_free(k: float, V: Potential,
                   pair: tuple[JostSolution, JostSolution] | None = None) -> GeneralizedEigenfunction:
    """Scattering state of the reference operator built from one Jost solution."""
    k = _check_k(k)
    psi, _ = _free_state(k, V, pair)
    R, T, res = _exterior_fit(psi, k)
    return GeneralizedEigenfunction(k, (0j, 0j), psi, R, T, res)


def _coefficients(psi: WaveFunction, basis: DefectBasis, theta) -> np.ndarray:
    det = m_matrix(basis.zeta, theta, q=basis.gamma1())
    C = krein_coefficients(det, interface_matrices(theta).B)
    return C @ boundary_maps(psi).gamma1


def expansion_coefficients(k: float, theta: Sequence[complex], V: Potential,
                           pair: tuple[JostSolution, JostSolution] | None = None) -> ExpansionCoefficients:
    """``c = M^{-1}(|k|, theta) B gamma1 psi(., k)``."""
    k = _check_k(k)
    psi, basis = _free_state(k, V, pair)
    c = _coefficients(psi, basis, theta)
    return ExpansionCoefficients(k, tuple(complex(t) for t in theta), c)


def psi_minus_theta(k: float, theta: Sequence[complex], V: Potential,
                    pair: tuple[JostSolution, JostSolution] | None = None) -> GeneralizedEigenfunction:
    """Scattering state of the perturbed operator, ``psi - sum_i c_i g_i`` with ``g`` at ``zeta = |k|``."""
    k = _check_k(k)
    theta = tuple(complex(t) for t in theta)
    psi, basis = _free_state(k, V, pair)
    c = _coefficients(psi, basis, theta)
    vals = [v.copy() for v in psi.values]
    ders = [d.copy() for d in psi.derivative]
    for ci, fn in zip(c, basis.functions):
        for s in range(3):
            vals[s] -= ci * fn.values[s]
            ders[s] -= ci * fn.derivative[s]
    out = WaveFunction(V.grid, tuple(vals), tuple(ders))
    R, T, res = _exterior_fit(out, k)
    return GeneralizedEigenfunction(k, theta, out, R, T, res)


def apply_operator(u: WaveFunction, V: Potential) -> WaveFunction:
    """``-u'' + V u`` segment by segment (second derivative as derivative of ``u'``)."""
    der = u.derivative_tables()
    vals = tuple(
        -first_derivative(d, h) + v * uu
        for d, h, v, uu in zip(der, u.grid.spacing, V.values, u.values)
    )
    return WaveFunction(u.grid, vals)


def pde_residual(u: WaveFunction, V: Potential, energy: complex) -> float:
    """Sup norm of ``-u'' + V u - E u`` on nodes at least two steps from every segment end."""
    worst = 0.0
    for uu, h, v in zip(u.values, u.grid.spacing, V.values):
        r = -second_derivative_interior(uu, h) + (v[2:-2] - energy) * uu[2:-2]
        worst = max(worst, float(np.max(np.abs(r))))
    return worst


def adjoint_pairing_check(phi: WaveFunction, psi: WaveFunction, theta: Sequence[complex],
                          V: Potential, tol: float = 1e-6) -> float:
    """``|<psi, Q_theta phi> - <Q_theta' psi, phi>|`` with ``theta'`` the adjoint parameters.

    Both inputs must satisfy their interface conditions to within ``tol``.
    """
    theta = tuple(complex(t) for t in theta)
    theta_adj = adjoint_theta(theta)
    for label, fn, th in (("phi", phi, theta), ("psi", psi, theta_adj)):
        res = interface_residuals(fn, th)
        worst = max(v for key, v in res.items() if not key.startswith("literal"))
        if worst > tol:
            raise NumericalError(f"{label} violates its interface conditions by {worst:.2e}")
    lhs = psi.inner(apply_operator(phi, V))
    rhs = apply_operator(psi, V).inner(phi)
    return float(abs(lhs - rhs))


def plateau_envelope(a: float, b: float, margin: float = 1.0, scale: float = 3.0):
    """Smooth cutoff equal to one on ``[a - margin, b + margin]``; returns ``(f, f')``."""

    def dist(x):
        return np.maximum(0.0, np.maximum(a - margin - x, x - b - margin))

    def f(x):
        return np.exp(-(dist(x) / scale) ** 4)

    def df(x):
        d = dist(x)
        sgn = np.where(x > b + margin, 1.0, -1.0)
        return -4.0 * d ** 3 / scale ** 4 * f(x) * sgn * (d > 0)

    return f, df


def enveloped(u: WaveFunction, a: float, b: float, margin: float = 1.0,
              scale: float = 3.0) -> WaveFunction:
    """Product of ``u`` with :func:`plateau_envelope`; keeps the interface conditions intact."""
    f, df = plateau_envelope(a, b, margin, scale)
    der = u.derivative_tables()
    vals = tuple(f(x) * v for x, v in zip(u.grid.segments, u.values))
    ders = tuple(df(x) * v + f(x) * d for x, v, d in zip(u.grid.segments, u.values, der))
    return WaveFunction(u.grid, vals, ders)
