"""Generalized Fourier transforms, the stationary wave operator and the propagators.

All time-dependent objects live on the momentum window of a :class:`SpectralGrid`.
A spectral sample table ``f`` is paired with the inner product ``sum_m w_m conj(f_m) g_m``
where ``w`` are the window quadrature weights; operator norms refer to that space.

Conventions::

    (F phi)(k)           = (2 pi)^{-1/2} int conj(psi(x, k)) phi(x) dx
    (F_theta^{-1} f)(x)  = (2 pi)^{-1/2} int psi_theta(x, k) f(k) dk
    W_theta              = F_theta^{-1} F,   realized in momentum space as F F_theta^{-1}

The momentum-space kernel of the wave operator follows from
``<psi(k), g_i(k'^2 + i0)> = conj(gamma1 psi(k))_i / (k^2 - k'^2 - i0)``,
split into a principal value (off-shell nodes) and an on-shell ``i pi delta`` part.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.linalg

from .jost import jost_pair, jost_wronskian
from .krein import POINTS, W_THRESHOLD, gamma1_from_traces, interface_matrices, weyl_matrix
from .numerics import (
    ConfigurationError,
    NumericalError,
    SpatialGrid,
    SpectralGrid,
    WaveFunction,
    second_derivative_interior,
    simpson_weights,
    weighted_op_norm,
)
from .potential import Potential

__all__ = [
    "SpectralFunction",
    "SpectralData",
    "WaveOperator",
    "gaussian_packet",
    "spectral_bump",
    "forward_transform",
    "inverse_transform",
    "build_wave_operator",
    "wave_operator_matrix",
    "intertwining_residual",
    "propagate_free",
    "propagate_theta",
    "remainder_matrix",
    "remainder_norm",
    "wave_limit_deviation",
    "phase_resolution",
]

MAX_THETA = 0.1
NEUMANN_TERMS = 8
NEUMANN_RADIUS = 0.01
SOLVE_TOL = 1e-8
INV_SQRT_2PI = 1.0 / np.sqrt(2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class SpectralFunction:
    """Complex samples over the nodes of a :class:`SpectralGrid`."""

    kgrid: SpectralGrid
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=complex)
        if vals.shape != (self.kgrid.n_k,):
            raise ConfigurationError(
                f"spectral table has shape {vals.shape}, expected ({self.kgrid.n_k},)"
            )
        if not np.all(np.isfinite(vals)):
            raise NumericalError("spectral table has non-finite entries")
        object.__setattr__(self, "values", vals)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.kgrid.weights * np.abs(self.values) ** 2)))

    def scaled(self, c: complex) -> "SpectralFunction":
        return SpectralFunction(self.kgrid, c * self.values)


def gaussian_packet(grid: SpatialGrid, center: float, momentum: float,
                    width: float) -> WaveFunction:
    """``exp(-(x - center)^2 / (4 width^2) + i momentum x)`` with its derivative."""
    if width <= 0:
        raise ConfigurationError("packet width must be positive")

    def fn(x):
        return np.exp(-((x - center) ** 2) / (4 * width ** 2) + 1j * momentum * x)

    def dfn(x):
        return (-(x - center) / (2 * width ** 2) + 1j * momentum) * fn(x)

    return WaveFunction.from_callable(grid, fn, dfn)


def spectral_bump(kgrid: SpectralGrid, center: float, width: float) -> SpectralFunction:
    """Gaussian profile in momentum, centred at ``center`` (either sign)."""
    if width <= 0:
        raise ConfigurationError("bump width must be positive")
    return SpectralFunction(kgrid, np.exp(-(((kgrid.nodes - center) / width) ** 2)))


def _traces_array(sol) -> np.ndarray:
    t = sol.traces()
    return np.array([t[p] for p in POINTS], dtype=complex)


class SpectralData:
    """Jost data at every momentum ``|k|`` of a window, on one potential and grid.

    Holds the Jost tables ``chi_R``, ``chi_L`` for each positive speed, the Jost
    function, the Weyl matrix and the traces needed to assemble ``psi`` and
    ``psi_theta`` segment by segment as combinations of the two Jost solutions.
    """

    def __init__(self, V: Potential, kgrid: SpectralGrid, jobs: int = 1) -> None:
        self.V = V
        self.grid = V.grid
        self.kgrid = kgrid
        n_k = kgrid.n_k
        self.n_half = n_k // 2
        self.speeds = kgrid.nodes[self.n_half:]
        with ThreadPoolExecutor(max_workers=max(1, int(jobs))) as pool:
            rows = list(pool.map(self._speed_data, self.speeds))
        self.chi_plus = tuple(np.array([r[0][s] for r in rows]) for s in range(3))
        self.chi_minus = tuple(np.array([r[1][s] for r in rows]) for s in range(3))
        self.w = np.array([r[2] for r in rows])
        self.q = np.array([r[3] for r in rows])
        self.tr_plus = np.array([r[4] for r in rows])
        self.tr_minus = np.array([r[5] for r in rows])
        idx = np.arange(n_k)
        self.half_index = np.where(idx >= self.n_half, idx - self.n_half, self.n_half - 1 - idx)
        self.positive = kgrid.nodes > 0
        absk = np.abs(kgrid.nodes)
        w = self.w[self.half_index]
        self.free_coeff = -2j * absk / w
        tr = np.where(self.positive[:, None, None], self.tr_plus[self.half_index],
                      self.tr_minus[self.half_index])
        self.free_gamma1 = np.array(
            [gamma1_from_traces(c * t) for c, t in zip(self.free_coeff, tr)]
        )
        self._kernel: np.ndarray | None = None
        self._x_weights = tuple(simpson_weights(n, h)
                                for n, h in zip(self.grid.n_per_segment, self.grid.spacing))

    def _speed_data(self, k: float):
        plus, minus = jost_pair(complex(k), self.V)
        w = jost_wronskian(complex(k), self.V, (plus, minus))
        if abs(w) < W_THRESHOLD:
            raise NumericalError(f"Jost function vanishes at k={k}")
        q = weyl_matrix(complex(k), self.V, (plus, minus))
        return (plus.chi, minus.chi, w, q, _traces_array(plus), _traces_array(minus))

    def describe(self) -> dict:
        return {"grid": self.grid.describe(), "window": self.kgrid.describe(),
                "potential": dict(self.V.descriptor)}

    def krein_coefficients(self, theta: Sequence[complex]) -> np.ndarray:
        """``c(k) = M^{-1}(|k|, theta) B gamma1 psi(., k)`` for every node, shape ``(n_k, 4)``."""
        im = interface_matrices(theta)
        M = np.einsum("ij,njk->nik", im.B, self.q) - im.A
        det = np.linalg.det(M)
        if not np.all(np.isfinite(det)) or np.min(np.abs(det)) < 1e-14:
            raise NumericalError(f"M is singular on the momentum window for theta={im.theta}")
        rhs = self.free_gamma1 @ im.B.T
        return np.linalg.solve(M[self.half_index], rhs[..., None])[..., 0]

    def segment_coefficients(self, theta: Sequence[complex]) -> tuple[np.ndarray, np.ndarray]:
        """Per node and segment, the factors of ``chi_R`` and ``chi_L`` in ``psi_theta``.

        Returns ``(P, Q)`` of shape ``(n_k, 3)`` with
        ``psi_theta(., k) = P[k, s] chi_R(., |k|) + Q[k, s] chi_L(., |k|)`` on segment ``s``.
        """
        n_k = self.kgrid.n_k
        P = np.zeros((n_k, 3), dtype=complex)
        Q = np.zeros((n_k, 3), dtype=complex)
        P[self.positive, :] = self.free_coeff[self.positive, None]
        Q[~self.positive, :] = self.free_coeff[~self.positive, None]
        if all(complex(t) == 0 for t in theta):
            return P, Q
        c = self.krein_coefficients(theta)
        h = self.half_index
        w = self.w[h]
        # traces at b+ (index 1) and a- (index 2): (value, derivative)
        pb, mb = self.tr_plus[h, 1], self.tr_minus[h, 1]
        pa, ma = self.tr_plus[h, 2], self.tr_minus[h, 2]
        src_b = (c[:, 0] * pb[:, 0] + c[:, 1] * pb[:, 1]) / w
        src_b_plus = (c[:, 0] * mb[:, 0] + c[:, 1] * mb[:, 1]) / w
        src_a = (c[:, 2] * pa[:, 0] + c[:, 3] * pa[:, 1]) / w
        src_a_plus = (c[:, 2] * ma[:, 0] + c[:, 3] * ma[:, 1]) / w
        # sections at b use chi_L left of b, chi_R right of b; at a likewise
        Q[:, 0] -= src_b + src_a
        Q[:, 1] -= src_b
        P[:, 1] -= src_a_plus
        P[:, 2] -= src_b_plus + src_a_plus
        return P, Q

    def kernel(self) -> np.ndarray:
        """``theta``-independent factor ``S[m, n]`` of the momentum-space wave operator.

        Off-shell: trapezoid principal value ``dk / (k_m^2 - k_n^2)`` with the
        singular nodes ``n = m`` and its mirror omitted, plus the central-difference
        node correction that makes the omission second-order accurate. The singular
        nodes themselves carry ``i pi / (2 |k_m|)``.
        """
        if self._kernel is None:
            self._kernel = _principal_value_kernel(self.kgrid)
        return self._kernel


def _principal_value_kernel(kgrid: SpectralGrid) -> np.ndarray:
    k = kgrid.nodes
    n = k.size
    half = n // 2
    step = (kgrid.k_max - kgrid.k_min) / (half - 1)
    tw = np.full(n, step)
    tw[[0, half - 1, half, n - 1]] = step / 2
    idx = np.arange(n)
    mirror = n - 1 - idx
    diff = k[:, None] ** 2 - k[None, :] ** 2
    diff[idx, idx] = 1.0
    diff[idx, mirror] = 1.0
    S = (tw[None, :] / diff).astype(complex)
    on_shell = 1j * np.pi / (2.0 * np.abs(k))
    S[idx, idx] = on_shell
    S[idx, mirror] = on_shell
    # omitted-node correction -step * d/dk [g / (k_m + k)] at k_m, and the mirror analogue
    inner = (idx % half != 0) & (idx % half != half - 1)
    m = idx[inner]
    mb = mirror[inner]
    S[m, m + 1] -= 1.0 / (2.0 * (k[m] + k[m + 1]))
    S[m, m - 1] += 1.0 / (2.0 * (k[m] + k[m - 1]))
    S[m, mb + 1] += 1.0 / (2.0 * (k[m] - k[mb + 1]))
    S[m, mb - 1] -= 1.0 / (2.0 * (k[m] - k[mb - 1]))
    return S


def _check_grid(phi: WaveFunction, data: SpectralData) -> None:
    if phi.grid is not data.grid:
        raise ConfigurationError("wave function and spectral data must share a grid")


def forward_transform(phi: WaveFunction, data: SpectralData) -> SpectralFunction:
    """``(F phi)(k)`` by composite Simpson quadrature on every segment."""
    _check_grid(phi, data)
    plus = sum(np.conj(c) @ (wx * v)
               for c, wx, v in zip(data.chi_plus, data._x_weights, phi.values))
    minus = sum(np.conj(c) @ (wx * v)
                for c, wx, v in zip(data.chi_minus, data._x_weights, phi.values))
    h = data.half_index
    overlap = np.where(data.positive, plus[h], minus[h])
    return SpectralFunction(data.kgrid, INV_SQRT_2PI * np.conj(data.free_coeff) * overlap)


def inverse_transform(f: SpectralFunction, data: SpectralData,
                      theta: Sequence[complex] = (0.0, 0.0)) -> WaveFunction:
    """``(F_theta^{-1} f)(x)``; ``theta = (0, 0)`` gives the inverse of :func:`forward_transform`."""
    if f.kgrid is not data.kgrid:
        raise ConfigurationError("spectral function and spectral data must share a window")
    P, Q = data.segment_coefficients(theta)
    amp = INV_SQRT_2PI * data.kgrid.weights * f.values
    vals = []
    for s in range(3):
        cp = np.zeros(data.n_half, dtype=complex)
        cm = np.zeros(data.n_half, dtype=complex)
        np.add.at(cp, data.half_index, amp * P[:, s])
        np.add.at(cm, data.half_index, amp * Q[:, s])
        vals.append(cp @ data.chi_plus[s] + cm @ data.chi_minus[s])
    return WaveFunction(data.grid, tuple(vals))


@dataclass(frozen=True, eq=False)
class WaveOperator:
    """Momentum-space realization ``F W_theta F^{-1}`` on the window.

    ``deviation`` is ``||W - I||`` in the weighted window norm; ``solve_residual``
    is the max-entry size of ``W W^{-1} - I``; ``neumann_gap`` is the weighted
    norm of the difference between the LU inverse and ``sum_{n <= 8} (I - W)^n``,
    recorded only when every ``|theta_i| <= 0.01``.
    """

    theta: tuple[complex, complex]
    kgrid: SpectralGrid
    matrix: np.ndarray = field(repr=False)
    inverse: np.ndarray = field(repr=False)
    deviation: float
    solve_residual: float
    neumann_gap: float | None

    def propagator(self, t: float) -> np.ndarray:
        """``W E_t W^{-1}`` with ``E_t = diag(exp(-i t k^2))``."""
        phase = np.exp(-1j * float(t) * self.kgrid.nodes ** 2)
        return (self.matrix * phase[None, :]) @ self.inverse


def _check_theta(theta: Sequence[complex]) -> tuple[complex, complex]:
    if len(theta) != 2:
        raise ConfigurationError("theta must be a pair")
    t1, t2 = (complex(v) for v in theta)
    if max(abs(t1), abs(t2)) > MAX_THETA:
        raise ConfigurationError(
            f"|theta_i| must not exceed {MAX_THETA} for the wave-operator expansion, got {theta}"
        )
    return t1, t2


def wave_operator_matrix(theta: Sequence[complex], data: SpectralData) -> np.ndarray:
    """``W[m, n] = delta_mn - (2 pi)^{-1} conj(gamma1 psi(k_m)) . c(k_n) S[m, n]``."""
    theta = _check_theta(theta)
    n = data.kgrid.n_k
    if theta == (0j, 0j):
        return np.eye(n, dtype=complex)
    c = data.krein_coefficients(theta)
    overlap = np.conj(data.free_gamma1) @ c.T
    return np.eye(n, dtype=complex) - overlap * data.kernel() / (2.0 * np.pi)


def build_wave_operator(theta: Sequence[complex], data: SpectralData) -> WaveOperator:
    """Assemble ``W``, invert it by LU and record the diagnostics."""
    theta = _check_theta(theta)
    W = wave_operator_matrix(theta, data)
    n = W.shape[0]
    eye = np.eye(n, dtype=complex)
    try:
        lu = scipy.linalg.lu_factor(W, check_finite=True)
    except (ValueError, scipy.linalg.LinAlgError) as exc:
        raise NumericalError(f"LU factorization of W failed for theta={theta}") from exc
    inv = scipy.linalg.lu_solve(lu, eye)
    solve_res = float(np.max(np.abs(W @ inv - eye)))
    if not np.isfinite(solve_res) or solve_res > SOLVE_TOL:
        raise NumericalError(
            f"W W^-1 - I = {solve_res:.2e} exceeds {SOLVE_TOL:g}; theta outside the similarity regime"
        )
    weights = data.kgrid.weights
    neumann_gap = None
    if max(abs(t) for t in theta) <= NEUMANN_RADIUS:
        gap = eye - W
        neumann = eye.copy()
        term = eye.copy()
        for _ in range(NEUMANN_TERMS):
            term = term @ gap
            neumann += term
        neumann_gap = weighted_op_norm(neumann - inv, weights)
    return WaveOperator(
        theta=theta,
        kgrid=data.kgrid,
        matrix=W,
        inverse=inv,
        deviation=weighted_op_norm(W - eye, weights),
        solve_residual=solve_res,
        neumann_gap=neumann_gap,
    )


def _phase(kgrid: SpectralGrid, t: float) -> np.ndarray:
    return np.exp(-1j * float(t) * kgrid.nodes ** 2)


def propagate_free(phi: WaveFunction, t: float, data: SpectralData) -> WaveFunction:
    """``U_0(t) phi = F^{-1} e^{-i t k^2} F phi``."""
    f = forward_transform(phi, data)
    return inverse_transform(SpectralFunction(data.kgrid, _phase(data.kgrid, t) * f.values), data)


def propagate_theta(phi: WaveFunction, t: float, op: WaveOperator,
                    data: SpectralData) -> WaveFunction:
    """``U_theta(t) phi = W U_0(t) W^{-1} phi = F_theta^{-1} e^{-i t k^2} W^{-1} F phi``."""
    if op.kgrid is not data.kgrid:
        raise ConfigurationError("wave operator and spectral data must share a window")
    f = forward_transform(phi, data)
    g = _phase(data.kgrid, t) * (op.inverse @ f.values)
    return inverse_transform(SpectralFunction(data.kgrid, g), data, op.theta)


def remainder_matrix(t: float, op: WaveOperator) -> np.ndarray:
    """``R(t) = W E_t W^{-1} - E_t`` on the window."""
    return op.propagator(t) - np.diag(_phase(op.kgrid, t))


def remainder_norm(t: float, op: WaveOperator) -> float:
    """Weighted operator norm of :func:`remainder_matrix`."""
    return weighted_op_norm(remainder_matrix(t, op), op.kgrid.weights)


def phase_resolution(kgrid: SpectralGrid, k_band: float, t: float) -> float:
    """Phase advance of ``exp(-i t k^2)`` between neighbouring nodes at ``|k| = k_band``.

    Principal-value sums of oscillating integrands lose accuracy once this
    exceeds a fraction of a radian.
    """
    step = (kgrid.k_max - kgrid.k_min) / (kgrid.n_k // 2 - 1)
    return 2.0 * abs(k_band) * abs(float(t)) * step


def wave_limit_deviation(f: SpectralFunction, op: WaveOperator, t: float) -> float:
    """``|| e^{i t Q_theta} e^{-i t Q_0} phi - W phi ||`` for ``t <= 0``, with ``f = F phi``.

    ``e^{i t Q_theta}`` is ``U_theta(-t) = W E_{-t} W^{-1}``.
    """
    if t > 0:
        raise ConfigurationError("the incoming wave-operator limit uses t <= 0")
    if f.kgrid is not op.kgrid:
        raise ConfigurationError("spectral function and wave operator must share a window")
    moved = _phase(op.kgrid, t) * f.values
    back = op.propagator(-t) @ moved
    diff = back - op.matrix @ f.values
    return float(np.sqrt(np.sum(op.kgrid.weights * np.abs(diff) ** 2)))


def intertwining_residual(phi: WaveFunction, theta: Sequence[complex],
                          data: SpectralData) -> float:
    """``|| Q_theta (W phi) - W (Q_0 phi) || / ||phi||``.

    ``Q_0 phi`` is applied spectrally (``k^2`` times ``F phi``); ``Q_theta`` acts on
    ``W phi`` through fourth-order stencils plus ``V`` on nodes at least two steps
    away from every segment end.
    """
    _check_grid(phi, data)
    theta = _check_theta(theta)
    f = forward_transform(phi, data)
    u = inverse_transform(f, data, theta)
    v = inverse_transform(SpectralFunction(data.kgrid, data.kgrid.nodes ** 2 * f.values),
                          data, theta)
    total = 0.0
    for uu, vv, h, pot in zip(u.values, v.values, data.grid.spacing, data.V.values):
        r = -second_derivative_interior(uu, h) + pot[2:-2] * uu[2:-2] - vv[2:-2]
        total += h * float(np.sum(np.abs(r) ** 2))
    norm = phi.norm()
    if norm == 0.0:
        raise ConfigurationError("intertwining residual needs a nonzero wave function")
    return float(np.sqrt(total)) / norm
