"""Boundary maps, Green kernels, the Weyl matrix and the interface (Krein) machinery.

Component ordering of the boundary maps, with one-sided limits at ``a`` and ``b``::

    gamma0 u = (u'(b-) - u'(b+), u(b+) - u(b-), u'(a-) - u'(a+), u(a+) - u(a-))
    gamma1 u = 1/2 (u(b+) + u(b-), u'(b+) + u'(b-), u(a+) + u(a-), u'(a+) + u'(a-))

The interface conditions of the perturbed operator read ``A gamma0 u = B gamma1 u``,
equivalently ``u(b-) = e^{-t1/2} u(b+)``, ``u'(b-) = e^{-t2/2} u'(b+)``,
``u(a+) = e^{-t1/2} u(a-)`` and ``u'(a+) = e^{-t2/2} u'(a-)``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .jost import JostSolution, jost_pair, jost_wronskian
from .numerics import (
    ConfigurationError,
    NumericalError,
    SpatialGrid,
    WaveFunction,
    tail_integral_weights,
)
from .potential import Potential

__all__ = [
    "BoundaryData",
    "InterfaceMatrices",
    "DefectBasis",
    "SpectralDeterminant",
    "zeta_from_z",
    "boundary_maps",
    "gamma0_from_traces",
    "gamma1_from_traces",
    "interface_residuals",
    "green_kernels",
    "apply_resolvent_free",
    "weyl_matrix",
    "interface_matrices",
    "m_matrix",
    "perturbed_resolvent_kernel",
    "perturbed_resolvent_column",
    "krein_coefficients",
    "main_term_inverse",
    "matching_determinant",
    "DeterminantField",
    "determinant_field",
    "spectral_scan",
    "eigenvalue_track",
]

POINTS = ("b-", "b+", "a-", "a+")
W_THRESHOLD = 1e-12


@dataclass(frozen=True)
class BoundaryData:
    gamma0: np.ndarray
    gamma1: np.ndarray


@dataclass(frozen=True, eq=False)
class InterfaceMatrices:
    theta: tuple[complex, complex]
    A: np.ndarray
    B: np.ndarray
    alpha: dict[str, complex]
    beta: dict[str, complex]


@dataclass(frozen=True, eq=False)
class DefectBasis:
    """Green-kernel sections spanning the defect space at one spectral parameter.

    ``functions`` holds ``G(., b)``, ``H(., b)``, ``G(., a)``, ``H(., a)`` with
    ``H = d/dy G(x, y)``; this ordering gives ``gamma0 g_i = e_i``.
    ``traces[i, p]`` is ``(value, derivative)`` of function ``i`` at point
    ``POINTS[p]``, computed from the Jost data rather than from stencils.
    """

    zeta: complex
    z: complex
    w: complex
    functions: tuple[WaveFunction, WaveFunction, WaveFunction, WaveFunction]
    traces: np.ndarray
    pair: tuple[JostSolution, JostSolution]

    def gamma0(self) -> np.ndarray:
        return np.column_stack([gamma0_from_traces(t) for t in self.traces])

    def gamma1(self) -> np.ndarray:
        return np.column_stack([gamma1_from_traces(t) for t in self.traces])

    def jump_report(self) -> dict[str, float]:
        """Residuals of the jump problems solved by ``G`` and ``H`` at ``y = a, b``."""
        t = self.traces
        out = {}
        for label, (ig, ih, lo, hi) in {"b": (0, 1, 0, 1), "a": (2, 3, 2, 3)}.items():
            out[f"G_value_jump_{label}"] = abs(t[ig, hi, 0] - t[ig, lo, 0])
            out[f"G_derivative_jump_{label}"] = abs(t[ig, hi, 1] - t[ig, lo, 1] + 1.0)
            out[f"H_value_jump_{label}"] = abs(t[ih, hi, 0] - t[ih, lo, 0] - 1.0)
            out[f"H_derivative_jump_{label}"] = abs(t[ih, hi, 1] - t[ih, lo, 1])
        return {k: float(v) for k, v in out.items()}


@dataclass(frozen=True, eq=False)
class SpectralDeterminant:
    zeta: complex
    z: complex
    theta: tuple[complex, complex]
    M: np.ndarray
    det_value: complex


def zeta_from_z(z: complex) -> complex:
    """Square root of ``z`` in the closed upper half-plane."""
    return 1j * np.sqrt(-complex(z))


def _traces_of(u: WaveFunction) -> np.ndarray:
    v = u.values
    d = u.derivative_tables()
    return np.array([
        (v[1][-1], d[1][-1]),
        (v[2][0], d[2][0]),
        (v[0][-1], d[0][-1]),
        (v[1][0], d[1][0]),
    ], dtype=complex)


def gamma0_from_traces(t: np.ndarray) -> np.ndarray:
    """``gamma0`` from ``(value, derivative)`` pairs ordered as ``POINTS``."""
    (ubm, dbm), (ubp, dbp), (uam, dam), (uap, dap) = t
    return np.array([dbm - dbp, ubp - ubm, dam - dap, uap - uam])


def gamma1_from_traces(t: np.ndarray) -> np.ndarray:
    """``gamma1`` from ``(value, derivative)`` pairs ordered as ``POINTS``."""
    (ubm, dbm), (ubp, dbp), (uam, dam), (uap, dap) = t
    return 0.5 * np.array([ubp + ubm, dbp + dbm, uap + uam, dap + dam])


def boundary_maps(u: WaveFunction) -> BoundaryData:
    """``(gamma0 u, gamma1 u)``; derivative traces use the stored derivative or stencils."""
    t = _traces_of(u)
    return BoundaryData(gamma0_from_traces(t), gamma1_from_traces(t))


def interface_residuals(u: WaveFunction, theta: Sequence[complex]) -> dict[str, float]:
    """Per-condition residuals, plus the literal misprinted left derivative condition."""
    t1, t2 = (complex(v) for v in theta)
    (ubm, dbm), (ubp, dbp), (uam, dam), (uap, dap) = _traces_of(u)
    e1, e2 = np.exp(-t1 / 2), np.exp(-t2 / 2)
    return {
        "value_b": float(abs(e1 * ubp - ubm)),
        "derivative_b": float(abs(e2 * dbp - dbm)),
        "value_a": float(abs(e1 * uam - uap)),
        "derivative_a": float(abs(e2 * dam - dap)),
        "literal_derivative_a": float(abs(e2 * dam - uap)),
    }


def _pair_and_w(zeta: complex, V: Potential,
                pair: tuple[JostSolution, JostSolution] | None):
    plus, minus = pair if pair is not None else jost_pair(zeta, V)
    w = jost_wronskian(zeta, V, (plus, minus))
    if abs(w) < W_THRESHOLD:
        raise NumericalError(f"Jost function nearly vanishes (|w| = {abs(w):.2e}) at zeta={zeta}")
    return plus, minus, w


def _kernel_traces(plus: JostSolution, minus: JostSolution, w: complex) -> np.ndarray:
    tp, tm = plus.traces(), minus.traces()
    P = {p: tp[p] for p in POINTS}
    Mm = {p: tm[p] for p in POINTS}
    pb, dpb = tp["b+"]
    mb, dmb = tm["b+"]
    pa, dpa = tp["a-"]
    ma, dma = tm["a-"]
    out = np.zeros((4, 4, 2), dtype=complex)
    # source point b: points a-, a+, b- lie below it, b+ above
    # source point a: a- lies below, a+, b-, b+ above
    below = {"b": ("b-", "a-", "a+"), "a": ("a-",)}
    sources = {"b": (mb, dmb, pb, dpb), "a": (ma, dma, pa, dpa)}
    for col, (src, deriv) in enumerate((("b", 0), ("b", 1), ("a", 0), ("a", 1))):
        m_y, dm_y, p_y, dp_y = sources[src]
        for ip, p in enumerate(POINTS):
            if p in below[src]:
                coeff = dp_y if deriv else p_y
                val, der = Mm[p]
            else:
                coeff = dm_y if deriv else m_y
                val, der = P[p]
            out[col, ip] = (val * coeff / w, der * coeff / w)
    return out


def _column_tables(plus: JostSolution, minus: JostSolution, w: complex, src: str,
                   deriv: bool) -> tuple[tuple, tuple]:
    """Grid tables of ``G(., y)`` (or ``H(., y)`` when ``deriv``) for ``y`` in ``{a, b}``."""
    tp, tm = plus.traces(), minus.traces()
    if src == "b":
        m_y, dm_y = tm["b+"]
        p_y, dp_y = tp["b+"]
        use_plus = (False, False, True)
    else:
        m_y, dm_y = tm["a-"]
        p_y, dp_y = tp["a-"]
        use_plus = (False, True, True)
    vals, ders = [], []
    for seg, up in enumerate(use_plus):
        if up:
            c = (dm_y if deriv else m_y) / w
            vals.append(plus.chi[seg] * c)
            ders.append(plus.chi_prime[seg] * c)
        else:
            c = (dp_y if deriv else p_y) / w
            vals.append(minus.chi[seg] * c)
            ders.append(minus.chi_prime[seg] * c)
    return tuple(vals), tuple(ders)


def green_kernels(zeta: complex, V: Potential,
                  pair: tuple[JostSolution, JostSolution] | None = None) -> DefectBasis:
    """Defect basis ``{G(., b), H(., b), G(., a), H(., a)}`` built from Jost solutions.

    ``G(x, y) = chi_R(x) chi_L(y) / w`` for ``x >= y`` and ``chi_L(x) chi_R(y) / w``
    otherwise; ``H = d/dy G`` has a unit value jump and a continuous derivative.
    """
    zeta = complex(zeta)
    plus, minus, w = _pair_and_w(zeta, V, pair)
    funcs = []
    for src, deriv in (("b", False), ("b", True), ("a", False), ("a", True)):
        vals, ders = _column_tables(plus, minus, w, src, deriv)
        funcs.append(WaveFunction(V.grid, vals, ders))
    traces = _kernel_traces(plus, minus, w)
    return DefectBasis(zeta, zeta * zeta, w, tuple(funcs), traces, (plus, minus))


def _cumulative_segments(grid: SpatialGrid, tables: Sequence[np.ndarray]):
    """Per-node ``(int_{x_min}^x f, int_x^{x_max} f)`` with fourth-order accuracy."""
    heads, tails, totals = [], [], []
    for f, h in zip(tables, grid.spacing):
        tw = tail_integral_weights(f.size, h)
        tail = tw @ f
        total = tail[0]
        tails.append(tail)
        heads.append(total - tail)
        totals.append(total)
    before = np.concatenate([[0.0], np.cumsum(totals)[:-1]])
    after = np.concatenate([np.cumsum(totals[::-1])[::-1][1:], [0.0]])
    return ([hd + b for hd, b in zip(heads, before)],
            [tl + a for tl, a in zip(tails, after)])


def apply_resolvent_free(f: WaveFunction, z: complex, V: Potential,
                         pair: tuple[JostSolution, JostSolution] | None = None) -> WaveFunction:
    """``u = (Q_0 - z)^{-1} f`` through the factorised Green kernel.

    ``u(x) = [chi_R(x) int_{-inf}^x chi_L f + chi_L(x) int_x^{inf} chi_R f] / w``,
    with both running integrals computed segment by segment.
    """
    if f.grid is not V.grid:
        raise ConfigurationError("wave function and potential must share a grid")
    zeta = zeta_from_z(z)
    plus, minus, w = _pair_and_w(zeta, V, pair)
    head, _ = _cumulative_segments(V.grid, [m * fv for m, fv in zip(minus.chi, f.values)])
    _, tail = _cumulative_segments(V.grid, [p * fv for p, fv in zip(plus.chi, f.values)])
    vals = tuple((p * hd + m * tl) / w for p, m, hd, tl in zip(plus.chi, minus.chi, head, tail))
    ders = tuple((dp * hd + dm * tl) / w
                 for dp, dm, hd, tl in zip(plus.chi_prime, minus.chi_prime, head, tail))
    return WaveFunction(V.grid, vals, ders)


def weyl_matrix(zeta: complex, V: Potential,
                pair: tuple[JostSolution, JostSolution] | None = None,
                basis: DefectBasis | None = None) -> np.ndarray:
    """``q = gamma1`` applied column-wise to the defect basis.

    Entries are one-sided Jost traces; the trace identity
    ``d/dx G(y+-, y) = H(y-+, y)`` is checked at both interface points.
    """
    basis = basis if basis is not None else green_kernels(zeta, V, pair)
    t = basis.traces
    # d/dx G(b+, b) vs H(b-, b); d/dx G(b-, b) vs H(b+, b); likewise at a
    checks = [
        t[0, 1, 1] - t[1, 0, 0], t[0, 0, 1] - t[1, 1, 0],
        t[2, 3, 1] - t[3, 2, 0], t[2, 2, 1] - t[3, 3, 0],
    ]
    scale = 1.0 + np.max(np.abs(t))
    if max(abs(c) for c in checks) > 1e-6 * scale:
        raise NumericalError("Green-kernel trace identity violated; traces are inaccurate")
    return basis.gamma1()


def interface_matrices(theta: Sequence[complex]) -> InterfaceMatrices:
    """Block-diagonal ``A``, ``B`` encoding the interface conditions as ``A gamma0 = B gamma1``."""
    t1, t2 = (complex(v) for v in theta)

    def alpha(t: complex) -> complex:
        return 1.0 + np.exp(t / 2)

    def beta(t: complex) -> complex:
        return 1.0 - np.exp(t / 2)

    def a_block(s1: complex, s2: complex) -> np.ndarray:
        return np.diag([alpha(s2), alpha(s1)])

    def b_block(s1: complex, s2: complex) -> np.ndarray:
        return 2.0 * np.array([[0.0, beta(s2)], [-beta(s1), 0.0]])

    A = np.zeros((4, 4), dtype=complex)
    B = np.zeros((4, 4), dtype=complex)
    A[:2, :2], A[2:, 2:] = a_block(t1, t2), a_block(-t1, -t2)
    B[:2, :2], B[2:, 2:] = b_block(t1, t2), b_block(-t1, -t2)
    al = {"theta1": alpha(t1), "theta2": alpha(t2), "-theta1": alpha(-t1), "-theta2": alpha(-t2)}
    be = {"theta1": beta(t1), "theta2": beta(t2), "-theta1": beta(-t1), "-theta2": beta(-t2)}
    return InterfaceMatrices((t1, t2), A, B, al, be)


def m_matrix(zeta: complex, theta: Sequence[complex], V: Potential | None = None,
             q: np.ndarray | None = None) -> SpectralDeterminant:
    """``M = B q - A`` and its determinant."""
    zeta = complex(zeta)
    if q is None:
        if V is None:
            raise ConfigurationError("m_matrix needs either V or a precomputed q")
        q = weyl_matrix(zeta, V)
    im = interface_matrices(theta)
    M = im.B @ q - im.A
    return SpectralDeterminant(zeta, zeta * zeta, im.theta, M, complex(np.linalg.det(M)))


def main_term_inverse(theta: Sequence[complex]) -> np.ndarray:
    """Leading diagonal part of ``M^{-1}`` for small ``theta``."""
    im = interface_matrices(theta)
    al = im.alpha
    return np.diag([-1 / al["theta2"], -1 / al["theta1"], -1 / al["-theta2"], -1 / al["-theta1"]])


def krein_coefficients(det: SpectralDeterminant, B: np.ndarray) -> np.ndarray:
    if not np.isfinite(det.det_value) or abs(det.det_value) < 1e-14:
        raise NumericalError(f"M is singular at z={det.z}, theta={det.theta}")
    return np.linalg.solve(det.M, B)


def perturbed_resolvent_kernel(x, y, z: complex, theta: Sequence[complex],
                               V: Potential) -> np.ndarray:
    """``G_theta(x, y) = G(x, y) - sum_ij [M^{-1} B]_ij g_j(y) g_i(x)`` at arbitrary points.

    Points equal to ``a`` or ``b`` are evaluated on the support side.
    """
    zeta = zeta_from_z(z)
    plus, minus, w = _pair_and_w(zeta, V, None)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    xx, yy = np.broadcast_arrays(x, y)
    px, _ = plus.evaluate(xx.ravel())
    mx, _ = minus.evaluate(xx.ravel())
    py, dpy = plus.evaluate(yy.ravel())
    my, dmy = minus.evaluate(yy.ravel())
    upper = xx.ravel() >= yy.ravel()
    g0 = np.where(upper, px * my, mx * py) / w
    basis_x = _basis_at(xx.ravel(), plus, minus, w)
    basis_y = _basis_at(yy.ravel(), plus, minus, w)
    det = m_matrix(zeta, theta, q=weyl_matrix(zeta, V, (plus, minus)))
    C = krein_coefficients(det, interface_matrices(theta).B)
    corr = np.einsum("in,ij,jn->n", basis_x, C, basis_y)
    return (g0 - corr).reshape(xx.shape)


def _basis_at(x: np.ndarray, plus: JostSolution, minus: JostSolution, w: complex) -> np.ndarray:
    """Values of the four basis functions at arbitrary points (support side at ``a``, ``b``)."""
    g = plus.grid
    px, _ = plus.evaluate(x)
    mx, _ = minus.evaluate(x)
    tp, tm = plus.traces(), minus.traces()
    pb, dpb = tp["b+"]
    mb, dmb = tm["b+"]
    pa, dpa = tp["a-"]
    ma, dma = tm["a-"]
    above_b = x > g.b
    above_a = x >= g.a
    return np.array([
        np.where(above_b, px * mb, mx * pb) / w,
        np.where(above_b, px * dmb, mx * dpb) / w,
        np.where(above_a, px * ma, mx * pa) / w,
        np.where(above_a, px * dma, mx * dpa) / w,
    ])


def perturbed_resolvent_column(y: float, z: complex, theta: Sequence[complex],
                               V: Potential) -> WaveFunction:
    """Grid tables of ``x -> G_theta(x, y)`` and its ``x``-derivative for ``y`` off ``{a, b}``."""
    zeta = zeta_from_z(z)
    plus, minus, w = _pair_and_w(zeta, V, None)
    g = V.grid
    if np.isclose(y, g.a) or np.isclose(y, g.b):
        raise ConfigurationError("source point must differ from the interface points")
    basis = green_kernels(zeta, V, (plus, minus))
    py, _ = plus.evaluate(y)
    my, _ = minus.evaluate(y)
    by = _basis_at(np.array([float(y)]), plus, minus, w)[:, 0]
    q = weyl_matrix(zeta, V, basis=basis)
    det = m_matrix(zeta, theta, q=q)
    coeff = krein_coefficients(det, interface_matrices(theta).B) @ by
    vals, ders = [], []
    for seg, x in enumerate(g.segments):
        upper = x >= y
        v = np.where(upper, plus.chi[seg] * my[0], minus.chi[seg] * py[0]) / w
        d = np.where(upper, plus.chi_prime[seg] * my[0], minus.chi_prime[seg] * py[0]) / w
        for i, fn in enumerate(basis.functions):
            v = v - coeff[i] * fn.values[seg]
            d = d - coeff[i] * fn.derivative[seg]
        vals.append(v)
        ders.append(d)
    return WaveFunction(g, tuple(vals), tuple(ders))


@dataclass(frozen=True, eq=False)
class DeterminantField:
    """Jost function and Weyl matrix sampled on a rectangle of the ``z`` plane."""

    z: np.ndarray
    w: np.ndarray
    q: np.ndarray

    def regularized(self, theta: Sequence[complex]) -> np.ndarray:
        im = interface_matrices(theta)
        M = np.einsum("ij,...jk->...ik", im.B, self.q) - im.A
        return self.w * np.linalg.det(M)


def _w_and_q(z: complex, V: Potential) -> tuple[complex, np.ndarray]:
    zeta = zeta_from_z(z)
    plus, minus = jost_pair(zeta, V)
    w = jost_wronskian(zeta, V, (plus, minus))
    if abs(w) < W_THRESHOLD:
        return w, np.full((4, 4), np.nan, dtype=complex)
    basis = green_kernels(zeta, V, (plus, minus))
    return w, basis.gamma1()


def determinant_field(region: Sequence[float], resolution: Sequence[int],
                      V: Potential) -> DeterminantField:
    """Sample ``w`` and ``q`` on a ``(n_re, n_im)`` node lattice over ``[re0, re1] x [im0, im1]``."""
    re0, re1, im0, im1 = (float(v) for v in region)
    n_re, n_im = (int(v) for v in resolution)
    if n_re < 2 or n_im < 2 or not (re0 < re1 and im0 < im1):
        raise ConfigurationError("region must be a proper rectangle with at least 2x2 nodes")
    zr = np.linspace(re0, re1, n_re)
    zi = np.linspace(im0, im1, n_im)
    Z = zr[:, None] + 1j * zi[None, :]
    if np.any((Z.real >= 0) & (Z.imag == 0)):
        raise ConfigurationError("scan lattice touches the positive real axis")
    w = np.empty(Z.shape, dtype=complex)
    q = np.empty(Z.shape + (4, 4), dtype=complex)
    for idx in np.ndindex(Z.shape):
        w[idx], q[idx] = _w_and_q(Z[idx], V)
    return DeterminantField(Z, w, q)


def _regularized_det(z: complex, theta, V: Potential) -> complex:
    w, q = _w_and_q(z, V)
    if not np.all(np.isfinite(q)):
        return 0.0j
    im = interface_matrices(theta)
    return complex(w * np.linalg.det(im.B @ q - im.A))


def _secant(fn, x0: complex, x1: complex, tol: float, max_iter: int) -> complex:
    f0, f1 = fn(x0), fn(x1)
    for _ in range(max_iter):
        if f1 == 0:
            return x1
        denom = f1 - f0
        if denom == 0:
            raise NumericalError("secant iteration broke down (flat residual)")
        x2 = x1 - f1 * (x1 - x0) / denom
        if abs(x2 - x1) <= tol * (1.0 + abs(x2)):
            return x2
        x0, f0 = x1, f1
        x1, f1 = x2, fn(x2)
    raise NumericalError("secant iteration did not converge")


def spectral_scan(region: Sequence[float], resolution: Sequence[int],
                  theta: Sequence[complex], V: Potential, threshold: float = 1e-3,
                  field: DeterminantField | None = None) -> list[complex]:
    """Candidate eigenvalues in a rectangle of the ``z`` plane.

    The scanned function is ``w(zeta) det M(z, theta)``: it vanishes where
    ``det M`` does and also at zeros of ``w``, which ``det M`` alone cannot see
    when ``theta = 0``.  A lattice cell is a candidate when the argument of
    this function winds around the cell boundary; each candidate is refined by
    secant iteration and kept when the refined value falls below
    ``threshold`` relative to the lattice scale.
    """
    fld = field if field is not None else determinant_field(region, resolution, V)
    D = fld.regularized(theta)
    scale = float(np.nanmedian(np.abs(D)))
    Z = fld.z
    found: list[complex] = []
    n_re, n_im = Z.shape
    for i in range(n_re - 1):
        for j in range(n_im - 1):
            loop = [D[i, j], D[i + 1, j], D[i + 1, j + 1], D[i, j + 1], D[i, j]]
            if any(not np.isfinite(v) or v == 0 for v in loop):
                winding = 1
            else:
                winding = int(round(sum(np.angle(loop[m + 1] / loop[m]) for m in range(4)) / (2 * np.pi)))
            if winding == 0:
                continue
            center = 0.25 * (Z[i, j] + Z[i + 1, j] + Z[i, j + 1] + Z[i + 1, j + 1])
            step = 0.1 * abs(Z[i + 1, j] - Z[i, j])
            try:
                root = _secant(lambda zz: _regularized_det(zz, theta, V),
                               center, center + step, 1e-12, 60)
            except NumericalError:
                continue
            inside = (Z[i, j].real - step <= root.real <= Z[i + 1, j].real + step
                      and Z[i, j].imag - step <= root.imag <= Z[i, j + 1].imag + step)
            if inside and abs(_regularized_det(root, theta, V)) < threshold * max(scale, 1.0):
                if all(abs(root - r) > 1e-8 for r in found):
                    found.append(root)
    return found


def matching_determinant(E: complex, theta: Sequence[complex], V: Potential) -> complex:
    """Interior matching Wronskian for decaying exterior data under the interface scalings."""
    t1, t2 = (complex(v) for v in theta)
    zeta = zeta_from_z(E)
    plus, minus = jost_pair(zeta, V)
    tp, tm = plus.traces(), minus.traces()
    ma, dma = tm["a-"]
    # interior data at a+ after the scaling u(a+) = e^{-t1/2} u(a-), u'(a+) = e^{-t2/2} u'(a-)
    rhs = np.array([np.exp(-t1 / 2) * ma, np.exp(-t2 / 2) * dma])
    basis_a = np.array([[tm["a+"][0], tp["a+"][0]], [tm["a+"][1], tp["a+"][1]]])
    alpha, beta = np.linalg.solve(basis_a, rhs)
    ub = alpha * tm["b-"][0] + beta * tp["b-"][0]
    dub = alpha * tm["b-"][1] + beta * tp["b-"][1]
    pb, dpb = tp["b+"]
    return complex(ub * np.exp(-t2 / 2) * dpb - dub * np.exp(-t1 / 2) * pb)


def eigenvalue_track(E0: float, theta: Sequence[complex], V: Potential, tol: float = 1e-13,
                     radius: float = 1.0, max_iter: int = 60) -> complex:
    """Eigenvalue of the perturbed operator continued from the bound state ``E0``."""
    E0 = complex(E0)
    if E0.real >= 0 and E0.imag == 0:
        raise ConfigurationError("E0 must be a negative bound-state energy")
    E = _secant(lambda e: matching_determinant(e, theta, V), E0, E0 + 1e-4 * (1 + abs(E0)),
                tol, max_iter)
    if abs(E - E0) > radius:
        raise NumericalError(f"no eigenvalue within {radius} of {E0} (secant reached {E})")
    return E
