"""Grids, quadrature, finite-difference stencils and operator-norm estimation."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import simpson
from scipy.sparse.linalg import ArpackNoConvergence, svds

__all__ = [
    "ConfigurationError",
    "NumericalError",
    "SpatialGrid",
    "SpectralGrid",
    "WaveFunction",
    "make_grid",
    "make_kgrid",
    "quadrature",
    "tail_integral_weights",
    "simpson_weights",
    "first_derivative",
    "second_derivative_interior",
    "op_norm_estimate",
    "weighted_op_norm",
]

SEGMENT_NAMES = ("left", "support", "right")
DENSE_SVD_LIMIT = 64


class ConfigurationError(ValueError):
    """Invalid user input: grid ordering, node counts, malformed records."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to meet its accuracy contract."""


@dataclass(frozen=True, eq=False)
class SpatialGrid:
    """Three uniform segments ``[x_min, a]``, ``[a, b]``, ``[b, x_max]``.

    Interface nodes are stored twice, once per adjacent segment, so that
    one-sided limits at ``a`` and ``b`` are plain node reads.
    """

    x_min: float
    a: float
    b: float
    x_max: float
    n_per_segment: tuple[int, int, int]
    segments: tuple[np.ndarray, np.ndarray, np.ndarray] = field(init=False, repr=False)
    spacing: tuple[float, float, float] = field(init=False)

    def __post_init__(self) -> None:
        bounds = ((self.x_min, self.a), (self.a, self.b), (self.b, self.x_max))
        segs = tuple(np.linspace(lo, hi, n) for (lo, hi), n in zip(bounds, self.n_per_segment))
        for s in segs:
            s.setflags(write=False)
        object.__setattr__(self, "segments", segs)
        object.__setattr__(
            self, "spacing", tuple(float(s[1] - s[0]) for s in segs)
        )

    @property
    def size(self) -> int:
        return int(sum(self.n_per_segment))

    @property
    def nodes(self) -> np.ndarray:
        return np.concatenate(self.segments)

    def split(self, flat: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Cut a concatenated table back into its three segment tables."""
        flat = np.asarray(flat)
        if flat.shape[0] != self.size:
            raise ConfigurationError(
                f"table of length {flat.shape[0]} does not match grid size {self.size}"
            )
        n0, n1, _ = self.n_per_segment
        return flat[:n0], flat[n0:n0 + n1], flat[n0 + n1:]

    def refined(self) -> "SpatialGrid":
        """Same extent with every spacing halved."""
        return make_grid(self.x_min, self.a, self.b, self.x_max,
                         tuple(2 * n - 1 for n in self.n_per_segment))

    def describe(self) -> dict:
        return {
            "x_min": self.x_min, "a": self.a, "b": self.b, "x_max": self.x_max,
            "counts": list(self.n_per_segment),
        }


def make_grid(x_min: float, a: float, b: float, x_max: float,
              n_per_segment: Sequence[int]) -> SpatialGrid:
    """Validated constructor for :class:`SpatialGrid`."""
    vals = [float(v) for v in (x_min, a, b, x_max)]
    if not all(np.isfinite(vals)):
        raise ConfigurationError("grid bounds must be finite")
    if not (vals[0] < vals[1] < vals[2] < vals[3]):
        raise ConfigurationError(
            f"grid bounds must satisfy x_min < a < b < x_max, got {vals}"
        )
    counts = tuple(int(n) for n in n_per_segment)
    if len(counts) != 3:
        raise ConfigurationError("exactly three segment counts are required")
    for name, n in zip(SEGMENT_NAMES, counts):
        if n < 5 or n % 2 == 0:
            # five nodes is the minimum for the one-sided fourth-order stencils
            raise ConfigurationError(
                f"segment '{name}' needs an odd node count >= 5, got {n}"
            )
    return SpatialGrid(vals[0], vals[1], vals[2], vals[3], counts)


@dataclass(frozen=True, eq=False)
class SpectralGrid:
    """Symmetric momentum window ``[-k_max, -k_min] U [k_min, k_max]``.

    ``weights`` are quadrature weights for integrals over the whole window.
    Nodes are ordered increasingly, so node ``i`` mirrors node ``n_k - 1 - i``.
    """

    k_min: float
    k_max: float
    n_k: int
    nodes: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        half = np.linspace(self.k_min, self.k_max, self.n_k // 2)
        w_half = simpson(np.eye(half.size), x=half, axis=0)
        nodes = np.concatenate([-half[::-1], half])
        weights = np.concatenate([w_half[::-1], w_half])
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    def mirror_index(self) -> np.ndarray:
        return np.arange(self.n_k)[::-1]

    def describe(self) -> dict:
        return {"k_min": self.k_min, "k_max": self.k_max, "n_k": self.n_k}


def make_kgrid(k_min: float = 0.05, k_max: float = 8.0, n_k: int = 1024) -> SpectralGrid:
    """Validated constructor for :class:`SpectralGrid`; ``k = 0`` is never a node."""
    if not (0.0 < k_min < k_max) or not np.isfinite(k_max):
        raise ConfigurationError(f"need 0 < k_min < k_max, got {k_min}, {k_max}")
    if n_k < 8 or n_k % 2:
        raise ConfigurationError(f"n_k must be even and >= 8, got {n_k}")
    return SpectralGrid(float(k_min), float(k_max), int(n_k))


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex samples on a :class:`SpatialGrid`, one table per segment.

    ``derivative`` is optional; when absent, derivative traces come from
    fourth-order finite-difference stencils.
    """

    grid: SpatialGrid
    values: tuple[np.ndarray, np.ndarray, np.ndarray]
    derivative: tuple[np.ndarray, np.ndarray, np.ndarray] | None = None

    def __post_init__(self) -> None:
        vals = tuple(np.asarray(v, dtype=complex) for v in self.values)
        _check_tables(self.grid, vals, "values")
        object.__setattr__(self, "values", vals)
        if self.derivative is not None:
            der = tuple(np.asarray(v, dtype=complex) for v in self.derivative)
            _check_tables(self.grid, der, "derivative")
            object.__setattr__(self, "derivative", der)

    @classmethod
    def from_callable(cls, grid: SpatialGrid, fn: Callable[[np.ndarray], np.ndarray],
                      dfn: Callable[[np.ndarray], np.ndarray] | None = None) -> "WaveFunction":
        vals = tuple(np.asarray(fn(s), dtype=complex) * np.ones_like(s) for s in grid.segments)
        der = None
        if dfn is not None:
            der = tuple(np.asarray(dfn(s), dtype=complex) * np.ones_like(s) for s in grid.segments)
        return cls(grid, vals, der)

    @classmethod
    def from_flat(cls, grid: SpatialGrid, flat: np.ndarray,
                  flat_derivative: np.ndarray | None = None) -> "WaveFunction":
        der = None if flat_derivative is None else grid.split(flat_derivative)
        return cls(grid, grid.split(flat), der)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.values)

    def derivative_tables(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        if self.derivative is not None:
            return self.derivative
        return tuple(first_derivative(v, h) for v, h in zip(self.values, self.grid.spacing))

    def integrate(self) -> complex:
        return complex(sum(quadrature(v, h) for v, h in zip(self.values, self.grid.spacing)))

    def inner(self, other: "WaveFunction") -> complex:
        """``<self, other>``, antilinear in ``self``."""
        return complex(sum(
            quadrature(np.conj(u) * v, h)
            for u, v, h in zip(self.values, other.values, self.grid.spacing)
        ))

    def norm(self) -> float:
        return float(np.sqrt(abs(self.inner(self))))

    def scaled(self, c: complex) -> "WaveFunction":
        der = None if self.derivative is None else tuple(c * d for d in self.derivative)
        return WaveFunction(self.grid, tuple(c * v for v in self.values), der)


def _check_tables(grid: SpatialGrid, tables: tuple, label: str) -> None:
    if len(tables) != 3:
        raise ConfigurationError(f"{label}: expected three segment tables")
    for t, n in zip(tables, grid.n_per_segment):
        if t.shape != (n,):
            raise ConfigurationError(f"{label}: table shape {t.shape} does not match segment of {n} nodes")
        if not np.all(np.isfinite(t)):
            raise ConfigurationError(f"{label}: non-finite samples")


def quadrature(f: np.ndarray, spacing: float, n_expected: int | None = None) -> complex:
    """Composite Simpson over one uniform segment with an odd number of nodes."""
    f = np.asarray(f)
    if n_expected is not None and f.shape[-1] != n_expected:
        raise ConfigurationError(f"table has {f.shape[-1]} nodes, segment has {n_expected}")
    n = f.shape[-1]
    if n < 3 or n % 2 == 0:
        raise ConfigurationError(f"composite Simpson needs an odd node count >= 3, got {n}")
    return simpson(f, dx=spacing, axis=-1)


def simpson_weights(n: int, spacing: float) -> np.ndarray:
    """Composite Simpson weights ``h/3 (1, 4, 2, ..., 4, 1)`` for an odd node count."""
    if n < 3 or n % 2 == 0:
        raise ConfigurationError(f"composite Simpson needs an odd node count >= 3, got {n}")
    w = np.full(n, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * spacing / 3.0


def tail_integral_weights(n: int, spacing: float) -> np.ndarray:
    """Matrix ``T`` with ``(T @ y)[j]`` approximating the integral of y from node j to the last node.

    Each sub-interval is integrated exactly for the cubic through four
    neighbouring nodes, so the rule is fourth-order accurate at every node.
    """
    if n < 4:
        raise ConfigurationError("tail integration needs at least four nodes")
    per_interval = np.zeros((n - 1, n))
    inner = np.array([-1.0, 13.0, 13.0, -1.0]) / 24.0
    per_interval[0, 0:4] = np.array([9.0, 19.0, -5.0, 1.0]) / 24.0
    per_interval[n - 2, n - 4:n] = np.array([1.0, -5.0, 19.0, 9.0]) / 24.0
    for i in range(1, n - 2):
        per_interval[i, i - 1:i + 3] = inner
    tail = np.zeros((n, n))
    tail[:-1] = np.cumsum(per_interval[::-1], axis=0)[::-1]
    return tail * spacing


def first_derivative(f: np.ndarray, spacing: float) -> np.ndarray:
    """Fourth-order first derivative with one-sided stencils at both ends."""
    f = np.asarray(f)
    n = f.shape[-1]
    if n < 5:
        raise ConfigurationError("derivative stencils need at least five nodes")
    d = np.empty_like(f, dtype=np.result_type(f, float))
    d[..., 2:-2] = (f[..., :-4] - 8 * f[..., 1:-3] + 8 * f[..., 3:-1] - f[..., 4:]) / 12.0
    d[..., 0] = -25 * f[..., 0] + 48 * f[..., 1] - 36 * f[..., 2] + 16 * f[..., 3] - 3 * f[..., 4]
    d[..., 0] /= 12.0
    d[..., 1] = (-3 * f[..., 0] - 10 * f[..., 1] + 18 * f[..., 2] - 6 * f[..., 3] + f[..., 4]) / 12.0
    d[..., -1] = 25 * f[..., -1] - 48 * f[..., -2] + 36 * f[..., -3] - 16 * f[..., -4] + 3 * f[..., -5]
    d[..., -1] /= 12.0
    d[..., -2] = (3 * f[..., -1] + 10 * f[..., -2] - 18 * f[..., -3] + 6 * f[..., -4] - f[..., -5]) / 12.0
    return d / spacing


def second_derivative_interior(f: np.ndarray, spacing: float) -> np.ndarray:
    """Fourth-order central second derivative on nodes ``2 .. n-3``."""
    f = np.asarray(f)
    return (-f[..., :-4] + 16 * f[..., 1:-3] - 30 * f[..., 2:-2]
            + 16 * f[..., 3:-1] - f[..., 4:]) / (12.0 * spacing ** 2)


def op_norm_estimate(M: np.ndarray, tol: float = 1e-10, seed: int = 12345) -> float:
    """Largest singular value; ARPACK Lanczos with a seeded start vector, dense SVD when small."""
    M = np.asarray(M)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ConfigurationError(f"op_norm_estimate needs a square matrix, got shape {M.shape}")
    n = M.shape[0]
    if n == 0 or not np.any(M):
        return 0.0
    if n <= DENSE_SVD_LIMIT:
        return float(np.linalg.norm(M, 2))
    rng = np.random.default_rng(seed)
    v0 = rng.standard_normal(n).astype(M.dtype)
    try:
        top = svds(M, k=1, tol=tol, v0=v0, return_singular_vectors=False)
    except ArpackNoConvergence as exc:
        raise NumericalError("operator-norm estimate did not converge") from exc
    return float(top[0])


def weighted_op_norm(M: np.ndarray, weights: np.ndarray, tol: float = 1e-10) -> float:
    """Operator norm of ``M`` on the space with inner product ``sum w |f|^2``."""
    s = np.sqrt(np.asarray(weights, dtype=float))
    return op_norm_estimate(s[:, None] * M / s[None, :], tol=tol)
