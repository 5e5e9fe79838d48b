"""Compactly supported real potentials on the middle segment ``[a, b]``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any, Mapping

import numpy as np

from .numerics import ConfigurationError, SpatialGrid, quadrature

__all__ = ["Potential", "build_potential", "check_positive", "zero_potential"]

KINDS = ("barrier", "well", "bumps", "samples")


@dataclass(frozen=True, eq=False)
class Potential:
    """Real samples of ``V`` on a grid, zero on both exterior segments.

    ``support_values`` are the samples on ``[a, b]`` including both one-sided
    endpoint values ``V(a+)`` and ``V(b-)``.
    """

    grid: SpatialGrid
    support_values: np.ndarray
    descriptor: Mapping[str, Any]
    l1_norm: float
    linf_norm: float

    @property
    def values(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n0, _, n2 = self.grid.n_per_segment
        return np.zeros(n0), self.support_values, np.zeros(n2)

    def flat(self) -> np.ndarray:
        return np.concatenate(self.values)

    def on_grid(self, grid: SpatialGrid) -> "Potential":
        """Rebuild the same construction record on another grid with the same ``a, b``."""
        if not (np.isclose(grid.a, self.grid.a) and np.isclose(grid.b, self.grid.b)):
            raise ConfigurationError("support endpoints differ between grids")
        if self.descriptor.get("kind") == "samples":
            old = self.grid.segments[1]
            new = grid.segments[1]
            vals = np.interp(new, old, self.support_values)
            return _finish(grid, vals, {"kind": "samples", "values": "interpolated"})
        return build_potential(dict(self.descriptor), grid)


def _finish(grid: SpatialGrid, support: np.ndarray, descriptor: Mapping[str, Any]) -> Potential:
    support = np.asarray(support, dtype=float)
    if not np.all(np.isfinite(support)):
        raise ConfigurationError("potential samples must be finite")
    support.setflags(write=False)
    l1 = float(quadrature(np.abs(support), grid.spacing[1]))
    linf = float(np.max(np.abs(support))) if support.size else 0.0
    return Potential(grid, support, dict(descriptor), l1, linf)


def build_potential(record: Mapping[str, Any], grid: SpatialGrid) -> Potential:
    """Construct a potential from a JSON-style record.

    Supported records::

        {"kind": "barrier", "height": V0}        # V = V0 on [a, b]
        {"kind": "well", "depth": V0}            # V = -V0 on [a, b]
        {"kind": "bumps", "bumps": [{"center": c, "width": w, "scale": s}, ...]}
        {"kind": "samples", "values": [...]}     # one value per grid node, all segments
    """
    if not isinstance(record, Mapping) or "kind" not in record:
        raise ConfigurationError("potential record needs a 'kind' field")
    kind = record["kind"]
    x = grid.segments[1]
    if kind == "barrier":
        height = _real(record, "height")
        return _finish(grid, np.full(x.size, height), {"kind": kind, "height": height})
    if kind == "well":
        depth = _real(record, "depth")
        return _finish(grid, np.full(x.size, -depth), {"kind": kind, "depth": depth})
    if kind == "bumps":
        bumps = record.get("bumps")
        if not bumps:
            raise ConfigurationError("'bumps' record needs a non-empty 'bumps' list")
        vals = np.zeros(x.size)
        for bump in bumps:
            c, w, s = (_real(bump, key) for key in ("center", "width", "scale"))
            if w <= 0 or c - w / 2 < grid.a - 1e-12 or c + w / 2 > grid.b + 1e-12:
                raise ConfigurationError(f"bump {dict(bump)} must lie inside [a, b]")
            inside = np.abs(x - c) < w / 2
            vals[inside] += s * np.cos(np.pi * (x[inside] - c) / w) ** 2
        return _finish(grid, vals, {"kind": kind, "bumps": [dict(b) for b in bumps]})
    if kind == "samples":
        raw = np.asarray(record.get("values"), dtype=float)
        left, mid, right = grid.split(raw)
        if np.any(left != 0.0) or np.any(right != 0.0):
            raise ConfigurationError("sampled potential is nonzero outside [a, b]")
        return _finish(grid, mid, {"kind": kind, "values": raw.tolist()})
    raise ConfigurationError(f"unknown potential kind {kind!r}; expected one of {KINDS}")


def zero_potential(grid: SpatialGrid) -> Potential:
    """``V = 0``; admitted for trivial-case checks of the Jost machinery only."""
    return _finish(grid, np.zeros(grid.n_per_segment[1]), {"kind": "barrier", "height": 0.0})


def check_positive(V: Potential) -> bool:
    """Pointwise ``V >= 0`` with at least one strictly positive interior node."""
    interior = V.support_values[1:-1]
    return bool(np.all(V.support_values >= 0.0) and np.any(interior > 0.0))


def _real(record: Mapping[str, Any], key: str) -> float:
    try:
        value = float(record[key])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigurationError(f"field {key!r} must be a real number") from exc
    if not np.isfinite(value):
        raise ConfigurationError(f"field {key!r} must be finite")
    return value
