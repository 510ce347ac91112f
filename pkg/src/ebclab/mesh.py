"""Radial finite-volume meshes on ``[0, R2]`` with interfaces at cell faces."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

INNER, LAYER, OUTER = 0, 1, 2


@dataclass(frozen=True)
class RadialMesh:
    nodes: np.ndarray = field(repr=False)
    region: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        nodes = np.array(self.nodes, dtype=float)
        region = np.array(self.region, dtype=int)
        if nodes.ndim != 1 or nodes.size < 2 or nodes[0] != 0.0:
            raise ValueError("nodes must be a 1-D array starting at r = 0")
        if np.any(np.diff(nodes) <= 0.0):
            raise ValueError("nodes must be strictly increasing")
        if region.shape != (nodes.size - 1,):
            raise ValueError("need one region tag per cell")
        for a in (nodes, region):
            a.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "region", region)

    @property
    def n_cells(self) -> int:
        return self.region.size

    @property
    def R2(self) -> float:
        return float(self.nodes[-1])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.nodes[:-1] + self.nodes[1:])

    @property
    def widths(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def volumes(self) -> np.ndarray:
        """``int r^2 dr`` over each cell (solid-angle factor left out)."""
        return np.diff(self.nodes**3) / 3.0

    def cells_in(self, *tags: int) -> np.ndarray:
        return np.isin(self.region, tags)


def _stretch(s: np.ndarray, alpha: float) -> np.ndarray:
    """Map [0, 1] onto itself with geometric cell growth away from s = 0."""
    if alpha == 0.0:
        return s
    return np.expm1(alpha * s) / math.expm1(alpha)


def _inner_nodes(R1: float, n: int, alpha: float) -> np.ndarray:
    s = np.arange(n + 1) / n
    nodes = R1 * (1.0 - _stretch(1.0 - s, alpha))
    nodes[0], nodes[-1] = 0.0, R1
    return nodes


def _outer_nodes(a: float, R2: float, n: int, alpha: float) -> np.ndarray:
    s = np.arange(n + 1) / n
    nodes = a + (R2 - a) * _stretch(s, alpha)
    nodes[0], nodes[-1] = a, R2
    return nodes


def layered_mesh(R1: float, R2: float, delta: float, n_inner: int = 32, n_layer: int = 16,
                 n_outer: int = 32, stretch: float = 2.0) -> RadialMesh:
    """Three-region mesh: graded bulk cells refined toward the layer, uniform layer cells.

    ``R1`` and ``R1 + delta`` are nodes exactly; ``stretch`` is the log of the
    largest-to-smallest cell ratio inside each bulk region.
    """
    if min(n_inner, n_outer) < 4 or n_layer < 16:
        raise ValueError("need n_inner, n_outer >= 4 and n_layer >= 16")
    if not (0.0 < delta < R2 - R1):
        raise ValueError(f"delta must lie in (0, R2 - R1), got {delta}")
    a = R1 + delta
    if delta / n_layer <= 64.0 * math.ulp(a):
        raise ValueError(f"delta={delta} too thin to resolve with {n_layer} cells in double precision")
    layer = R1 + delta * (np.arange(n_layer + 1) / n_layer)
    layer[-1] = a
    nodes = np.concatenate([_inner_nodes(R1, n_inner, stretch), layer[1:], _outer_nodes(a, R2, n_outer, stretch)[1:]])
    region = np.repeat([INNER, LAYER, OUTER], [n_inner, n_layer, n_outer])
    return RadialMesh(nodes, region)


def build_two_region_mesh(R1: float, R2: float, n_inner: int = 64, n_outer: int = 64,
                          stretch: float = 2.0) -> RadialMesh:
    """Mesh for the effective problem: ``(0, R1)`` and ``(R1, R2)``, both refined toward ``R1``."""
    if min(n_inner, n_outer) < 4:
        raise ValueError("need at least 4 cells per region")
    nodes = np.concatenate([_inner_nodes(R1, n_inner, stretch), _outer_nodes(R1, R2, n_outer, stretch)[1:]])
    region = np.repeat([INNER, OUTER], [n_inner, n_outer])
    return RadialMesh(nodes, region)
