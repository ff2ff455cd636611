"""SBS deployments and the distance-threshold interference graph.

Two base stations interfere when their Euclidean distance is strictly below
the interference radius; ties are non-edges.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

DEFAULT_AREA = (1000.0, 1000.0)
DEFAULT_RADIUS = 300.0


@dataclass(frozen=True)
class Deployment:
    positions: tuple[tuple[float, float], ...]
    area: tuple[float, float] = DEFAULT_AREA
    seed: int | None = None

    def __post_init__(self):
        if len(self.positions) < 1:
            raise ValueError("deployment needs at least one SBS")
        w, h = self.area
        for x, y in self.positions:
            if not (0.0 <= x <= w and 0.0 <= y <= h):
                raise ValueError(f"position ({x}, {y}) outside area {self.area}")

    @property
    def n(self) -> int:
        return len(self.positions)

    def coords(self) -> np.ndarray:
        return np.asarray(self.positions, dtype=float).reshape(self.n, 2)


@dataclass(frozen=True)
class InterferenceGraph:
    """Undirected, irreflexive graph; ``neighbor_sets[n]`` is J_n sorted ascending."""

    n_nodes: int
    neighbor_sets: tuple[tuple[int, ...], ...]
    radius: float | None = None
    deployment: Deployment | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.n_nodes < 1:
            raise ValueError("graph needs at least one node")
        if len(self.neighbor_sets) != self.n_nodes:
            raise ValueError("one neighbor set per node required")
        for i, nbrs in enumerate(self.neighbor_sets):
            if list(nbrs) != sorted(set(nbrs)):
                raise ValueError(f"neighbor set of {i} must be sorted and unique")
            for j in nbrs:
                if j == i:
                    raise ValueError(f"self-loop at node {i}")
                if not 0 <= j < self.n_nodes:
                    raise ValueError(f"neighbor {j} of {i} out of range")
                if i not in self.neighbor_sets[j]:
                    raise ValueError(f"asymmetric edge ({i}, {j})")

    def degree(self, n: int) -> int:
        return len(self.neighbor_sets[n])

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(s) for s in self.neighbor_sets], dtype=np.int64)

    @property
    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i, nbrs in enumerate(self.neighbor_sets) for j in nbrs if i < j]

    def adjacency(self) -> np.ndarray:
        adj = np.zeros((self.n_nodes, self.n_nodes), dtype=np.int64)
        for i, j in self.edges:
            adj[i, j] = adj[j, i] = 1
        return adj

    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """(indptr, indices) arrays for compiled kernels."""
        indptr = np.zeros(self.n_nodes + 1, dtype=np.int64)
        indptr[1:] = np.cumsum(self.degrees)
        indices = np.array([j for nbrs in self.neighbor_sets for j in nbrs], dtype=np.int64)
        return indptr, indices

    def to_dict(self) -> dict:
        d: dict = {"n": self.n_nodes, "radius": self.radius, "edges": [list(e) for e in self.edges]}
        if self.deployment is not None:
            d["area"] = list(self.deployment.area)
            d["positions"] = [list(p) for p in self.deployment.positions]
            d["seed"] = self.deployment.seed
        return d


def generate_deployment(n: int, area: Sequence[float] = DEFAULT_AREA, seed: int = 0) -> Deployment:
    """Place ``n`` SBSs uniformly at random in ``[0, w] x [0, h]``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    w, h = (float(v) for v in area)
    if w <= 0 or h <= 0:
        raise ValueError(f"area dimensions must be positive, got {area}")
    rng = np.random.default_rng(seed)
    xy = rng.random((n, 2)) * np.array([w, h])
    return Deployment(tuple((float(x), float(y)) for x, y in xy), (w, h), seed)


def build_graph(d: Deployment, radius: float = DEFAULT_RADIUS) -> InterferenceGraph:
    if radius <= 0:
        raise ValueError(f"radius must be positive, got {radius}")
    xy = d.coords()
    diff = xy[:, None, :] - xy[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=-1))
    close = dist < radius
    np.fill_diagonal(close, False)
    nbrs = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in close)
    return InterferenceGraph(d.n, nbrs, float(radius), d)


def load_graph(edges: Iterable[Sequence[int]], n: int) -> InterferenceGraph:
    """Graph from an explicit edge list; symmetric closure, duplicates collapsed."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    sets: list[set[int]] = [set() for _ in range(n)]
    for e in edges:
        i, j = (int(v) for v in e)
        if i == j:
            raise ValueError(f"self-loop on node {i}")
        if not (0 <= i < n and 0 <= j < n):
            raise ValueError(f"edge ({i}, {j}) out of range for n={n}")
        sets[i].add(j)
        sets[j].add(i)
    return InterferenceGraph(n, tuple(tuple(sorted(s)) for s in sets))


def graph_from_dict(d: dict) -> InterferenceGraph:
    """Inverse of :meth:`InterferenceGraph.to_dict`.

    With positions and a radius present the graph is rebuilt from geometry and
    checked against any stored edge list; otherwise the edge list is used.
    """
    n = int(d["n"])
    if d.get("positions") is not None and d.get("radius") is not None:
        area = tuple(d.get("area") or DEFAULT_AREA)
        dep = Deployment(tuple(tuple(map(float, p)) for p in d["positions"]), area, d.get("seed"))
        if dep.n != n:
            raise ValueError(f"n={n} but {dep.n} positions given")
        g = build_graph(dep, float(d["radius"]))
        if "edges" in d and {tuple(sorted(e)) for e in d["edges"]} != set(g.edges):
            raise ValueError("stored edges disagree with positions and radius")
        return g
    g = load_graph(d.get("edges", []), n)
    if d.get("radius") is not None:
        g = InterferenceGraph(g.n_nodes, g.neighbor_sets, float(d["radius"]))
    return g


def save_topology(g: InterferenceGraph, path: str | Path) -> None:
    Path(path).write_text(json.dumps(g.to_dict(), indent=2) + "\n")


def load_topology(path: str | Path) -> InterferenceGraph:
    return graph_from_dict(json.loads(Path(path).read_text()))
