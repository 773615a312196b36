"""Implicit r-disk graphs over a prefix of a fixed sample sequence.

Edges are never stored: successors of a vertex are produced on demand by
a uniform-grid neighbor query, which is what keeps a complete graph on
10^4 - 10^5 vertices affordable.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse.csgraph import csgraph_from_dense, dijkstra

from .cspace import Scenario, segments_free
from .sampling import roadmap_samples

_MAX_INDEX_CELLS = 1 << 20


def distances(points: np.ndarray, p: np.ndarray) -> np.ndarray:
    """Euclidean distance from each row of ``points`` to ``p``."""
    diff = points - p
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


@dataclass(frozen=True)
class ExtendDelta:
    """What changed in one call to :meth:`Roadmap.extend`."""

    new_vertices: np.ndarray
    old_count: int
    new_count: int
    old_radius: float
    new_radius: float

    @property
    def is_noop(self) -> bool:
        return self.old_count == self.new_count and self.old_radius == self.new_radius


class _GridIndex:
    """Vertices bucketed into cubic cells no smaller than the query radius."""

    def __init__(self, points: np.ndarray, ids: np.ndarray, radius: float):
        d = points.shape[1]
        self.d = d
        cells = int(math.floor(1.0 / radius)) if radius > 0 else 1
        cap = int(_MAX_INDEX_CELLS ** (1.0 / d))
        self.cells = max(1, min(cells, cap))
        self.ids = ids
        if self.cells < 3:
            # the 3^d neighborhood would cover everything anyway
            self.brute = True
            return
        self.brute = False
        g = self.cells
        self.strides = g ** np.arange(d - 1, -1, -1)
        coords = np.clip(np.floor(points[ids] * g).astype(np.int64), 0, g - 1)
        keys = coords @ self.strides
        order = np.argsort(keys, kind="stable")
        self.sorted_ids = ids[order]
        counts = np.bincount(keys, minlength=g**d)
        self.cell_start = np.concatenate([[0], np.cumsum(counts)])
        self.offsets = np.array(list(itertools.product((-1, 0, 1), repeat=d)), dtype=np.int64)

    def candidates(self, p: np.ndarray) -> np.ndarray:
        if self.brute:
            return self.ids
        g = self.cells
        c = np.clip(np.floor(p * g).astype(np.int64), 0, g - 1)
        around = c + self.offsets
        around = around[np.all((around >= 0) & (around < g), axis=1)]
        keys = around @ self.strides
        starts = self.cell_start[keys]
        lens = self.cell_start[keys + 1] - starts
        total = int(lens.sum())
        if total == 0:
            return self.sorted_ids[:0]
        # concatenate the ranges [start, start + len) without a Python loop
        shift = np.repeat(starts - (np.cumsum(lens) - lens), lens)
        return self.sorted_ids[shift + np.arange(total)]


class Roadmap:
    """The r-disk graph G(count, radius) over the first ``count`` samples.

    Vertices can be disabled (collision, pruning); disabled vertices are
    left out of neighbor queries but keep their global index, so edge
    identities never change as the graph grows.
    """

    def __init__(self, points):
        self.points = np.ascontiguousarray(points, dtype=float)
        if self.points.ndim != 2:
            raise ValueError("points must be an (n, d) array")
        self.n, self.d = self.points.shape
        self.count = 0
        self.radius = 0.0
        self.enabled = np.ones(self.n, dtype=bool)
        self._index: _GridIndex | None = None
        self._indexed_size = 0
        # bumped whenever the edge set may have changed
        self.version = 0

    @classmethod
    def from_query(cls, start, goal, n: int) -> "Roadmap":
        return cls(roadmap_samples(start, goal, n))

    @property
    def max_radius(self) -> float:
        return math.sqrt(self.d)

    def active(self) -> np.ndarray:
        """Indices of enabled vertices among the first ``count``."""
        return np.flatnonzero(self.enabled[: self.count])

    def distance(self, u: int, v: int) -> float:
        return float(distances(self.points[u][None, :], self.points[v])[0])

    def extend(self, count: int, radius: float) -> ExtendDelta:
        """Grow to G(count, radius); the radius may move either way."""
        if count > self.n:
            raise ValueError(f"only {self.n} samples are available, asked for {count}")
        if count < self.count:
            raise ValueError("vertices cannot be removed by extend; disable them instead")
        if radius <= 0:
            raise ValueError("radius must be positive")
        delta = ExtendDelta(
            new_vertices=np.arange(self.count, count),
            old_count=self.count,
            new_count=count,
            old_radius=self.radius,
            new_radius=float(radius),
        )
        if delta.is_noop:
            return delta
        self.count = count
        self.radius = float(radius)
        self.version += 1
        self.rebuild_index()
        return delta

    def disable(self, ids) -> None:
        self.enabled[np.asarray(ids, dtype=np.int64)] = False
        self.version += 1
        if self._index is not None and len(self.active()) < self._indexed_size // 2:
            self.rebuild_index()

    def rebuild_index(self) -> None:
        ids = self.active()
        self._index = _GridIndex(self.points, ids, self.radius)
        self._indexed_size = len(ids)

    def neighbors(self, v: int, r: float | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Enabled vertices within ``r`` of vertex ``v`` and their distances."""
        if not 0 <= v < self.count:
            raise IndexError(f"vertex {v} is not in the active prefix of {self.count}")
        r = self.radius if r is None else r
        if self._index is not None and r <= self.radius:
            cand = self._index.candidates(self.points[v])
        else:
            cand = self.active()
        dist = distances(self.points[cand], self.points[v])
        keep = (dist <= r) & (cand != v) & self.enabled[cand]
        return cand[keep], dist[keep]


def graph_distance_oracle(
    roadmap: Roadmap, scenario: Scenario, step: float, r: float | None = None, *, return_path: bool = False
):
    """Exact shortest collision-free path cost in G(count, r) by brute force.

    Every candidate pair is collision checked, then Dijkstra runs on the
    surviving edges. Vertex 0 is the start and vertex 1 the goal; returns
    ``math.inf`` when they are disconnected. Only sensible for a few
    hundred vertices.
    """
    r = roadmap.radius if r is None else r
    pts = roadmap.points[: roadmap.count]
    m = len(pts)
    iu, ju = np.triu_indices(m, k=1)
    diff = pts[iu] - pts[ju]
    w = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    near = w <= r
    iu, ju, w = iu[near], ju[near], w[near]
    free = segments_free(scenario, pts[iu], pts[ju], step)
    dense = np.full((m, m), np.inf)
    dense[iu[free], ju[free]] = w[free]
    dense[ju[free], iu[free]] = w[free]
    graph = csgraph_from_dense(dense, null_value=np.inf)
    dist, pred = dijkstra(graph, directed=False, indices=0, return_predecessors=True)
    cost = float(dist[1])
    if not return_path:
        return cost
    path = []
    if math.isfinite(cost):
        v = 1
        while v != -9999:
            path.append(int(v))
            v = pred[v]
        path.reverse()
    return cost, path
