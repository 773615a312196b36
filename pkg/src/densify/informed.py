"""Informed-set filtering of roadmap vertices.

Once a solution of cost ``c_best`` is known, only points whose summed
distance to start and goal is at most ``c_best`` can lie on a better
path. That set is a prolate hyperspheroid with the start and goal as
foci; everything outside it is dropped from the search.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .roadmap import Roadmap, distances
from .strategy import unit_ball_volume

PRUNE_THRESHOLD = 0.01

# slack on membership so round-off never drops a vertex of the incumbent path
_MEMBER_TOL = 1e-12


@dataclass(frozen=True)
class InformedSet:
    start: np.ndarray
    goal: np.ndarray
    c_best: float

    def __post_init__(self):
        object.__setattr__(self, "start", np.asarray(self.start, dtype=float))
        object.__setattr__(self, "goal", np.asarray(self.goal, dtype=float))
        if self.start.shape != self.goal.shape:
            raise ValueError("start and goal dimensions differ")
        if self.c_best < self.c_min * (1 - 1e-12):
            raise ValueError(f"c_best {self.c_best} is below the straight-line cost {self.c_min}")

    @property
    def d(self) -> int:
        return len(self.start)

    @property
    def c_min(self) -> float:
        return float(np.linalg.norm(self.goal - self.start))

    def focal_sum(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return distances(pts, self.start) + distances(pts, self.goal)

    def contains(self, p) -> bool:
        return bool(self.contains_many(p)[0])

    def contains_many(self, points) -> np.ndarray:
        return self.focal_sum(points) <= self.c_best + _MEMBER_TOL * max(1.0, self.c_best)

    def volume(self) -> float:
        return ellipsoid_volume(self)


def contains(informed: InformedSet, p) -> bool:
    return informed.contains(p)


def ellipsoid_volume(informed: InformedSet) -> float:
    """Lebesgue measure of the hyperspheroid (not clipped to the unit cube)."""
    c, cmin, d = informed.c_best, informed.c_min, informed.d
    spread = max(c * c - cmin * cmin, 0.0)
    return c * spread ** ((d - 1) / 2) * unit_ball_volume(d) / 2**d


class InformedFilter:
    """Tracks the incumbent and applies pruning and rejection to a roadmap.

    Existing vertices are pruned only when the incumbent improved by more
    than ``threshold`` (relative) since the last prune. Vertices that
    arrive later are always tested against the latest incumbent.
    """

    def __init__(self, roadmap: Roadmap, threshold: float = PRUNE_THRESHOLD, enabled: bool = True):
        if threshold < 0:
            raise ValueError("threshold must be non-negative")
        self.roadmap = roadmap
        self.threshold = threshold
        self.enabled = enabled
        self.c_best = math.inf
        self.c_pruned = math.inf
        self.pruned = 0
        self.rejected = 0

    def informed_set(self) -> InformedSet | None:
        if not math.isfinite(self.c_best):
            return None
        pts = self.roadmap.points
        return InformedSet(pts[0], pts[1], self.c_best)

    def _outside(self, ids: np.ndarray) -> np.ndarray:
        ids = ids[(ids != 0) & (ids != 1)]
        region = self.informed_set()
        if region is None or len(ids) == 0:
            return ids[:0]
        return ids[~region.contains_many(self.roadmap.points[ids])]

    def update(self, c_best: float) -> np.ndarray:
        """Record a new incumbent; returns the vertices it prunes (possibly none)."""
        if c_best < self.c_best:
            self.c_best = c_best
        if not self.enabled or not math.isfinite(self.c_best):
            return np.empty(0, dtype=np.int64)
        if math.isfinite(self.c_pruned) and self.c_best >= self.c_pruned * (1 - self.threshold):
            return np.empty(0, dtype=np.int64)
        self.c_pruned = self.c_best
        out = self._outside(self.roadmap.active())
        if len(out):
            self.roadmap.disable(out)
        self.pruned += len(out)
        return out

    def reject(self, ids) -> np.ndarray:
        """Disable new arrivals outside the current informed set; returns them."""
        if not self.enabled:
            return np.empty(0, dtype=np.int64)
        out = self._outside(np.asarray(ids, dtype=np.int64))
        if len(out):
            self.roadmap.disable(out)
        self.rejected += len(out)
        return out


def prune_and_reject(state: InformedFilter, c_best: float) -> int:
    """Apply a new incumbent to the planner's filter; returns the number pruned."""
    return len(state.update(c_best))
