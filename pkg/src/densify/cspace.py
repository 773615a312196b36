"""Unit-hypercube configuration space with axis-aligned box obstacles.

Obstacles are closed: a configuration on a box face is in collision.
Edges are checked by sampling interpolants at a fixed spacing, which is
what makes every edge evaluation expensive.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property, lru_cache
from pathlib import Path

import numpy as np
from scipy import sparse
from scipy.sparse.csgraph import breadth_first_order

from ._jit import HAVE_NUMBA, jit

# cells in the obstacle lookup grid are capped at this many
_MAX_GRID_CELLS = 1 << 18
# point batches fed to the grid at once; bounds peak memory
_POINT_CHUNK = 1 << 15
_SEGMENT_POINT_CHUNK = 1 << 18
_CELLS_PER_BOX_SIDE = 6
# lattice probes used while calibrating obstacle sizes
_LATTICE_POINTS = 1 << 18


class ScenarioGenerationError(RuntimeError):
    """Raised when random obstacles cannot be fitted to the requested fraction."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


@dataclass(frozen=True)
class HyperRect:
    lo: tuple[float, ...]
    hi: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(x) for x in self.lo))
        object.__setattr__(self, "hi", tuple(float(x) for x in self.hi))
        if len(self.lo) != len(self.hi):
            raise ValueError("lo and hi must have the same dimension")
        for a, b in zip(self.lo, self.hi):
            if a > b:
                raise ValueError(f"empty box: lo={self.lo}, hi={self.hi}")
            if a < 0.0 or b > 1.0:
                raise ValueError(f"box {self.lo}..{self.hi} leaves the unit hypercube")

    @property
    def dimension(self) -> int:
        return len(self.lo)

    def contains(self, p) -> bool:
        return all(a <= x <= b for a, x, b in zip(self.lo, p, self.hi))

    def volume(self) -> float:
        return math.prod(b - a for a, b in zip(self.lo, self.hi))


class ObstacleGrid:
    """Uniform grid over the cube classifying cells against the boxes.

    A cell lying inside some box answers "blocked" without any box test,
    a cell touched by no box answers "free", and only the remaining cells
    test the point against their short candidate list.
    """

    def __init__(self, lo: np.ndarray, hi: np.ndarray, size: int | None = None):
        self.lo = np.asarray(lo, dtype=float)
        self.hi = np.asarray(hi, dtype=float)
        if self.lo.ndim != 2 or self.lo.shape != self.hi.shape:
            raise ValueError("box bounds must be (k, d) arrays of equal shape")
        k, d = self.lo.shape
        self.d = d
        self.size = size or self._grid_size(self.lo, self.hi)
        g = self.size
        self.n_cells = g**d
        self._strides = g ** np.arange(d - 1, -1, -1)
        # sentinel box k can never contain anything
        self._lo_ext = np.vstack([self.lo, np.full((1, d), np.inf)])
        self._hi_ext = np.vstack([self.hi, np.full((1, d), -np.inf)])
        self._state = np.zeros(self.n_cells, dtype=np.int8)  # 0 free, 1 blocked, 2 test
        self._table = np.zeros((self.n_cells, 1), dtype=np.int64)
        if k == 0:
            return

        # cells touched by each box (floor is monotone, so a point inside a
        # box always lands in one of these cells)
        touch_lo = np.clip(np.floor(self.lo * g).astype(np.int64), 0, g - 1)
        touch_hi = np.clip(np.floor(self.hi * g).astype(np.int64), 0, g - 1)
        # cells lying strictly inside each box, with a margin for rounding
        margin = 1e-9
        in_lo = np.ceil((self.lo + margin) * g).astype(np.int64)
        in_hi = np.floor((self.hi - margin) * g).astype(np.int64) - 1
        in_lo = np.maximum(in_lo, touch_lo)
        in_hi = np.minimum(in_hi, touch_hi)
        has_inside = np.all(in_lo <= in_hi, axis=1)

        covered = np.zeros((g + 1,) * d, dtype=np.int32)
        for b in np.flatnonzero(has_inside):
            for corner in range(1 << d):
                idx, sign = [], 1
                for a in range(d):
                    if corner >> a & 1:
                        idx.append(in_hi[b, a] + 1)
                        sign = -sign
                    else:
                        idx.append(in_lo[b, a])
                covered[tuple(idx)] += sign
        for a in range(d):
            covered = np.cumsum(covered, axis=a)
        full = covered[(slice(0, g),) * d].reshape(-1) > 0

        pair_cells, pair_boxes = [], []
        for b in range(k):
            shell = self._shell_cells(touch_lo[b], touch_hi[b], in_lo[b], in_hi[b], has_inside[b])
            pair_cells.append(shell)
            pair_boxes.append(np.full(len(shell), b))
        cells = np.concatenate(pair_cells)
        boxes = np.concatenate(pair_boxes)
        keep = ~full[cells]
        cells, boxes = cells[keep], boxes[keep]

        self._state[full] = 1
        if len(cells) == 0:
            return
        order = np.argsort(cells, kind="stable")
        cells, boxes = cells[order], boxes[order]
        counts = np.bincount(cells, minlength=self.n_cells)
        starts = np.cumsum(counts) - counts
        slot = np.arange(len(cells)) - starts[cells]
        self._table = np.full((self.n_cells, int(counts.max())), k, dtype=np.int64)
        self._table[cells, slot] = boxes
        self._state[(counts > 0) & ~full] = 2

    def _shell_cells(self, t_lo, t_hi, i_lo, i_hi, has_inside) -> np.ndarray:
        """Flat indices of touched cells that are not strictly inside the box."""
        d = self.d
        full_ranges = [np.arange(t_lo[a], t_hi[a] + 1) for a in range(d)]
        if not has_inside:
            return self._flat(full_ranges)
        parts = []
        # split the shell by the first axis whose coordinate leaves the interior
        for a in range(d):
            outside = np.concatenate([np.arange(t_lo[a], i_lo[a]), np.arange(i_hi[a] + 1, t_hi[a] + 1)])
            if len(outside) == 0:
                continue
            ranges = [np.arange(i_lo[j], i_hi[j] + 1) for j in range(a)] + [outside] + full_ranges[a + 1 :]
            parts.append(self._flat(ranges))
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def _flat(self, ranges) -> np.ndarray:
        mesh = np.meshgrid(*ranges, indexing="ij")
        return sum(m.reshape(-1) * s for m, s in zip(mesh, self._strides)).astype(np.int64)

    @staticmethod
    def _grid_size(lo: np.ndarray, hi: np.ndarray) -> int:
        k, d = lo.shape
        cap = max(1, int(round(_MAX_GRID_CELLS ** (1.0 / d))))
        if k == 0:
            return 1
        side = float(np.median(hi - lo))
        # a handful of cells across a typical box keeps most cells decided
        return int(min(cap, max(4, round(_CELLS_PER_BOX_SIDE / max(side, 1e-6)))))

    def points_free(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float).reshape(-1, self.d)
        out = np.empty(len(pts), dtype=bool)
        g = self.size
        for s in range(0, len(pts), _POINT_CHUNK):
            chunk = pts[s : s + _POINT_CHUNK]
            cell = np.clip(np.floor(chunk * g).astype(np.int64), 0, g - 1) @ self._strides
            state = self._state[cell]
            free = state == 0
            test = np.flatnonzero(state == 2)
            if len(test):
                p = chunk[test][:, None, :]
                cand = self._table[cell[test]]
                inside = np.all((self._lo_ext[cand] <= p) & (p <= self._hi_ext[cand]), axis=2)
                free[test] = ~inside.any(axis=1)
            out[s : s + _POINT_CHUNK] = free
        return out


@dataclass(frozen=True)
class Scenario:
    """A planning query: obstacles, start and goal in ``[0, 1]^d``."""

    dimension: int
    obstacles: tuple[HyperRect, ...]
    start: tuple[float, ...]
    goal: tuple[float, ...]
    zeta_obs: float = 0.0
    seed: int | None = None

    def __post_init__(self):
        d = self.dimension
        if d < 1:
            raise ValueError(f"dimension must be >= 1, got {d}")
        object.__setattr__(self, "obstacles", tuple(self.obstacles))
        object.__setattr__(self, "start", tuple(float(x) for x in self.start))
        object.__setattr__(self, "goal", tuple(float(x) for x in self.goal))
        if len(self.start) != d or len(self.goal) != d:
            raise ValueError("start and goal must match the scenario dimension")
        for box in self.obstacles:
            if box.dimension != d:
                raise ValueError("obstacle dimension does not match the scenario")
        for name, p in (("start", self.start), ("goal", self.goal)):
            if any(x < 0.0 or x > 1.0 for x in p):
                raise ValueError(f"{name} {p} is outside the unit hypercube")
            if any(box.contains(p) for box in self.obstacles):
                raise ValueError(f"{name} {p} is inside an obstacle")

    @cached_property
    def grid(self) -> ObstacleGrid:
        d = self.dimension
        lo = np.array([b.lo for b in self.obstacles], dtype=float).reshape(-1, d)
        hi = np.array([b.hi for b in self.obstacles], dtype=float).reshape(-1, d)
        return ObstacleGrid(lo, hi)

    def points_free(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != self.dimension:
            raise ValueError(f"points have dimension {pts.shape[-1]}, scenario has {self.dimension}")
        return self.grid.points_free(pts)

    def to_dict(self) -> dict:
        return {
            "dimension": self.dimension,
            "start": list(self.start),
            "goal": list(self.goal),
            "obstacles": [{"lo": list(b.lo), "hi": list(b.hi)} for b in self.obstacles],
            "zeta_obs": self.zeta_obs,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "Scenario":
        try:
            return cls(
                dimension=int(data["dimension"]),
                obstacles=tuple(HyperRect(o["lo"], o["hi"]) for o in data["obstacles"]),
                start=data["start"],
                goal=data["goal"],
                zeta_obs=float(data.get("zeta_obs", 0.0)),
                seed=data.get("seed"),
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"malformed scenario: {exc!r}") from exc

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=1) + "\n")

    @classmethod
    def load(cls, path) -> "Scenario":
        return cls.from_dict(json.loads(Path(path).read_text()))


def empty_scenario(d: int, start=None, goal=None) -> Scenario:
    start = (0.25,) * d if start is None else start
    goal = (0.75,) * d if goal is None else goal
    return Scenario(d, (), start, goal)


def point_free(scenario: Scenario, p) -> bool:
    p = np.asarray(p, dtype=float)
    if p.shape != (scenario.dimension,):
        raise ValueError(f"point {p} does not have dimension {scenario.dimension}")
    return bool(scenario.points_free(p[None, :])[0])


def segments_free(scenario: Scenario, a, b, step: float) -> np.ndarray:
    """Vectorized edge check: one verdict per row pair of ``a`` and ``b``.

    Each segment is split into ``ceil(length / step)`` equal pieces and all
    piece endpoints, including both segment endpoints, are tested.
    """
    if step <= 0:
        raise ValueError("step must be positive")
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    d = scenario.dimension
    if a.shape != b.shape or a.shape[1] != d:
        raise ValueError(f"segment endpoints must have shape (m, {d})")
    if len(a) == 0 or not scenario.obstacles:
        return np.ones(len(a), dtype=bool)
    if HAVE_NUMBA:
        out = np.empty(len(a), dtype=np.bool_)
        _segments_free_kernel(np.ascontiguousarray(a), np.ascontiguousarray(b), float(step), out,
                              *segment_kernel_args(scenario))
        return out
    return _segments_free_numpy(scenario, a, b, step)


def _segments_free_numpy(scenario: Scenario, a: np.ndarray, b: np.ndarray, step: float) -> np.ndarray:
    # every interpolant of every segment goes through the grid in large chunks
    m = len(a)
    out = np.ones(m, dtype=bool)
    length = np.linalg.norm(b - a, axis=1)
    pieces = np.maximum(1, np.ceil(length / step)).astype(np.int64)
    counts = pieces + 1
    ends = np.cumsum(counts)
    first = 0
    while first < m:
        # segments [first, last) hold at most _SEGMENT_POINT_CHUNK points (but at least one segment)
        base = ends[first] - counts[first]
        last = int(np.searchsorted(ends, base + _SEGMENT_POINT_CHUNK, side="right"))
        last = max(last, first + 1)
        seg = np.repeat(np.arange(first, last), counts[first:last])
        local = base + np.arange(len(seg)) - (ends[seg] - counts[seg])
        t = (local / pieces[seg])[:, None]
        # (1 - t) * a + t * b reproduces both endpoints exactly
        pts = (1.0 - t) * a[seg] + t * b[seg]
        hit = ~scenario.grid.points_free(pts)
        out[first:last] = np.bincount(seg - first, weights=hit, minlength=last - first) == 0
        first = last
    return out


def segment_kernel_args(scenario: Scenario) -> tuple:
    """Obstacle lookup arrays in the order the compiled edge checks expect."""
    grid = scenario.grid
    return grid.size, grid._strides, grid._state, grid._table, grid._lo_ext, grid._hi_ext


@jit
def _segment_free_kernel(a, b, step, size, strides, state, table, lo, hi):
    """Same interpolants and cell lookups as the vectorized check, stopping at the first hit."""
    d = a.shape[0]
    sq = 0.0
    for j in range(d):
        diff = b[j] - a[j]
        sq += diff * diff
    pieces = max(1, int(np.ceil(np.sqrt(sq) / step)))
    p = np.empty(d)
    for i in range(pieces + 1):
        t = i / pieces
        cell = 0
        for j in range(d):
            p[j] = (1.0 - t) * a[j] + t * b[j]
            c = int(np.floor(p[j] * size))
            c = min(max(c, 0), size - 1)
            cell += c * strides[j]
        st = state[cell]
        if st == 1:
            return False
        if st == 2:
            for q in range(table.shape[1]):
                box = table[cell, q]
                inside = True
                for j in range(d):
                    if p[j] < lo[box, j] or p[j] > hi[box, j]:
                        inside = False
                        break
                if inside:
                    return False
    return True


@jit
def _segments_free_kernel(a, b, step, out, size, strides, state, table, lo, hi):
    for i in range(a.shape[0]):
        out[i] = _segment_free_kernel(a[i], b[i], step, size, strides, state, table, lo, hi)


def segment_free(scenario: Scenario, a, b, step: float) -> bool:
    return bool(segments_free(scenario, np.asarray(a, float)[None], np.asarray(b, float)[None], step)[0])


class EdgeCache:
    """Memoized edge verdicts keyed by unordered vertex-index pairs.

    ``evaluations`` counts collision-detector calls and ``hits`` counts
    answers served from memory. Insertion order of ``verdicts`` is the
    order in which edges were evaluated.
    """

    def __init__(self):
        self.verdicts: dict[tuple[int, int], bool] = {}
        self.evaluations = 0
        self.hits = 0

    @staticmethod
    def key(u: int, v: int) -> tuple[int, int]:
        return (u, v) if u < v else (v, u)

    def __contains__(self, pair) -> bool:
        return self.key(*pair) in self.verdicts

    def __len__(self) -> int:
        return len(self.verdicts)

    def lookup(self, u: int, v: int) -> bool | None:
        return self.verdicts.get(self.key(u, v))

    def store(self, u: int, v: int, free: bool) -> None:
        self.verdicts[self.key(u, v)] = bool(free)
        self.evaluations += 1

    def store_many(self, u: int, vs, free) -> None:
        """Record verdicts for edges (u, v) for each v in ``vs``."""
        vs, free = list(vs), list(free)
        self.verdicts.update(((u, v) if u < v else (v, u), bool(f)) for v, f in zip(vs, free))
        self.evaluations += len(vs)

    def store_pairs(self, us, vs, free) -> None:
        """Record verdicts for the edges (us[i], vs[i])."""
        self.verdicts.update(
            ((u, v) if u < v else (v, u), bool(f)) for u, v, f in zip(list(us), list(vs), list(free))
        )
        self.evaluations += len(us)

    @property
    def queries(self) -> int:
        return self.evaluations + self.hits


def cached_edge_free(cache: EdgeCache, scenario: Scenario, u: int, v: int, points, step: float) -> bool:
    if u == v:
        raise ValueError("an edge needs two distinct vertices")
    known = cache.lookup(u, v)
    if known is not None:
        cache.hits += 1
        return known
    free = segment_free(scenario, points[u], points[v], step)
    cache.store(u, v, free)
    return free


def free_fraction(scenario: Scenario, samples: int = 100_000, seed: int = 0) -> float:
    """Monte-Carlo estimate of the collision-free volume fraction."""
    rng = np.random.default_rng(seed)
    pts = rng.random((samples, scenario.dimension))
    return float(scenario.points_free(pts).mean())


def _boxes(centers, factors, scale):
    lo = np.clip(centers - factors * scale, 0.0, 1.0)
    hi = np.clip(centers + factors * scale, 0.0, 1.0)
    return lo, hi


def _lattice_fraction(lo: np.ndarray, hi: np.ndarray) -> float:
    """Share of a regular lattice of cell centers covered by the boxes.

    Counts all boxes at once with a d-dimensional difference array, so one
    estimate costs O(k 2^d + lattice size) regardless of box sizes.
    """
    k, d = lo.shape
    g = max(8, int(round(_LATTICE_POINTS ** (1.0 / d))))
    first = np.clip(np.ceil(lo * g - 0.5), 0, g).astype(np.int64)
    last = np.clip(np.floor(hi * g - 0.5), -1, g - 1).astype(np.int64)
    keep = np.all(first <= last, axis=1)
    first, last = first[keep], last[keep]
    diff = np.zeros((g + 1,) * d, dtype=np.int32)
    for corner in range(1 << d):
        bits = np.array([(corner >> a) & 1 for a in range(d)], dtype=bool)
        coords = np.where(bits, last + 1, first)
        sign = -1 if bits.sum() % 2 else 1
        np.add.at(diff, tuple(coords.T), sign)
    for a in range(d):
        diff = np.cumsum(diff, axis=a)
    return float(np.mean(diff[(slice(0, g),) * d] > 0))


def _box_cells(lo: np.ndarray, hi: np.ndarray, res: int) -> tuple[slice, ...]:
    """Raster cells of side 1/res touching the closed box [lo, hi]."""
    a = np.clip(np.ceil(lo * res).astype(np.int64) - 1, 0, res - 1)
    b = np.clip(np.floor(hi * res).astype(np.int64), 0, res - 1)
    return tuple(slice(int(i), int(j) + 1) for i, j in zip(a, b))


@lru_cache(maxsize=8)
def _grid_adjacency(res: int, d: int) -> sparse.csr_matrix:
    """Face-neighbor adjacency of a res^d raster, cells in C order."""
    idx = np.arange(res**d).reshape((res,) * d)
    rows, cols = [], []
    for axis in range(d):
        a = np.take(idx, np.arange(res - 1), axis=axis).ravel()
        b = np.take(idx, np.arange(1, res), axis=axis).ravel()
        rows += [a, b]
        cols += [b, a]
    rows, cols = np.concatenate(rows), np.concatenate(cols)
    return sparse.csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(res**d, res**d))


def _raster_path(free: np.ndarray, src: tuple, dst: tuple) -> np.ndarray | None:
    """Cells of one shortest face-connected path from src to dst, or None."""
    res, d = free.shape[0], free.ndim
    mask = sparse.diags(free.ravel().astype(np.int8))
    sub = (mask @ _grid_adjacency(res, d) @ mask).tocsr()
    s = int(np.ravel_multi_index(src, free.shape))
    t = int(np.ravel_multi_index(dst, free.shape))
    _, pred = breadth_first_order(sub, s, directed=True, return_predecessors=True)
    if s != t and pred[t] < 0:
        return None
    path = np.zeros(free.size, dtype=bool)
    v = t
    while v >= 0:
        path[v] = True
        v = pred[v]
    return path.reshape(free.shape)


def _place_connected(centers, factors, scale, start, goal, res, rng, max_redraws=200):
    """Place boxes one by one, redrawing any that would cut start off from goal.

    Connectivity is judged on a raster whose cells count as free only when
    they touch no box, so the surviving corridor is at least one cell wide.
    Returns None when a box cannot be placed within ``max_redraws`` tries.
    """
    k, d = centers.shape
    centers, factors = centers.copy(), factors.copy()
    free = np.ones((res,) * d, dtype=bool)
    src = tuple(np.minimum((start * res).astype(np.int64), res - 1))
    dst = tuple(np.minimum((goal * res).astype(np.int64), res - 1))
    path = _raster_path(free, src, dst)
    lo = np.empty((k, d))
    hi = np.empty((k, d))
    for i in range(k):
        for _ in range(max_redraws):
            l, h = _boxes(centers[i], factors[i], scale)
            if not (np.all((l <= start) & (start <= h)) or np.all((l <= goal) & (goal <= h))):
                cells = _box_cells(l, h, res)
                if not path[cells].any():
                    free[cells] = False
                    break
                saved = free[cells].copy()
                free[cells] = False
                trial = _raster_path(free, src, dst) if free[src] and free[dst] else None
                if trial is not None:
                    path = trial
                    break
                free[cells] = saved
            centers[i] = rng.random(d)
            factors[i] = rng.uniform(0.5, 1.0, d)
        else:
            return None
        lo[i], hi[i] = l, h
    return lo, hi


def _default_raster(d: int) -> int:
    return max(4, int(round(4096 ** (1.0 / d))))


def generate_scenario(
    d: int,
    num_obstacles: int,
    zeta_obs: float,
    seed: int,
    start=None,
    goal=None,
    *,
    tolerance: float = 0.05,
    mc_samples: int = 100_000,
    max_attempts: int = 20,
    connected: bool = False,
    raster: int | None = None,
) -> Scenario:
    """Random axis-aligned boxes covering roughly ``zeta_obs`` of the cube.

    Box centers are uniform; per-axis half-widths are ``scale * U(0.5, 1)``
    with ``scale`` found by bisection against a lattice estimate of the
    union volume. Boxes that swallow the start or goal are redrawn, and the
    result is accepted once a Monte-Carlo estimate with ``mc_samples``
    points lands within ``tolerance`` of the target.

    With ``connected=True`` boxes are placed one at a time and any box that
    would separate start from goal on a ``raster``-per-axis grid is redrawn,
    so the scenario is guaranteed to have a corridor at least one raster
    cell wide. The box scale is then re-tuned against the placed layout.
    """
    if not 0.0 <= zeta_obs < 1.0:
        raise ValueError(f"zeta_obs must lie in [0, 1), got {zeta_obs}")
    if num_obstacles < 0:
        raise ValueError("num_obstacles must be non-negative")
    start = np.full(d, 0.25) if start is None else np.asarray(start, dtype=float)
    goal = np.full(d, 0.75) if goal is None else np.asarray(goal, dtype=float)
    if start.shape != (d,) or goal.shape != (d,):
        raise ValueError("start and goal must match the dimension")
    if num_obstacles == 0 or zeta_obs == 0.0:
        return Scenario(d, (), start, goal, zeta_obs, seed)

    rng = np.random.default_rng(seed)
    probe = rng.random((mc_samples, d))
    centers = rng.random((num_obstacles, d))
    factors = rng.uniform(0.5, 1.0, (num_obstacles, d))

    achieved = 0.0
    for _ in range(max_attempts):
        lo_s, hi_s = 0.0, 1.0
        for _ in range(30):
            mid = 0.5 * (lo_s + hi_s)
            if _lattice_fraction(*_boxes(centers, factors, mid)) < zeta_obs:
                lo_s = mid
            else:
                hi_s = mid
        scale = 0.5 * (lo_s + hi_s)

        if connected:
            placed = _connected_layout(centers, factors, scale, zeta_obs, start, goal, seed,
                                       raster or _default_raster(d), tolerance)
            if placed is None:
                break
            lo, hi = placed
            achieved = 1.0 - float(ObstacleGrid(lo, hi).points_free(probe).mean())
            if abs(achieved - zeta_obs) <= tolerance:
                boxes = tuple(HyperRect(l, h) for l, h in zip(lo, hi))
                return Scenario(d, boxes, start, goal, zeta_obs, seed)
            centers = rng.random((num_obstacles, d))
            factors = rng.uniform(0.5, 1.0, (num_obstacles, d))
            continue

        lo, hi = _boxes(centers, factors, scale)
        for _ in range(1000):
            bad = np.flatnonzero(
                np.all((lo <= start) & (start <= hi), axis=1) | np.all((lo <= goal) & (goal <= hi), axis=1)
            )
            if len(bad) == 0:
                break
            centers[bad] = rng.random((len(bad), d))
            factors[bad] = rng.uniform(0.5, 1.0, (len(bad), d))
            lo, hi = _boxes(centers, factors, scale)
        else:
            continue

        achieved = 1.0 - float(ObstacleGrid(lo, hi).points_free(probe).mean())
        if abs(achieved - zeta_obs) <= tolerance:
            boxes = tuple(HyperRect(l, h) for l, h in zip(lo, hi))
            return Scenario(d, boxes, start, goal, zeta_obs, seed)

    raise ScenarioGenerationError(
        f"could not reach obstacle fraction {zeta_obs} (+/-{tolerance}); last attempt gave {achieved:.3f}",
        achieved,
    )


def _connected_layout(centers, factors, scale, zeta_obs, start, goal, seed, res, tolerance, steps=12):
    """Bisect the box scale of a connectivity-preserving placement.

    ``scale`` (calibrated for independent boxes) is the starting guess;
    every placement reuses the same random stream so the result depends on
    the scale alone.
    """
    lo_s, hi_s = 0.5 * scale, 2.0 * scale
    s = scale
    best = None
    for _ in range(steps):
        placed = _place_connected(centers, factors, s, start, goal, res, np.random.default_rng([seed, 1]))
        if placed is None:
            hi_s = s
        else:
            frac = _lattice_fraction(*placed)
            if best is None or abs(frac - zeta_obs) < abs(best[0] - zeta_obs):
                best = (frac, placed)
            if abs(frac - zeta_obs) <= 0.25 * tolerance:
                break
            if frac < zeta_obs:
                lo_s = s
            else:
                hi_s = s
        s = 0.5 * (lo_s + hi_s)
    return None if best is None else best[1]
