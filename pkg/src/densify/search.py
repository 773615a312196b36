"""Lazy shortest-path search with LPA*-style repair between batches.

Unevaluated edges are optimistically assumed free. After each shortest
path computation the first unevaluated edge on the candidate path is
sent to the collision detector; a blocked edge gets infinite weight and
only the vertices whose best predecessor used it are repaired.

The graph bookkeeping runs in compiled kernels when numba is available
(and as plain Python otherwise, which is correct but far slower). Each
roadmap state is frozen into a CSR adjacency whose rows are sorted by
neighbor id; edge weights and per-edge verdicts live alongside it.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from ._jit import HAVE_NUMBA
from ._jit import jit as _jit
from .cspace import EdgeCache, Scenario, segment_kernel_args, segments_free
from .cspace import _segment_free_kernel
from .roadmap import ExtendDelta, Roadmap, distances

SOLVED = "solved"
NO_PATH = "no-path"
BUDGET_EXHAUSTED = "budget-exhausted"

START, GOAL = 0, 1

# per-edge verdicts stored next to the CSR weights
UNKNOWN, FREE, BLOCKED = 0, 1, 2

# slots of the counter array shared with the kernels
_CONSIDERED, _EXPANSIONS, _HITS = 0, 1, 2

INF = math.inf

# evaluations buffered in compiled code before the cache is updated
_LOG_SIZE = 1 << 14


@dataclass
class PathResult:
    path: list[int]
    cost: float
    evaluations: int
    status: str
    edges_considered: int = 0

    @property
    def solved(self) -> bool:
        return self.status == SOLVED


# -- kernels -------------------------------------------------------------------
# Heap entries are (f, min(g, rhs), vertex), compared lexicographically.
# Stale entries are skipped on pop; when the arrays fill up the heap is
# rebuilt from the currently inconsistent vertices.


@_jit
def _less(a1, a2, av, b1, b2, bv):
    if a1 != b1:
        return a1 < b1
    if a2 != b2:
        return a2 < b2
    return av < bv


@_jit
def _sift_up(hk1, hk2, hv, i, k1, k2, v):
    while i > 0:
        p = (i - 1) // 2
        if _less(k1, k2, v, hk1[p], hk2[p], hv[p]):
            hk1[i] = hk1[p]
            hk2[i] = hk2[p]
            hv[i] = hv[p]
            i = p
        else:
            break
    hk1[i] = k1
    hk2[i] = k2
    hv[i] = v


@_jit
def _heap_pop(hk1, hk2, hv, hsize):
    n = hsize[0] - 1
    hsize[0] = n
    if n == 0:
        return
    k1, k2, v = hk1[n], hk2[n], hv[n]
    i = 0
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        if c + 1 < n and _less(hk1[c + 1], hk2[c + 1], hv[c + 1], hk1[c], hk2[c], hv[c]):
            c += 1
        if _less(hk1[c], hk2[c], hv[c], k1, k2, v):
            hk1[i] = hk1[c]
            hk2[i] = hk2[c]
            hv[i] = hv[c]
            i = c
        else:
            break
    hk1[i] = k1
    hk2[i] = k2
    hv[i] = v


@_jit
def _compact(g, rhs, h, active, dirty, hk1, hk2, hv, hsize):
    hsize[0] = 0
    for v in range(len(g)):
        if active[v] and (g[v] != rhs[v] or dirty[v]):
            m = min(g[v], rhs[v])
            i = hsize[0]
            hsize[0] = i + 1
            _sift_up(hk1, hk2, hv, i, m + h[v], m, v)


@_jit
def _push(v, g, rhs, h, active, dirty, hk1, hk2, hv, hsize):
    if hsize[0] >= len(hk1):
        # v is inconsistent or dirty, so the rebuild queues it too
        _compact(g, rhs, h, active, dirty, hk1, hk2, hv, hsize)
        return
    m = min(g[v], rhs[v])
    i = hsize[0]
    hsize[0] = i + 1
    _sift_up(hk1, hk2, hv, i, m + h[v], m, v)


@_jit
def _update_vertex(v, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters):
    """Recompute rhs(v) from all predecessors and queue v if inconsistent."""
    dirty[v] = False
    if v != 0:
        best = np.inf
        arg = -1
        if active[v]:
            s, e = indptr[v], indptr[v + 1]
            counters[0] += e - s
            for k in range(s, e):
                c = g[nbr[k]] + w[k]
                if c < best:
                    best = c
                    arg = nbr[k]
        rhs[v] = best
        parent[v] = arg
    if g[v] != rhs[v]:
        _push(v, g, rhs, h, active, dirty, hk1, hk2, hv, hsize)


@_jit
def _relax_all(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters):
    gu = g[u]
    s, e = indptr[u], indptr[u + 1]
    counters[0] += e - s
    for k in range(s, e):
        x = nbr[k]
        c = gu + w[k]
        if c < rhs[x]:
            rhs[x] = c
            parent[x] = u
            if g[x] != c:
                _push(x, g, rhs, h, active, dirty, hk1, hk2, hv, hsize)


@_jit
def _process(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters):
    """Expand u: make it consistent if overconsistent, else reset and requeue."""
    if dirty[u]:
        _update_vertex(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
        return
    counters[1] += 1
    if g[u] > rhs[u]:
        g[u] = rhs[u]
        _relax_all(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
    else:
        g[u] = np.inf
        # rhs(u) does not depend on g(u), so it is still exact
        if rhs[u] < np.inf:
            _push(u, g, rhs, h, active, dirty, hk1, hk2, hv, hsize)
        s, e = indptr[u], indptr[u + 1]
        counters[0] += e - s
        for k in range(s, e):
            x = nbr[k]
            if parent[x] == u and not dirty[x]:
                dirty[x] = True
                _push(x, g, rhs, h, active, dirty, hk1, hk2, hv, hsize)


@_jit
def _stale_on_chain(g, rhs, parent, dirty):
    """First vertex on the goal's predecessor chain that is dirty or inconsistent, else -1."""
    v = parent[1]
    for _ in range(len(g)):
        if v <= 0:
            return -1
        if dirty[v] or g[v] != rhs[v]:
            return v
        v = parent[v]
    return -1


@_jit
def _compute_shortest_path(g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters):
    # A dirty vertex lost its parent; its rhs is a lower bound, so its queue
    # key is too, and the full rescan is deferred until it reaches the top.
    while hsize[0] > 0:
        k1, k2, u = hk1[0], hk2[0], hv[0]
        gu, ru = g[u], rhs[u]
        if not active[u] or (not dirty[u] and (gu == ru or k2 != min(gu, ru))):
            _heap_pop(hk1, hk2, hv, hsize)
            continue
        gg = g[1]
        if gg == rhs[1] and not dirty[1]:
            goal_k1 = gg + h[1]
            if k1 > goal_k1 or (k1 == goal_k1 and k2 >= gg):
                # keys that tie with the goal's up to rounding can leave a
                # stale vertex on its chain; settle those before stopping
                x = _stale_on_chain(g, rhs, parent, dirty)
                if x < 0:
                    break
                _process(x, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
                continue
        _heap_pop(hk1, hk2, hv, hsize)
        _process(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)


@_jit
def _find_edge(indptr, nbr, a, b):
    """CSR position of edge (a, b), or -1."""
    lo, hi = indptr[a], indptr[a + 1]
    end = hi
    while lo < hi:
        mid = (lo + hi) // 2
        if nbr[mid] < b:
            lo = mid + 1
        else:
            hi = mid
    if lo < end and nbr[lo] == b:
        return lo
    return -1


@_jit
def _candidate_path(parent, indptr, nbr, state, buf, counters):
    """Write the start-goal path into ``buf``.

    Returns (length, i) where i indexes the first edge not yet known to
    be free, or length - 1 when the whole path is verified. A length of
    -1 means the predecessor chain is broken.
    """
    v = 1
    n = 0
    while True:
        if n >= len(buf):
            return -1, -1
        buf[n] = v
        n += 1
        if v == 0:
            break
        v = parent[v]
        if v < 0:
            return -1, -1
    for i in range(n // 2):
        t = buf[i]
        buf[i] = buf[n - 1 - i]
        buf[n - 1 - i] = t
    for i in range(n - 1):
        k = _find_edge(indptr, nbr, buf[i], buf[i + 1])
        if k < 0 or state[k] != 1:
            return n, i
        counters[2] += 1
    return n, n - 1


@_jit
def _set_verdict(a, b, free, indptr, nbr, w, state):
    for x, y in ((a, b), (b, a)):
        k = _find_edge(indptr, nbr, x, y)
        if k >= 0:
            if free:
                state[k] = 1
            else:
                state[k] = 2
                w[k] = np.inf


# exit codes of the compiled search loop
_LOOP_SOLVED, _LOOP_NO_PATH, _LOOP_BUDGET, _LOOP_LOG_FULL, _LOOP_BROKEN = 0, 1, 2, 3, 4


@_jit
def _search_loop(g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters,
                 state, buf, pts, step, budget, log_u, log_v, log_f, nlog,
                 size, strides, gstate, table, lo, hi):
    """Search, evaluate the first unknown edge of the candidate path, repeat.

    Evaluated edges are appended to the log; the loop hands control back
    when the log is full so the caller can flush it. ``budget`` < 0 means
    unlimited, otherwise it caps the evaluations of this call.
    """
    while True:
        _compute_shortest_path(g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
        if not g[1] < np.inf:
            return _LOOP_NO_PATH, 0
        length, i = _candidate_path(parent, indptr, nbr, state, buf, counters)
        if length < 0:
            return _LOOP_BROKEN, 0
        if i == length - 1:
            return _LOOP_SOLVED, length
        if budget >= 0 and nlog[0] >= budget:
            return _LOOP_BUDGET, 0
        u, v = buf[i], buf[i + 1]
        free = _segment_free_kernel(pts[u], pts[v], step, size, strides, gstate, table, lo, hi)
        k = nlog[0]
        log_u[k] = u
        log_v[k] = v
        log_f[k] = free
        nlog[0] = k + 1
        _set_verdict(u, v, free, indptr, nbr, w, state)
        if not free:
            if parent[v] == u:
                _update_vertex(v, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
            if parent[u] == v:
                _update_vertex(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
        if nlog[0] == len(log_u):
            return _LOOP_LOG_FULL, 0


@_jit
def _repair(g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters):
    """Re-establish rhs = min over predecessors after the edge set changed."""
    n = len(g)
    for v in range(1, n):
        if not active[v]:
            g[v] = np.inf
            rhs[v] = np.inf
            parent[v] = -1
            dirty[v] = False
    for v in range(1, n):
        if not active[v]:
            continue
        p = parent[v]
        if dirty[v]:
            _update_vertex(v, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
        elif p >= 0:
            k = _find_edge(indptr, nbr, p, v)
            if k < 0 or g[p] + w[k] != rhs[v]:
                _update_vertex(v, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)
    for u in range(n):
        if active[u] and g[u] < np.inf:
            _relax_all(u, g, rhs, parent, h, indptr, nbr, w, active, dirty, hk1, hk2, hv, hsize, counters)


# -- graph snapshot --------------------------------------------------------------


@dataclass
class Adjacency:
    """CSR snapshot of the active roadmap; rows indexed by global vertex id."""

    indptr: np.ndarray
    nbr: np.ndarray
    w: np.ndarray
    state: np.ndarray
    keys: np.ndarray  # row * n + neighbor, sorted
    active: np.ndarray
    version: int

    @classmethod
    def build(cls, roadmap: Roadmap) -> "Adjacency":
        n = roadmap.n
        ids = roadmap.active()
        pts = roadmap.points[ids]
        if roadmap.radius >= roadmap.max_radius:
            a, b = np.triu_indices(len(ids), k=1)
        else:
            pairs = cKDTree(pts).query_pairs(roadmap.radius, output_type="ndarray")
            a, b = pairs[:, 0], pairs[:, 1]
        diff = pts[a] - pts[b]
        w = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        keep = w <= roadmap.radius
        a, b, w = ids[a[keep]], ids[b[keep]], w[keep]
        rows = np.concatenate([a, b])
        cols = np.concatenate([b, a])
        keys = rows * n + cols
        order = np.argsort(keys)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
        active = np.zeros(n, dtype=np.bool_)
        active[ids] = True
        return cls(
            indptr,
            cols[order].astype(np.int64),
            np.concatenate([w, w])[order],
            np.zeros(len(keys), dtype=np.int8),
            keys[order],
            active,
            roadmap.version,
        )

    def apply_verdicts(self, u: np.ndarray, v: np.ndarray, free: np.ndarray) -> None:
        """Copy cached verdicts onto the edges present in this snapshot."""
        if len(u) == 0 or len(self.keys) == 0:
            return
        n = len(self.indptr) - 1
        for x, y in ((u, v), (v, u)):
            key = x * n + y
            pos = np.minimum(np.searchsorted(self.keys, key), len(self.keys) - 1)
            hit = self.keys[pos] == key
            self.state[pos[hit]] = np.where(free[hit], FREE, BLOCKED)
            self.w[pos[hit & ~free]] = np.inf

    @property
    def edges(self) -> int:
        return len(self.nbr) // 2


# -- search ------------------------------------------------------------------------


class SearchState:
    """Per-vertex search values (indexed by global vertex id) and the open queue."""

    def __init__(self, n: int):
        self.g = np.full(n, INF)
        self.rhs = np.full(n, INF)
        self.parent = np.full(n, -1, dtype=np.int64)
        # vertices whose rhs awaits a rescan because their parent got worse
        self.dirty = np.zeros(n, dtype=np.bool_)
        cap = 4 * n + 64
        self.hk1 = np.empty(cap)
        self.hk2 = np.empty(cap)
        self.hv = np.empty(cap, dtype=np.int64)
        self.hsize = np.zeros(1, dtype=np.int64)
        self.started = False

    @property
    def queued(self) -> int:
        return int(self.hsize[0])


class LazySearch:
    """Incremental lazy search from vertex 0 to vertex 1 of a roadmap.

    The same object is reused across batches. Roadmap changes (extend,
    disable) are folded in by :meth:`resume`, or by the next
    :meth:`search` if resume was not called.
    """

    def __init__(self, roadmap: Roadmap, scenario: Scenario, cache: EdgeCache, step: float):
        if scenario.dimension != roadmap.d:
            raise ValueError("scenario and roadmap dimensions differ")
        self.roadmap = roadmap
        self.scenario = scenario
        self.cache = cache
        self.step = step
        self.state = SearchState(roadmap.n)
        self.h = distances(roadmap.points, roadmap.points[GOAL])
        self.counters = np.zeros(3, dtype=np.int64)
        self._path_buf = np.empty(roadmap.n + 1, dtype=np.int64)
        self._log = (np.empty(_LOG_SIZE, dtype=np.int64), np.empty(_LOG_SIZE, dtype=np.int64),
                     np.empty(_LOG_SIZE, dtype=np.bool_), np.zeros(1, dtype=np.int64))
        self.adj: Adjacency | None = None
        self._cache_seen = -1

    @property
    def edges_considered(self) -> int:
        return int(self.counters[_CONSIDERED])

    @property
    def expansions(self) -> int:
        return int(self.counters[_EXPANSIONS])

    def _args(self):
        st, adj = self.state, self.adj
        return (st.g, st.rhs, st.parent, self.h, adj.indptr, adj.nbr, adj.w, adj.active, st.dirty,
                st.hk1, st.hk2, st.hv, st.hsize, self.counters)

    def _sync(self) -> bool:
        """Rebuild the adjacency if the roadmap changed; True if it did."""
        if self.adj is not None and self.adj.version == self.roadmap.version:
            if self.cache.evaluations != self._cache_seen:
                # verdicts recorded by someone else since our last flush
                self._apply_cache()
            return False
        self.adj = Adjacency.build(self.roadmap)
        self._apply_cache()
        return True

    def _apply_cache(self) -> None:
        self._cache_seen = self.cache.evaluations
        if self.cache.verdicts:
            pairs = np.array(list(self.cache.verdicts.keys()), dtype=np.int64)
            free = np.fromiter(self.cache.verdicts.values(), dtype=bool, count=len(pairs))
            inside = (pairs < self.roadmap.n).all(axis=1)
            self.adj.apply_verdicts(pairs[inside, 0], pairs[inside, 1], free[inside])

    def search(self, budget: int | None = None) -> PathResult:
        """Shortest feasible path in the current subgraph.

        ``budget`` caps the total number of collision-detector calls made
        through ``cache`` (across batches, not just this call).
        """
        st = self.state
        changed = self._sync()
        if not st.started:
            st.rhs[START] = 0.0
            st.parent[START] = -1
            _push(START, st.g, st.rhs, self.h, self.adj.active, st.dirty, st.hk1, st.hk2, st.hv, st.hsize)
            st.started = True
        elif changed:
            _repair(*self._args())
        evals_before = self.cache.evaluations
        considered_before = self.edges_considered
        adj, cache, counters = self.adj, self.cache, self.counters
        grid = segment_kernel_args(self.scenario)
        log_u, log_v, log_f, nlog = self._log

        def result(path, cost, status):
            return PathResult(path, cost, cache.evaluations - evals_before, status,
                              self.edges_considered - considered_before)

        while True:
            remaining = -1 if budget is None else max(0, budget - cache.evaluations)
            nlog[0] = 0
            hits_before = int(counters[_HITS])
            code, length = _search_loop(*self._args(), adj.state, self._path_buf, self.roadmap.points,
                                        float(self.step), remaining, log_u, log_v, log_f, nlog, *grid)
            m = int(nlog[0])
            if m:
                cache.store_pairs(log_u[:m].tolist(), log_v[:m].tolist(), log_f[:m].tolist())
            self._cache_seen = cache.evaluations
            cache.hits += int(counters[_HITS]) - hits_before
            if code == _LOOP_LOG_FULL:
                continue
            if code == _LOOP_SOLVED:
                return result(self._path_buf[:length].tolist(), float(st.g[GOAL]), SOLVED)
            if code == _LOOP_NO_PATH:
                return result([], INF, NO_PATH)
            if code == _LOOP_BUDGET:
                return result([], INF, BUDGET_EXHAUSTED)
            raise RuntimeError("broken predecessor chain")

    def resume(self, delta: ExtendDelta | None = None, new_vertices=None) -> None:
        """Fold roadmap changes (extension, disabled vertices) into the search values.

        Values from earlier batches are kept: only vertices whose best
        predecessor edge disappeared are recomputed, and edges out of
        already reached vertices are relaxed. Cached verdicts are reused,
        never re-evaluated. ``delta`` and ``new_vertices`` are accepted for
        symmetry with :meth:`Roadmap.extend`; the current roadmap state,
        including disabled vertices, is what counts.
        """
        if not self.state.started:
            raise RuntimeError("resume called before the first search")
        if self._sync():
            _repair(*self._args())

    def prune(self, ids) -> None:
        """Forget vertices already disabled in the roadmap."""
        if len(np.asarray(ids)) == 0 or not self.state.started:
            return
        self.resume()


def lazy_search(roadmap: Roadmap, scenario: Scenario, cache: EdgeCache, state: LazySearch | None = None,
                budget: int | None = None, step: float | None = None) -> PathResult:
    """Run (or continue) a lazy search; a fresh :class:`LazySearch` is made if ``state`` is None."""
    if state is None:
        if step is None:
            raise ValueError("step is required when starting a new search")
        state = LazySearch(roadmap, scenario, cache, step)
    return state.search(budget)


def resume_after_extend(state: LazySearch, delta: ExtendDelta | None = None) -> None:
    state.resume(delta)


def eager_astar(roadmap: Roadmap, scenario: Scenario, step: float, budget: int | None = None,
                cache: EdgeCache | None = None) -> PathResult:
    """Plain A* over the current roadmap, checking every edge it relaxes.

    This is the baseline that searches the whole graph directly. An edge
    is checked when its far end is still open and the edge would lower
    that vertex's cost-to-come, so each edge is checked at most once.
    Verdicts go to ``cache`` when one is given.
    """
    n = roadmap.n
    pts = roadmap.points
    h = distances(pts, pts[GOAL])
    g = np.full(n, INF)
    parent = np.full(n, -1, dtype=np.int64)
    closed = np.zeros(n, dtype=bool)
    g[START] = 0.0
    heap = [(h[START], h[START], START)]
    evaluations = 0
    considered = 0
    while heap:
        _, _, u = heapq.heappop(heap)
        if closed[u]:
            continue
        if u == GOAL:
            path = [GOAL]
            while path[-1] != START:
                path.append(int(parent[path[-1]]))
            path.reverse()
            return PathResult(path, float(g[GOAL]), evaluations, SOLVED, considered)
        closed[u] = True
        ids, w = roadmap.neighbors(u)
        considered += len(ids)
        cand = g[u] + w
        mask = ~closed[ids] & (cand < g[ids])
        ids, cand = ids[mask], cand[mask]
        if budget is not None and evaluations + len(ids) > budget:
            keep = max(0, budget - evaluations)
            ids, cand = ids[:keep], cand[:keep]
            exhausted = True
        else:
            exhausted = False
        free = segments_free(scenario, np.broadcast_to(pts[u], (len(ids), roadmap.d)), pts[ids], step)
        evaluations += len(ids)
        if cache is not None:
            cache.store_many(u, ids.tolist(), free.tolist())
        for v, c in zip(ids[free].tolist(), cand[free].tolist()):
            if c < g[v]:
                g[v] = c
                parent[v] = u
                heapq.heappush(heap, (c + h[v], h[v], v))
        if exhausted:
            return PathResult([], INF, evaluations, BUDGET_EXHAUSTED, considered)
    return PathResult([], INF, evaluations, NO_PATH, considered)
