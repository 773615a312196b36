"""Densification schedules and the work/quality model of the subgraph space.

A schedule is the ordered list of subgraphs G(n_i, r_i) handed to the
search. Vertex batching walks the complete-graph arc, edge batching the
``|V| = n`` line, and hybrid batching follows the minimal-radius curve
until it reaches ``n`` and then continues like edge batching.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

from .sampling import dispersion_bound, nth_prime

VERTEX, EDGE, HYBRID = "vertex", "edge", "hybrid"
STRATEGIES = (VERTEX, EDGE, HYBRID)

N0 = 100
ETA_V = 2.0
RADIUS_FACTOR = 3.0


@dataclass(frozen=True)
class BatchSchedule:
    strategy: str
    n: int
    d: int
    batches: tuple[tuple[int, float], ...]
    params: dict = field(default_factory=dict, compare=False)

    def __iter__(self):
        return iter(self.batches)

    def __len__(self) -> int:
        return len(self.batches)

    def __getitem__(self, i):
        return self.batches[i]

    @property
    def counts(self) -> list[int]:
        return [b[0] for b in self.batches]

    @property
    def radii(self) -> list[float]:
        return [b[1] for b in self.batches]


def unit_ball_volume(d: int) -> float:
    """Volume of the d-dimensional unit ball."""
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def initial_radius(n: int, d: int) -> float:
    """Edge-batching start radius ``3 n^(-1/d)``."""
    return RADIUS_FACTOR * n ** (-1.0 / d)


def _grow_radius(r: float, d: int) -> list[float]:
    """Radii r, 2^(1/d) r, ... ending with the first one reaching sqrt(d), clamped."""
    r_max = math.sqrt(d)
    eta = 2.0 ** (1.0 / d)
    out = []
    i = 0
    while True:
        ri = r * eta**i
        if ri >= r_max * (1 - 1e-12):
            out.append(r_max)
            return out
        out.append(ri)
        i += 1


def edge_schedule(n: int, d: int) -> BatchSchedule:
    if n < 1:
        raise ValueError("n must be >= 1")
    r0 = initial_radius(n, d)
    batches = tuple((n, r) for r in _grow_radius(r0, d))
    return BatchSchedule(EDGE, n, d, batches, {"r0": min(r0, math.sqrt(d)), "eta_e": 2.0 ** (1.0 / d)})


def _vertex_counts(n: int, n0: int = N0) -> list[int]:
    counts = [min(n0, n)]
    while counts[-1] < n:
        counts.append(min(int(counts[-1] * ETA_V), n))
    return counts


def vertex_schedule(n: int, d: int) -> BatchSchedule:
    if n < 1:
        raise ValueError("n must be >= 1")
    r_max = math.sqrt(d)
    batches = tuple((c, r_max) for c in _vertex_counts(n))
    return BatchSchedule(VERTEX, n, d, batches, {"n0": batches[0][0], "eta_v": ETA_V})


def hybrid_schedule(n: int, d: int) -> BatchSchedule:
    """Grow vertices along ``r = 3 n_i^(-1/d)``, then grow the radius at ``n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    r_max = math.sqrt(d)
    counts = _vertex_counts(n)
    batches = [(c, min(initial_radius(c, d), r_max)) for c in counts[:-1]]
    batches.extend((n, r) for r in _grow_radius(initial_radius(n, d), d))
    return BatchSchedule(
        HYBRID, n, d, tuple(batches), {"n0": counts[0], "eta_v": ETA_V, "eta_e": 2.0 ** (1.0 / d)}
    )


def make_schedule(strategy: str, n: int, d: int) -> BatchSchedule:
    if strategy == VERTEX:
        return vertex_schedule(n, d)
    if strategy == EDGE:
        return edge_schedule(n, d)
    if strategy == HYBRID:
        return hybrid_schedule(n, d)
    raise ValueError(f"unknown strategy {strategy!r}; expected one of {STRATEGIES}")


def n_min(clearance: float, d: int) -> int:
    """Fewest vertices for which the dispersion bound certifies a first solution."""
    if clearance <= 0:
        raise ValueError("clearance must be positive")
    threshold = (2 * nth_prime(d) / clearance) ** d
    return math.floor(threshold) + 1


def r_min(count: int, d: int) -> float:
    """Radius below which a Halton prefix of ``count`` points may be disconnected."""
    if count < 1:
        raise ValueError("count must be >= 1")
    return 2 * nth_prime(d) * count ** (-1.0 / d)


def edge_fraction(d: int) -> float:
    """Expected edges per ``n^2 r^d`` for uniform points, ignoring the boundary.

    A pair is an edge when one point lies in the other's r-ball, which has
    probability ``xi_d r^d``; there are about ``n^2 / 2`` pairs.
    """
    return unit_ball_volume(d) / 2


def worst_case_edges(entry: tuple[int, float], d: int) -> int:
    """Edges an exhaustive search of G(n_i, r_i) could evaluate."""
    count, r = entry
    complete = count * (count - 1) // 2
    if r >= math.sqrt(d):
        return complete
    estimate = math.ceil(edge_fraction(d) * count**2 * r**d)
    return min(complete, estimate)


def quality_bound(dispersion: float, r: float) -> float:
    """Worst-case ratio of the r-disk path cost to the clearance-optimal cost."""
    if r <= 2 * dispersion:
        raise ValueError(f"bound undefined: radius {r} is not above twice the dispersion {dispersion}")
    return 1.0 + 2 * dispersion / (r - 2 * dispersion)


@dataclass(frozen=True)
class EffortPoint:
    batch_index: int
    n: int
    r: float
    cumulative_edges: int
    bound_factor: float | None  # None: no bound applies to this batch


def simulate_effort_quality(schedule: BatchSchedule, n: int, d: int, clearance: float) -> list[EffortPoint]:
    """Cumulative worst-case work against the quality bound, batch by batch.

    The bound is evaluated with the Halton dispersion bound of each batch
    and an effective radius capped at the optimal path's clearance.
    """
    out = []
    total = 0
    for i, (count, r) in enumerate(schedule):
        total += worst_case_edges((count, r), d)
        disp = dispersion_bound(count, d).value
        r_eff = min(r, clearance)
        factor = quality_bound(disp, r_eff) if r_eff > 2 * disp else None
        out.append(EffortPoint(i, count, r, total, factor))
    return out


def effort_to_reach(points: list[EffortPoint], factor: float) -> int | None:
    """Cumulative work when the bound first drops to ``factor`` or below."""
    for p in points:
        if p.bound_factor is not None and p.bound_factor <= factor:
            return p.cumulative_edges
    return None


def effort_csv(rows: dict[str, list[EffortPoint]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["strategy", "batch_index", "n_i", "r_i", "cumulative_edges", "bound_factor"])
    for strategy, points in rows.items():
        for p in points:
            factor = "unbounded" if p.bound_factor is None else f"{p.bound_factor:.9g}"
            writer.writerow([strategy, p.batch_index, p.n, f"{p.r:.9g}", p.cumulative_edges, factor])
    return buf.getvalue()
