"""Halton sequences and dispersion bounds for the unit hypercube."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def first_primes(count: int) -> list[int]:
    """Return the first ``count`` primes in increasing order."""
    primes: list[int] = []
    candidate = 2
    while len(primes) < count:
        if all(candidate % p for p in primes if p * p <= candidate):
            primes.append(candidate)
        candidate += 1
    return primes


def nth_prime(d: int) -> int:
    if d < 1:
        raise ValueError(f"prime index must be >= 1, got {d}")
    return first_primes(d)[-1]


def radical_inverse(index: int, base: int) -> float:
    """Mirror the base-``base`` digits of ``index`` about the radix point.

    >>> radical_inverse(3, 2)
    0.75
    """
    if base < 2:
        raise ValueError(f"base must be >= 2, got {base}")
    if index < 0:
        raise ValueError(f"index must be non-negative, got {index}")
    result = 0.0
    scale = 1.0 / base
    while index > 0:
        index, digit = divmod(index, base)
        result += digit * scale
        scale /= base
    return result


def _radical_inverse_array(indices: np.ndarray, base: int) -> np.ndarray:
    # Same digit loop as radical_inverse, over a whole index array at once.
    idx = indices.astype(np.int64).copy()
    out = np.zeros(idx.shape, dtype=float)
    scale = 1.0 / base
    while np.any(idx > 0):
        idx, digit = np.divmod(idx, base)
        out += digit * scale
        scale /= base
    return out


def halton_point(index: int, d: int) -> np.ndarray:
    """The ``index``-th Halton point in ``[0, 1]^d`` (indices start at 1)."""
    if index < 1:
        raise ValueError(f"Halton indices start at 1, got {index}")
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    return np.array([radical_inverse(index, b) for b in first_primes(d)])


def halton_points(count: int, d: int, start: int = 1) -> np.ndarray:
    """Points ``start .. start + count - 1`` of the d-dimensional Halton sequence."""
    if d < 1:
        raise ValueError(f"dimension must be >= 1, got {d}")
    if start < 1:
        raise ValueError(f"Halton indices start at 1, got {start}")
    indices = np.arange(start, start + count, dtype=np.int64)
    if count == 0:
        return np.zeros((0, d))
    return np.column_stack([_radical_inverse_array(indices, b) for b in first_primes(d)])


@dataclass(frozen=True)
class SampleSequence:
    """Deterministic Halton sequence of a fixed dimension.

    Points are produced on demand; ``point(i)`` never depends on which
    other points were requested before.
    """

    dimension: int

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError(f"dimension must be >= 1, got {self.dimension}")

    @property
    def bases(self) -> tuple[int, ...]:
        return tuple(first_primes(self.dimension))

    def point(self, index: int) -> np.ndarray:
        return halton_point(index, self.dimension)

    def points(self, count: int, start: int = 1) -> np.ndarray:
        return halton_points(count, self.dimension, start)


def roadmap_samples(start, goal, n: int) -> np.ndarray:
    """Vertex coordinates for a roadmap of ``n`` vertices.

    Row 0 is the start, row 1 the goal, and rows 2.. are Halton points
    1 .. n-2, so every prefix of two or more rows contains the query.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    if start.shape != goal.shape or start.ndim != 1:
        raise ValueError("start and goal must be 1-D points of equal dimension")
    if n < 2:
        raise ValueError(f"a roadmap needs at least the start and goal, got n={n}")
    return np.vstack([start, goal, halton_points(n - 2, start.size)])


@dataclass(frozen=True)
class DispersionBound:
    n: int
    d: int
    value: float


def dispersion_bound(n: int, d: int) -> DispersionBound:
    """Upper bound ``p_d * n^(-1/d)`` on the dispersion of ``n`` Halton points."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    return DispersionBound(n, d, nth_prime(d) * n ** (-1.0 / d))


def empirical_dispersion(points, resolution: float, d: int | None = None) -> float:
    """Largest distance from a grid cell center to its nearest point.

    Evaluated over the centers of a regular grid of spacing ``resolution``;
    this under-estimates the true dispersion and converges as the grid
    is refined.
    """
    from scipy.spatial import cKDTree

    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.size == 0:
        raise ValueError("empirical_dispersion needs at least one point")
    if d is not None and pts.shape[1] != d:
        raise ValueError(f"points have dimension {pts.shape[1]}, expected {d}")
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    d = pts.shape[1]
    if np.any(pts < 0.0) or np.any(pts > 1.0):
        raise ValueError("points must lie in the unit hypercube")
    cells = max(1, int(np.ceil(1.0 / resolution)))
    axis = (np.arange(cells) + 0.5) / cells
    # include the faces of the cube, where the largest empty balls usually sit
    axis = np.concatenate([[0.0], axis, [1.0]])
    tree = cKDTree(pts)
    worst = 0.0
    # sweep the grid in slabs along the first axis to bound memory
    rest = np.stack(np.meshgrid(*([axis] * (d - 1)), indexing="ij"), axis=-1).reshape(-1, d - 1)
    for x0 in axis:
        centers = np.column_stack([np.full(len(rest), x0), rest]) if d > 1 else np.array([[x0]])
        dist, _ = tree.query(centers)
        worst = max(worst, float(dist.max()))
    return worst
