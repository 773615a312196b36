import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densify.informed import InformedFilter, InformedSet, contains, ellipsoid_volume, prune_and_reject
from densify.roadmap import Roadmap


def test_membership_examples():
    s = InformedSet((0.0, 0.0), (1.0, 0.0), 1.2)
    assert contains(s, (0.0, 0.0))
    for y in (0.0, 0.1, 0.3, 0.33, 0.34, 0.5):
        assert s.contains((0.5, y)) == (2 * math.hypot(0.5, y) <= 1.2)


def test_degenerate_set_is_the_segment():
    s = InformedSet((0.0, 0.0), (1.0, 0.0), 1.0)
    assert s.contains((0.3, 0.0)) and s.contains((1.0, 0.0))
    assert not s.contains((0.3, 1e-3)) and not s.contains((1.2, 0.0))


def test_rejects_cost_below_straight_line():
    with pytest.raises(ValueError):
        InformedSet((0.0, 0.0), (1.0, 0.0), 0.9)


def test_volume_examples():
    assert ellipsoid_volume(InformedSet((0.0, 0.0), (1.0, 0.0), 1.0)) == 0.0
    assert ellipsoid_volume(InformedSet((0.0, 0.0), (1.0, 0.0), 1.25)) == pytest.approx(0.9375 * math.pi / 4)
    assert ellipsoid_volume(InformedSet((0.2,), (0.5,), 0.7)) == pytest.approx(0.7)
    assert 0.9375 * math.pi / 4 == pytest.approx(0.7363, abs=1e-4)


def test_volume_matches_monte_carlo():
    # oracle: fraction of a bounding box inside the set
    s = InformedSet((0.3, 0.4, 0.5), (0.7, 0.6, 0.5), 0.8)
    rng = np.random.default_rng(0)
    lo, hi = np.array([0.1, 0.1, 0.1]), np.array([0.9, 0.9, 0.9])
    pts = lo + (hi - lo) * rng.random((400_000, 3))
    mc = s.contains_many(pts).mean() * np.prod(hi - lo)
    assert ellipsoid_volume(s) == pytest.approx(mc, rel=0.01)


@given(st.floats(0.1, 1.0), st.floats(0.0, 2.0), st.floats(0.01, 1.0), st.integers(1, 6))
def test_volume_increasing_in_cost(cmin, extra, step, d):
    start, goal = np.zeros(d), np.zeros(d)
    goal[0] = cmin
    a = ellipsoid_volume(InformedSet(start, goal, cmin + extra))
    b = ellipsoid_volume(InformedSet(start, goal, cmin + extra + step))
    assert b > a or (d == 1 and b > a - 1e-12)


def make_roadmap(n=2000, d=2, r=None):
    rm = Roadmap.from_query((0.2,) * d, (0.8,) * d, n)
    rm.extend(n, r or math.sqrt(d))
    return rm


def test_prune_removes_exactly_the_outside_vertices():
    rm = make_roadmap()
    f = InformedFilter(rm)
    c = 1.1 * math.sqrt(2) * 0.6
    out = f.update(c)
    s = InformedSet(rm.points[0], rm.points[1], c)
    inside = s.contains_many(rm.points)
    inside[:2] = True
    assert set(out.tolist()) == set(np.flatnonzero(~inside).tolist())
    assert np.array_equal(rm.enabled, inside)
    assert f.pruned == len(out)
    # pruned points can lie on no path shorter than c
    assert np.all(s.focal_sum(rm.points[out]) > c)


def test_start_and_goal_survive_degenerate_prune():
    rm = make_roadmap(500)
    f = InformedFilter(rm)
    f.update(rm.distance(0, 1))
    active = rm.active()
    assert 0 in active and 1 in active
    # every other survivor sits on the start-goal segment
    s = InformedSet(rm.points[0], rm.points[1], rm.distance(0, 1))
    assert np.allclose(s.focal_sum(rm.points[active]), rm.distance(0, 1))


def test_small_improvement_does_not_prune():
    rm = make_roadmap()
    f = InformedFilter(rm)
    f.update(1.0)
    before = rm.enabled.copy()
    assert len(f.update(1.0 * (1 - 0.005))) == 0
    assert np.array_equal(rm.enabled, before)
    assert len(f.update(1.0 * (1 - 0.02))) > 0


def test_threshold_is_configurable():
    rm = make_roadmap()
    f = InformedFilter(rm, threshold=0.0)
    f.update(1.0)
    assert len(f.update(0.995)) > 0
    with pytest.raises(ValueError):
        InformedFilter(rm, threshold=-0.1)


def test_reject_uses_latest_incumbent():
    rm = Roadmap.from_query((0.2, 0.2), (0.8, 0.8), 3000)
    rm.extend(1000, math.sqrt(2))
    f = InformedFilter(rm)
    f.update(1.0)
    f.update(0.995)  # below the pruning threshold, but newer arrivals use it
    rm.extend(3000, math.sqrt(2))
    fresh = np.arange(1000, 3000)
    out = f.reject(fresh)
    s = InformedSet(rm.points[0], rm.points[1], 0.995)
    assert set(out.tolist()) == set(fresh[~s.contains_many(rm.points[fresh])].tolist())
    assert f.rejected == len(out)


def test_disabled_filter_is_inert():
    rm = make_roadmap()
    f = InformedFilter(rm, enabled=False)
    assert len(f.update(0.9)) == 0 and len(f.reject(np.arange(2, 100))) == 0
    assert rm.enabled.all()


def test_prune_and_reject_counts():
    rm = make_roadmap()
    f = InformedFilter(rm)
    assert prune_and_reject(f, 1.0) == f.pruned > 0


def test_post_prune_count_tracks_volume_ratio():
    # Halton points are evenly spread, so the surviving share follows the volume
    n = 20_000
    rm = Roadmap.from_query((0.3, 0.3), (0.7, 0.7), n)
    rm.extend(n, math.sqrt(2))
    f = InformedFilter(rm)
    c = 0.75
    f.update(c)
    expected = n * ellipsoid_volume(InformedSet(rm.points[0], rm.points[1], c))
    assert len(rm.active()) == pytest.approx(expected, rel=0.2)
