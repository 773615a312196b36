import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from densify.cspace import EdgeCache, HyperRect, Scenario, empty_scenario
from densify.roadmap import Roadmap, graph_distance_oracle
from densify.search import (
    BUDGET_EXHAUSTED,
    NO_PATH,
    SOLVED,
    LazySearch,
    eager_astar,
    lazy_search,
    resume_after_extend,
)

from helpers import random_scenario

STEP = 0.01


def build(sc, n, r, count=None):
    rm = Roadmap.from_query(sc.start, sc.goal, n)
    rm.extend(count or n, r)
    return rm


def check_path(res, rm, cache):
    assert res.path[0] == 0 and res.path[-1] == 1
    total = 0.0
    for u, v in zip(res.path, res.path[1:]):
        assert cache.lookup(u, v) is True
        w = rm.distance(u, v)
        assert w <= rm.radius
        total += w
    assert res.cost == pytest.approx(total, rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4])
def test_lazy_on_empty_complete_graph(d):
    sc = empty_scenario(d)
    rm = build(sc, 300, math.sqrt(d))
    cache = EdgeCache()
    res = lazy_search(rm, sc, cache, step=STEP)
    assert res.status == SOLVED and res.path == [0, 1]
    assert cache.evaluations == res.evaluations == 1
    assert res.cost == pytest.approx(math.sqrt(d) / 2)


def test_tiny_radius_gives_no_path_without_evaluations():
    sc = empty_scenario(2)
    rm = build(sc, 200, 1e-4)
    cache = EdgeCache()
    res = lazy_search(rm, sc, cache, step=STEP)
    assert res.status == NO_PATH and res.evaluations == 0 and res.cost == math.inf


def test_step_required_for_new_search():
    sc = empty_scenario(2)
    with pytest.raises(ValueError):
        lazy_search(build(sc, 10, 1.0), sc, EdgeCache())


@pytest.mark.parametrize("d", [2, 4])
@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_matches_oracle_on_complete_graph(d, seed):
    sc = random_scenario(seed, d=d, k=12 if d == 2 else 40)
    rm = build(sc, 200, math.sqrt(d))
    cache = EdgeCache()
    res = lazy_search(rm, sc, cache, step=STEP)
    want = graph_distance_oracle(rm, sc, STEP)
    if math.isinf(want):
        assert res.status == NO_PATH
    else:
        assert res.status == SOLVED
        assert res.cost == pytest.approx(want, rel=1e-12, abs=1e-12)
        check_path(res, rm, cache)
    assert cache.evaluations == len(cache)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6), r=st.floats(0.08, 0.6), count=st.integers(20, 300))
def test_matches_oracle_on_partial_graphs(seed, r, count):
    sc = random_scenario(seed, k=15)
    rm = build(sc, 300, r, count)
    res = lazy_search(rm, sc, EdgeCache(), step=STEP)
    want = graph_distance_oracle(rm, sc, STEP)
    assert res.cost == pytest.approx(want, rel=1e-12) if math.isfinite(want) else res.status == NO_PATH


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10**6), d=st.sampled_from([2, 3]))
def test_resume_matches_cold_search(seed, d):
    rng = np.random.default_rng(seed)
    sc = random_scenario(seed, d=d, k=15)
    n = 250
    rm = Roadmap.from_query(sc.start, sc.goal, n)
    cache = EdgeCache()
    state = None
    count, r = 30, 0.15
    previous = math.inf
    for _ in range(6):
        delta = rm.extend(count, r)
        if state is None:
            state = LazySearch(rm, sc, cache, STEP)
        else:
            resume_after_extend(state, delta)
        if rng.random() < 0.3:
            # drop a few non-query vertices, as pruning would
            victims = rng.choice(np.arange(2, count), size=3, replace=False)
            rm.disable(victims)
            state.prune(victims)
        res = state.search()
        cold = Roadmap(rm.points)
        cold.extend(count, r)
        cold.enabled[:] = rm.enabled
        fresh = lazy_search(cold, sc, EdgeCache(), step=STEP)
        assert res.status == fresh.status
        if res.solved:
            assert res.cost == pytest.approx(fresh.cost, rel=1e-12)
            check_path(res, rm, cache)
            if rm.enabled.all():
                assert res.cost <= previous + 1e-12
            previous = res.cost
        count = min(n, count + int(rng.integers(0, 80)))
        r = min(math.sqrt(d), r * float(rng.uniform(1.0, 1.6)))
    assert cache.evaluations == len(cache)


def test_resume_before_search_is_an_error():
    sc = empty_scenario(2)
    state = LazySearch(build(sc, 50, 0.5), sc, EdgeCache(), STEP)
    with pytest.raises(RuntimeError):
        state.resume()


def test_noop_extension_costs_nothing():
    sc = random_scenario(3)
    rm = build(sc, 200, 0.3)
    cache = EdgeCache()
    state = LazySearch(rm, sc, cache, STEP)
    first = state.search()
    delta = rm.extend(200, 0.3)
    assert delta.is_noop
    state.resume(delta)
    again = state.search()
    assert again.evaluations == 0 and again.cost == first.cost


def test_cached_verdicts_are_reused():
    sc = random_scenario(8)
    rm = build(sc, 200, 0.4)
    cache = EdgeCache()
    first = lazy_search(rm, sc, cache, step=STEP)
    second = lazy_search(rm, sc, cache, step=STEP)
    assert second.evaluations == 0 and second.cost == first.cost
    assert cache.hits > 0


def test_budget_is_respected():
    sc = Scenario(2, (HyperRect((0.45, 0.0), (0.55, 0.8)),), (0.2, 0.2), (0.8, 0.2))
    rm = build(sc, 300, 0.3)
    cache = EdgeCache()
    res = lazy_search(rm, sc, cache, budget=3, step=STEP)
    assert res.status == BUDGET_EXHAUSTED and cache.evaluations == 3
    state = LazySearch(rm, sc, EdgeCache(), STEP)
    assert state.search(budget=0).status == BUDGET_EXHAUSTED
    assert state.search().solved


def test_blocked_wall_forces_detour():
    sc = Scenario(2, (HyperRect((0.45, 0.0), (0.55, 0.8)),), (0.2, 0.2), (0.8, 0.2))
    rm = build(sc, 300, math.sqrt(2))
    res = lazy_search(rm, sc, EdgeCache(), step=STEP)
    assert res.solved and res.cost > 0.6
    assert res.cost == pytest.approx(graph_distance_oracle(rm, sc, STEP), rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(seed=st.integers(0, 10**6), r=st.floats(0.1, 1.5))
def test_eager_astar_matches_oracle(seed, r):
    sc = random_scenario(seed, k=15)
    rm = build(sc, 200, r)
    cache = EdgeCache()
    res = eager_astar(rm, sc, STEP, cache=cache)
    want = graph_distance_oracle(rm, sc, STEP)
    if math.isinf(want):
        assert res.status == NO_PATH
    else:
        assert res.cost == pytest.approx(want, rel=1e-12)
        check_path(res, rm, cache)
    assert cache.evaluations == len(cache) == res.evaluations


def test_eager_budget():
    sc = random_scenario(1, k=15)
    rm = build(sc, 200, math.sqrt(2))
    res = eager_astar(rm, sc, STEP, budget=50)
    assert res.status == BUDGET_EXHAUSTED and res.evaluations == 50


def test_lazy_evaluates_far_fewer_edges_than_eager():
    sc = random_scenario(5, k=15)
    rm = build(sc, 300, math.sqrt(2))
    lazy = lazy_search(rm, sc, EdgeCache(), step=STEP)
    eager = eager_astar(rm, sc, STEP)
    assert lazy.cost == pytest.approx(eager.cost, rel=1e-12)
    assert lazy.evaluations < eager.evaluations


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        LazySearch(build(empty_scenario(2), 10, 0.5), empty_scenario(3), EdgeCache(), STEP)


def test_interpreted_kernels_agree(tmp_path):
    # the same search with compilation switched off, in a fresh interpreter
    import json
    import os
    import subprocess
    import sys

    code = (
        "import json, sys; sys.path.insert(0, %r)\n"
        "from helpers import random_scenario\n"
        "from densify.bench import RunConfig, run_strategy\n"
        "out = {}\n"
        "for s in ('vertex', 'edge', 'hybrid', 'naive'):\n"
        "    p = run_strategy(RunConfig(s, 150, 2, scenario=random_scenario(4, k=15)))\n"
        "    out[s] = [p.final_cost, p.totals['evaluations'], p.path]\n"
        "print(json.dumps(out))\n" % os.path.dirname(__file__)
    )
    runs = []
    for flag in ("1", "0"):
        env = dict(os.environ, NUMBA_DISABLE_JIT=flag)
        proc = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
        runs.append(json.loads(proc.stdout))
    assert runs[0] == runs[1]
