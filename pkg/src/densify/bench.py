"""Experiment harness: planner runs, anytime profiles and the comparisons.

A run walks one densification schedule over a single Halton roadmap,
keeping one lazy search alive across batches, one collision cache and
one informed-set filter. Cost is measured in collision-detector calls;
wall time is recorded alongside but never used for pass/fail decisions.
"""

from __future__ import annotations

import csv
import io
import json
import math
import statistics
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cspace import EdgeCache, Scenario, empty_scenario, generate_scenario
from .informed import PRUNE_THRESHOLD, InformedFilter
from .roadmap import Roadmap, graph_distance_oracle
from .search import BUDGET_EXHAUSTED, NO_PATH, SOLVED, LazySearch, eager_astar
from .strategy import EDGE, STRATEGIES, initial_radius, make_schedule

NAIVE = "naive"
RUN_STRATEGIES = STRATEGIES + (NAIVE,)

# (d, difficulty) -> (obstacle count, obstacle fraction)
SCENARIO_CLASSES = {
    (2, "easy"): (100, 0.33),
    (2, "hard"): (1000, 0.75),
    (4, "easy"): (500, 0.33),
    (4, "hard"): (3000, 0.75),
}

OPTIMAL_RTOL = 1e-9


def fmt(x) -> str:
    """Nine significant digits, the precision of every numeric output."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x)).lower()
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.9g}"


def _round(obj):
    """Recursively round floats to nine significant digits for JSON output."""
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if not math.isfinite(x):
            return None
        return float(f"{x:.9g}")
    return obj


@dataclass
class RunConfig:
    strategy: str
    n: int
    d: int
    scenario: Scenario | None = None
    scenario_path: str | None = None
    seed: int | None = None
    budget: int | None = None
    prune_threshold: float = PRUNE_THRESHOLD
    step_factor: float = 0.5
    prune: bool = True
    log_checks: bool = False
    stop_at_first: bool = False
    # stop as soon as the incumbent is within OPTIMAL_RTOL of this cost
    target_cost: float | None = None

    def __post_init__(self):
        if self.strategy not in RUN_STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}; expected one of {RUN_STRATEGIES}")
        if self.n < 2:
            raise ValueError("n must be at least 2 (start and goal)")
        if self.d < 1:
            raise ValueError("d must be positive")
        if self.budget is not None and self.budget < 0:
            raise ValueError("budget must be non-negative")
        if self.prune_threshold < 0 or self.step_factor <= 0:
            raise ValueError("prune threshold must be >= 0 and step factor > 0")
        if self.scenario is None:
            if self.scenario_path is not None:
                self.scenario = Scenario.load(self.scenario_path)
            else:
                self.scenario = empty_scenario(self.d)
        if self.scenario.dimension != self.d:
            raise ValueError(f"scenario is {self.scenario.dimension}-dimensional, config says d={self.d}")

    @property
    def step(self) -> float:
        """Collision-check resolution, shared by every strategy at this n."""
        return self.step_factor * min(initial_radius(self.n, self.d), math.sqrt(self.d))

    def to_dict(self) -> dict:
        out = {
            "strategy": self.strategy,
            "n": self.n,
            "d": self.d,
            "seed": self.seed,
            "budget": self.budget,
            "prune_threshold": self.prune_threshold,
            "step_factor": self.step_factor,
            "prune": self.prune,
        }
        if self.scenario_path is not None:
            out["scenario"] = str(self.scenario_path)
        return out


@dataclass
class Event:
    evals: int
    seconds: float
    cost: float
    batch: int


@dataclass
class AnytimeProfile:
    config: RunConfig
    events: list[Event] = field(default_factory=list)
    status: str = NO_PATH
    totals: dict = field(default_factory=dict)
    path: list[int] = field(default_factory=list)
    batches: list[dict] = field(default_factory=list)
    checks: list[tuple[int, int, bool]] | None = None

    @property
    def final_cost(self) -> float:
        return self.events[-1].cost if self.events else math.inf

    @property
    def evals_first(self) -> int | None:
        return self.events[0].evals if self.events else None

    def evals_to(self, cost: float, rtol: float = OPTIMAL_RTOL) -> int | None:
        """Evaluations spent when the incumbent first came within ``rtol`` of ``cost``."""
        for e in self.events:
            if e.cost <= cost * (1 + rtol):
                return e.evals
        return None

    def to_dict(self) -> dict:
        out = {
            "config": self.config.to_dict(),
            "status": self.status,
            "events": [{"evals": e.evals, "seconds": e.seconds, "cost": e.cost} for e in self.events],
            "totals": dict(self.totals),
        }
        if self.path:
            out["path"] = list(self.path)
        if self.checks is not None:
            out["checks"] = [[u, v, bool(f)] for u, v, f in self.checks]
        return _round(out)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def save(self, path) -> None:
        Path(path).write_text(self.to_json() + "\n")


def _record(profile: AnytimeProfile, cache: EdgeCache, t0: float, cost: float, path, batch: int) -> bool:
    if profile.events and cost >= profile.events[-1].cost:
        return False
    profile.events.append(Event(cache.evaluations, time.perf_counter() - t0, cost, batch))
    profile.path = list(path)
    return True


def _batch_record(count, r, res, cache, t0) -> dict:
    return {"n": count, "r": r, "status": res.status, "cost": res.cost,
            "evals": cache.evaluations, "seconds": time.perf_counter() - t0}


def run_strategy(config: RunConfig, on_batch=None) -> AnytimeProfile:
    """Run one planner configuration and return its anytime profile.

    ``on_batch`` is called with each batch record as it completes.
    """
    scenario = config.scenario
    roadmap = Roadmap.from_query(scenario.start, scenario.goal, config.n)
    cache = EdgeCache()
    profile = AnytimeProfile(config)
    t0 = time.perf_counter()

    # vertices in collision can carry no edge; drop them up front for every strategy
    invalid = ~scenario.points_free(roadmap.points)
    invalid[:2] = False
    roadmap.enabled[invalid] = False
    totals = {"invalid_vertices": int(invalid.sum())}

    if config.strategy == NAIVE:
        roadmap.extend(config.n, math.sqrt(config.d))
        res = eager_astar(roadmap, scenario, config.step, budget=config.budget, cache=cache)
        if res.solved:
            _record(profile, cache, t0, res.cost, res.path, 0)
        profile.batches.append(_batch_record(config.n, roadmap.radius, res, cache, t0))
        profile.status = SOLVED if profile.events else res.status
        totals.update(evaluations=cache.evaluations, cache_hits=cache.hits, pruned=0, rejected=0,
                      edges_considered=res.edges_considered, batches=1)
        profile.totals = totals
        if config.log_checks:
            profile.checks = [(u, v, f) for (u, v), f in cache.verdicts.items()]
        return profile

    schedule = make_schedule(config.strategy, config.n, config.d)
    informed = InformedFilter(roadmap, config.prune_threshold, enabled=config.prune)
    search = None
    status = NO_PATH
    batches = 0
    for i, (count, r) in enumerate(schedule):
        delta = roadmap.extend(count, r)
        fresh = delta.new_vertices[roadmap.enabled[delta.new_vertices]]
        fresh = np.setdiff1d(fresh, informed.reject(fresh), assume_unique=True)
        if search is None:
            search = LazySearch(roadmap, scenario, cache, config.step)
        else:
            search.resume(delta, fresh)
        batches += 1
        res = search.search(config.budget)
        profile.batches.append(_batch_record(count, r, res, cache, t0))
        if on_batch is not None:
            on_batch(profile.batches[-1])
        if res.status == BUDGET_EXHAUSTED:
            status = BUDGET_EXHAUSTED
            break
        if res.solved:
            status = SOLVED
            if _record(profile, cache, t0, res.cost, res.path, i):
                search.prune(informed.update(res.cost))
            if config.stop_at_first:
                break
            if config.target_cost is not None and res.cost <= config.target_cost * (1 + OPTIMAL_RTOL):
                break
    profile.status = SOLVED if profile.events else status
    totals.update(
        evaluations=cache.evaluations,
        cache_hits=cache.hits,
        pruned=informed.pruned,
        rejected=informed.rejected,
        edges_considered=search.edges_considered if search else 0,
        batches=batches,
    )
    profile.totals = totals
    if config.log_checks:
        profile.checks = [(u, v, f) for (u, v), f in cache.verdicts.items()]
    return profile


def oracle_cost(scenario: Scenario, n: int, step: float | None = None) -> float:
    """Shortest collision-free path cost in the complete graph on n samples."""
    d = scenario.dimension
    roadmap = Roadmap.from_query(scenario.start, scenario.goal, n)
    roadmap.extend(n, math.sqrt(d))
    if step is None:
        step = 0.5 * min(initial_radius(n, d), math.sqrt(d))
    return graph_distance_oracle(roadmap, scenario, step)


def scenario_for(d: int, difficulty: str, seed: int) -> Scenario:
    try:
        count, zeta = SCENARIO_CLASSES[(d, difficulty)]
    except KeyError:
        raise ValueError(f"no scenario class for d={d}, difficulty={difficulty!r}") from None
    return generate_scenario(d, count, zeta, seed, connected=True)


# -- scaling -----------------------------------------------------------------


@dataclass
class ScalingResult:
    slope: float
    intercept: float
    ns: list[int]
    totals: list[float]  # mean per n
    samples: dict = field(default_factory=dict)  # n -> per-trial totals


def fit_loglog(xs, ys) -> tuple[float, float]:
    slope, intercept = np.polyfit(np.log(np.asarray(xs, float)), np.log(np.asarray(ys, float)), 1)
    return float(slope), float(intercept)


def random_queries(d: int, trials: int, seed: int = 0, margin: float = 0.05, min_gap: float = 0.5):
    """Start/goal pairs at least ``min_gap`` apart, drawn reproducibly."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < trials:
        a, b = rng.uniform(margin, 1 - margin, size=(2, d))
        if np.linalg.norm(a - b) >= min_gap:
            out.append((a, b))
    return out


def scaling_experiment(d: int, ns, trials: int = 5, *, prune: bool = True, seed: int = 0,
                       metric: str = "evaluations", strategy: str = EDGE) -> ScalingResult:
    """Total search effort against n on obstacle-free problems, with its log-log slope."""
    ns = sorted(int(x) for x in ns)
    if len(set(ns)) < 3:
        raise ValueError("need at least 3 distinct values of n to fit a slope")
    if metric not in ("evaluations", "edges_considered"):
        raise ValueError("metric must be 'evaluations' or 'edges_considered'")
    queries = random_queries(d, trials, seed)
    samples = {}
    for n in ns:
        per = []
        for a, b in queries:
            sc = empty_scenario(d, a, b)
            prof = run_strategy(RunConfig(strategy, n, d, scenario=sc, prune=prune))
            per.append(prof.totals[metric])
        samples[n] = per
    means = [float(np.mean(samples[n])) for n in ns]
    slope, intercept = fit_loglog(ns, means)
    return ScalingResult(slope, intercept, ns, means, samples)


# -- comparisons ---------------------------------------------------------------


@dataclass
class ComparisonRow:
    strategy: str
    scenario_id: int
    evals_first: int | None
    evals_opt: int | None
    final_cost: float
    gamma_star: float
    total_evals: int
    status: str


@dataclass
class ComparisonTable:
    d: int
    difficulty: str
    n: int
    rows: list[ComparisonRow]

    def by_strategy(self, strategy: str) -> list[ComparisonRow]:
        return [r for r in self.rows if r.strategy == strategy]

    def median(self, strategy: str, column: str) -> float:
        vals = [getattr(r, column) for r in self.by_strategy(strategy)]
        vals = [math.inf if v is None else v for v in vals]
        return float(statistics.median(vals)) if vals else math.nan

    def summary(self) -> dict[str, dict[str, float]]:
        names = sorted({r.strategy for r in self.rows}, key=RUN_STRATEGIES.index)
        return {
            s: {
                "evals_first": self.median(s, "evals_first"),
                "evals_opt": self.median(s, "evals_opt"),
                "total_evals": self.median(s, "total_evals"),
            }
            for s in names
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["strategy", "scenario_id", "evals_first", "evals_opt", "final_cost", "gamma_star"])
        for r in self.rows:
            w.writerow([
                r.strategy,
                r.scenario_id,
                "" if r.evals_first is None else r.evals_first,
                "" if r.evals_opt is None else r.evals_opt,
                fmt(r.final_cost),
                fmt(r.gamma_star),
            ])
        return buf.getvalue()


def comparative_experiment(d: int, difficulty: str, trials: int, *, n: int = 10_000, seed: int = 0,
                           strategies=RUN_STRATEGIES, to_optimal: bool = True,
                           progress=None) -> ComparisonTable:
    """Run every strategy on ``trials`` random scenarios of one class.

    With ``to_optimal`` the naive baseline runs first; its cost is the
    optimum ``gamma_star`` of the complete graph, and every other strategy
    stops as soon as it reaches that cost (without naive in the list, they
    run to completion and ``gamma_star`` is the best cost found). With
    ``to_optimal=False`` each strategy stops at its first solution, which
    is all a first-solution comparison needs.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rows = []
    for k in range(trials):
        sc_seed = seed + k
        scenario = scenario_for(d, difficulty, sc_seed)
        profiles = {}
        target = None
        if NAIVE in strategies and to_optimal:
            profiles[NAIVE] = run_strategy(RunConfig(NAIVE, n, d, scenario=scenario, seed=sc_seed))
            target = profiles[NAIVE].final_cost
        for s in strategies:
            if s in profiles:
                continue
            cfg = RunConfig(s, n, d, scenario=scenario, seed=sc_seed, stop_at_first=not to_optimal,
                            target_cost=target if target is not None and math.isfinite(target) else None)
            profiles[s] = run_strategy(cfg)
        gamma = min((p.final_cost for p in profiles.values()), default=math.inf) if to_optimal else math.nan
        for s in strategies:
            p = profiles[s]
            rows.append(ComparisonRow(
                s, sc_seed, p.evals_first, p.evals_to(gamma) if math.isfinite(gamma) else None,
                p.final_cost, gamma, p.totals["evaluations"], p.status,
            ))
            if progress is not None:
                progress(rows[-1])
    return ComparisonTable(d, difficulty, n, rows)
