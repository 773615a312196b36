"""Command-line front end.

Exit codes: 0 success (or a solved plan), 1 usage or input error,
2 plan found no path, 3 plan ran out of evaluation budget.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from . import bench, strategy
from .cspace import Scenario, ScenarioGenerationError, generate_scenario
from .roadmap import Roadmap
from .sampling import dispersion_bound
from .search import BUDGET_EXHAUSTED, NO_PATH, SOLVED

EXIT_OK, EXIT_ERROR, EXIT_NO_PATH, EXIT_BUDGET = 0, 1, 2, 3
_STATUS_EXIT = {SOLVED: EXIT_OK, NO_PATH: EXIT_NO_PATH, BUDGET_EXHAUSTED: EXIT_BUDGET}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which would read as "no path"
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _seed(args) -> int | None:
    env = os.environ.get("DENSIFY_SEED")
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"DENSIFY_SEED must be an integer, got {env!r}") from None
    return args.seed


def _point(text: str | None, d: int):
    if text is None:
        return None
    vals = [float(x) for x in text.split(",")]
    if len(vals) != d:
        raise UsageError(f"expected {d} comma-separated coordinates, got {text!r}")
    return vals


def _load_scenario(path) -> Scenario:
    try:
        return Scenario.load(path)
    except FileNotFoundError:
        raise UsageError(f"scenario file not found: {path}") from None
    except ValueError as exc:
        raise UsageError(f"malformed scenario file {path}: {exc}") from None


def _write(text: str, out) -> None:
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text)


# -- subcommands ---------------------------------------------------------------


def cmd_gen_scenario(args) -> int:
    seed = _seed(args)
    if seed is None:
        seed = 0
    sc = generate_scenario(
        args.d, args.obstacles, args.zeta, seed,
        _point(args.start, args.d), _point(args.goal, args.d),
        connected=args.connected,
    )
    text = json.dumps(bench._round(sc.to_dict()), indent=2) + "\n"
    _write(text, args.out)
    if args.out not in (None, "-"):
        print(f"wrote {args.out}: d={sc.dimension}, {len(sc.obstacles)} obstacles, seed {seed}")
    return EXIT_OK


def cmd_plan(args) -> int:
    sc = _load_scenario(args.scenario)
    try:
        config = bench.RunConfig(
            args.strategy, args.n, sc.dimension, scenario=sc, scenario_path=args.scenario,
            seed=_seed(args), budget=args.budget, prune_threshold=args.prune_threshold,
            step_factor=args.step_factor, prune=not args.no_prune, log_checks=args.log_checks,
        )
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    profile = bench.run_strategy(config)
    if args.out:
        profile.save(args.out)
    print(f"{'evals':>10} {'seconds':>10} {'cost':>12}")
    for e in profile.events:
        print(f"{e.evals:>10} {e.seconds:>10.3f} {bench.fmt(e.cost):>12}")
    t = profile.totals
    print(f"status {profile.status}; {t['evaluations']} evaluations, {t['cache_hits']} cache hits, "
          f"{t['pruned']} pruned, {t['rejected']} rejected")
    return _STATUS_EXIT[profile.status]


def cmd_simulate_bounds(args) -> int:
    n, d = args.n, args.d
    if n < 1 or d < 1:
        raise UsageError("n and d must be positive")
    disp = dispersion_bound(n, d).value
    if args.delta is not None and args.delta_dispersion is not None:
        raise UsageError("give at most one of --delta and --delta-dispersion")
    if args.delta is not None:
        delta = args.delta
    elif args.delta_dispersion is not None:
        delta = args.delta_dispersion * disp
    else:
        delta = math.sqrt(d) / 2
    if delta <= 2 * disp:
        print(f"warning: clearance {delta:.9g} is not above twice the dispersion bound {disp:.9g}; "
              "all batches are unbounded", file=sys.stderr)
    rows = {
        s: strategy.simulate_effort_quality(strategy.make_schedule(s, n, d), n, d, delta)
        for s in strategy.STRATEGIES
    }
    _write(strategy.effort_csv(rows), args.out)
    return EXIT_OK


def cmd_scaling(args) -> int:
    res = bench.scaling_experiment(
        args.d, args.n, args.trials, prune=not args.no_prune, seed=_seed(args) or 0, metric=args.metric
    )
    print(f"{'n':>8} {args.metric:>18}")
    for n, tot in zip(res.ns, res.totals):
        print(f"{n:>8} {bench.fmt(tot):>18}")
    print(f"slope {bench.fmt(res.slope)} (worst-case exponent {bench.fmt(1 + 1 / args.d)})")
    return EXIT_OK


def cmd_compare(args) -> int:
    def progress(row):
        print(f"  scenario {row.scenario_id} {row.strategy:>7}: first {row.evals_first}, "
              f"optimal {row.evals_opt}, cost {bench.fmt(row.final_cost)}", file=sys.stderr)

    strategies = strategy.STRATEGIES if args.first_only else bench.RUN_STRATEGIES
    table = bench.comparative_experiment(
        args.d, args.difficulty, args.trials, n=args.n, seed=_seed(args) or 0, strategies=strategies,
        to_optimal=not args.first_only, progress=progress if args.verbose else None,
    )
    _write(table.to_csv(), args.out)
    print(f"{'strategy':>8} {'median first':>14} {'median optimal':>16}", file=sys.stderr)
    for s, med in table.summary().items():
        print(f"{s:>8} {bench.fmt(med['evals_first']):>14} {bench.fmt(med['evals_opt']):>16}", file=sys.stderr)
    return EXIT_OK


def render_svg(scenario: Scenario, points=None, checks=(), path=(), size: int = 512) -> str:
    """Deterministic SVG of a 2-D scenario, checked edges and a path."""
    if scenario.dimension != 2:
        raise UsageError("render supports d=2 only")

    def xy(p):
        return bench.fmt(p[0] * size), bench.fmt((1 - p[1]) * size)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" '
        f'viewBox="0 0 {size} {size}">',
        f'<rect x="0" y="0" width="{size}" height="{size}" fill="white" stroke="black"/>',
        '<g id="obstacles" fill="#555555">',
    ]
    for box in scenario.obstacles:
        x, y = xy((box.lo[0], box.hi[1]))
        w = bench.fmt((box.hi[0] - box.lo[0]) * size)
        h = bench.fmt((box.hi[1] - box.lo[1]) * size)
        out.append(f'<rect x="{x}" y="{y}" width="{w}" height="{h}"/>')
    out.append("</g>")
    for name, colour, want in (("free-edges", "#2a9d8f", True), ("blocked-edges", "#e63946", False)):
        out.append(f'<g id="{name}" stroke="{colour}" stroke-width="0.6">')
        for u, v, free in checks:
            if bool(free) == want:
                (x1, y1), (x2, y2) = xy(points[u]), xy(points[v])
                out.append(f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}"/>')
        out.append("</g>")
    if len(path):
        coords = " ".join(",".join(xy(points[v])) for v in path)
        out.append(f'<polyline id="path" points="{coords}" fill="none" stroke="#1d3557" stroke-width="2.5"/>')
    for label, p, colour in (("start", scenario.start, "#2b9348"), ("goal", scenario.goal, "#d00000")):
        x, y = xy(p)
        out.append(f'<circle id="{label}" cx="{x}" cy="{y}" r="5" fill="{colour}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def cmd_render(args) -> int:
    sc = _load_scenario(args.scenario)
    if sc.dimension != 2:
        raise UsageError("render supports d=2 only")
    points, checks, path = None, (), ()
    if args.profile:
        try:
            prof = json.loads(Path(args.profile).read_text())
            n = int(prof["config"]["n"])
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"unreadable profile {args.profile}: {exc}") from None
        points = Roadmap.from_query(sc.start, sc.goal, n).points
        checks = [tuple(c) for c in prof.get("checks", [])]
        path = prof.get("path", [])
    _write(render_svg(sc, points, checks, path), args.out)
    return EXIT_OK


# -- parser --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="densify", description="Anytime planning over densified Halton roadmaps.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen-scenario", help="generate a random box scenario")
    g.add_argument("--d", type=int, required=True)
    g.add_argument("--obstacles", type=int, required=True)
    g.add_argument("--zeta", type=float, required=True, help="target obstacle volume fraction")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--start", help="comma-separated coordinates (default 0.25 each)")
    g.add_argument("--goal", help="comma-separated coordinates (default 0.75 each)")
    g.add_argument("--connected", action="store_true", help="keep a start-goal corridor open")
    g.add_argument("--out", help="output JSON (default stdout)")
    g.set_defaults(func=cmd_gen_scenario)

    pl = sub.add_parser("plan", help="run one strategy on a scenario")
    pl.add_argument("--scenario", required=True)
    pl.add_argument("--strategy", required=True, help="vertex, edge, hybrid or naive")
    pl.add_argument("--n", type=int, required=True)
    pl.add_argument("--out", help="profile JSON path")
    pl.add_argument("--budget", type=int, help="cap on collision-detector calls")
    pl.add_argument("--seed", type=int)
    pl.add_argument("--prune-threshold", type=float, default=0.01)
    pl.add_argument("--step-factor", type=float, default=0.5)
    pl.add_argument("--no-prune", action="store_true")
    pl.add_argument("--log-checks", action="store_true", help="store every evaluated edge (for render)")
    pl.set_defaults(func=cmd_plan)

    s = sub.add_parser("simulate-bounds", help="worst-case work against the quality bound")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, default=4)
    s.add_argument("--delta", type=float, help="clearance of the optimal path (default sqrt(d)/2)")
    s.add_argument("--delta-dispersion", type=float, help="clearance as a multiple of the dispersion bound")
    s.add_argument("--out", help="CSV path (default stdout)")
    s.set_defaults(func=cmd_simulate_bounds)

    sc = sub.add_parser("scaling", help="fit the evaluation-count exponent on empty scenarios")
    sc.add_argument("--d", type=int, default=2)
    sc.add_argument("--n", type=int, nargs="+", default=[1000, 4000, 16000])
    sc.add_argument("--trials", type=int, default=5)
    sc.add_argument("--seed", type=int, default=0)
    sc.add_argument("--no-prune", action="store_true")
    sc.add_argument("--metric", choices=["evaluations", "edges_considered"], default="evaluations")
    sc.set_defaults(func=cmd_scaling)

    c = sub.add_parser("compare", help="run all strategies on random scenarios of one class")
    c.add_argument("--d", type=int, default=2)
    c.add_argument("--difficulty", choices=["easy", "hard"], required=True)
    c.add_argument("--trials", type=int, default=10)
    c.add_argument("--n", type=int, default=10_000)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out", help="aggregate CSV path (default stdout)")
    c.add_argument("--first-only", action="store_true",
                   help="stop each run at its first solution and skip the naive baseline")
    c.add_argument("--verbose", action="store_true")
    c.set_defaults(func=cmd_compare)

    r = sub.add_parser("render", help="SVG of a 2-D scenario and, optionally, a logged run")
    r.add_argument("--scenario", required=True)
    r.add_argument("--profile", help="profile JSON written by plan --log-checks")
    r.add_argument("--out", help="SVG path (default stdout)")
    r.set_defaults(func=cmd_render)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"densify: error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (ValueError, OSError, ScenarioGenerationError) as exc:
        print(f"densify: error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
