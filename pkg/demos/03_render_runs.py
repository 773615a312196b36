"""SVG snapshots of where each strategy spends its collision checks.

Writes one SVG per strategy into the current directory: obstacles in
grey, free checked edges in teal, blocked ones in red and the final
path in dark blue.
"""

from pathlib import Path

from densify.bench import RunConfig, run_strategy, scenario_for
from densify.cli import render_svg
from densify.roadmap import Roadmap
from densify.strategy import STRATEGIES

n = 2000
sc = scenario_for(2, "easy", seed=3)
points = Roadmap.from_query(sc.start, sc.goal, n).points

for s in STRATEGIES:
    prof = run_strategy(RunConfig(s, n, 2, scenario=sc, log_checks=True))
    out = Path(f"render_{s}.svg")
    out.write_text(render_svg(sc, points, prof.checks, prof.path))
    free = sum(1 for *_, f in prof.checks if f)
    print(f"{s:>7}: cost {prof.final_cost:.6f}, {len(prof.checks)} checks ({free} free) -> {out}")
