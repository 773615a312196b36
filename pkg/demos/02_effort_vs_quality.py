"""Worst-case work against the guaranteed quality bound.

For every batch of a schedule the simulation adds the worst-case number
of edges of that batch's graph and evaluates the bound
1 + 2D/(r - 2D), where D is the dispersion bound of the batch and r the
radius (capped by the clearance of the optimal path). The easy problem
has clearance sqrt(d)/2, the hard one five times the dispersion bound.
"""

import math

from densify.sampling import dispersion_bound
from densify.strategy import STRATEGIES, effort_to_reach, make_schedule, simulate_effort_quality

n, d = 10**6, 4
disp = dispersion_bound(n, d).value
print(f"n = {n}, d = {d}, dispersion bound D_n = {disp:.4f}")

for label, clearance in (("easy", math.sqrt(d) / 2), ("hard", 5 * disp)):
    print(f"\n== {label}: clearance {clearance:.4f}")
    curves = {s: simulate_effort_quality(make_schedule(s, n, d), n, d, clearance) for s in STRATEGIES}
    for s, pts in curves.items():
        bounded = [p for p in pts if p.bound_factor is not None]
        best = min((p.bound_factor for p in bounded), default=None)
        first = bounded[0] if bounded else None
        print(f"{s:>7}: {len(pts)} batches, first bounded batch "
              f"{'-' if first is None else first.batch_index}, best factor "
              f"{'unbounded' if best is None else f'{best:.4f}'}, total work {pts[-1].cumulative_edges:.3e}")

    # effort needed to certify a few quality levels
    print(f"{'factor':>8}" + "".join(f"{s:>14}" for s in STRATEGIES))
    for factor in (3.0, 2.5, 2.0, 1.8, 1.5):
        row = [effort_to_reach(curves[s], factor) for s in STRATEGIES]
        print(f"{factor:>8}" + "".join(f"{'never' if x is None else f'{x:.3e}':>14}" for x in row))

# The bound depends on D_n / r. At n = 10^6 in four dimensions the
# Halton dispersion bound is still large (about 0.22): the easy clearance
# caps the factor at about 1.79, and a clearance of 5 D_n always gives
# 1 + 2/3, whatever n is. No schedule certifies 1.5 here, and the "hard"
# clearance (about 1.11) is actually the larger of the two.
