"""Stationary moments of the mass field on a cycle and a torus.

After burn-in the field reaches its unique stationary law.  With unit density
the closed-form targets are: mean 1, variance 1, covariance -1/(2d) across
each edge, zero at distance two, and box-sum variance n^(d-1) for an n^d box.
Replica batch means give honest confidence intervals.
"""

from meteor.graph import build_cycle, build_torus
from meteor.stats import moment_report, stationary_sample

for g, d, boxes in [(build_cycle(200), 1, ()), (build_torus(16, 2), 2, (2, 4))]:
    reps = [
        stationary_sample(g, burn_in_events=200 * g.n, n_samples=100, gap_events=5 * g.n, seed=10 + r)
        for r in range(16)
    ]
    report = moment_report(reps, g, d, box_sizes=boxes)
    print(f"\n{g.topology} side={g.side} dim={d} (16 replicas x 100 samples)")
    for row in report.rows:
        target = row["target"]
        shown = f"{target:+.4f}" if target == target else "      "
        print(f"  {row['name']:16s} {row['estimate']:+.4f} +- {row['ci']:.4f}   target {shown}")
