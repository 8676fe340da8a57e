"""Forward simulation vs the backward path oracle.

The mass sitting at a vertex at time T can be computed two ways: by replaying
every clock hit forward from time 0, or by summing weighted backward paths
that jump into the vertex at the hits of its neighbors.  Both walk the same
frozen clock field, so they must agree to floating-point accuracy.
"""

import numpy as np

from meteor.dynamics import MassState, mass_via_paths, simulate
from meteor.events import rng_stream, sample_event_log
from meteor.graph import build_cycle

k = 9
horizon = 5.0
g = build_cycle(k)
log = sample_event_log(g, horizon, seed=2024)
rng = rng_stream(2024, 2)
state0 = MassState(rng.random(k) * 2)

end = simulate(g, state0, log, horizon)
print(f"C_{k}, horizon {horizon}, {log.total_events} events")
print(f"{'vertex':>6} {'forward':>12} {'oracle':>12} {'gap':>10}")
worst = 0.0
for x in range(k):
    oracle = mass_via_paths(g, state0, log, x, horizon)
    gap = abs(oracle - end.masses[x])
    worst = max(worst, gap)
    print(f"{x:>6} {end.masses[x]:>12.8f} {oracle:>12.8f} {gap:>10.2e}")

print(f"\ntotal mass: start {state0.total:.8f}, end {end.total:.8f}")
print(f"worst gap {worst:.2e}")
assert worst < 1e-9
