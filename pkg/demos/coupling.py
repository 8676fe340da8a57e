"""Mirror coupling of two walks on a shared clock field.

Both walks jump at the clock hits of whichever vertex they occupy.  The
second walk's skeleton mirrors the first's coordinate by coordinate until the
gap closes, then runs parallel; a restart re-randomizes the skeletons when a
phase stalls.  After the first exact meeting the walks coincide forever.
"""

import numpy as np

from meteor.events import LazyClockField
from meteor.graph import build_cycle, build_torus, torus_index
from meteor.wimps import mirror_couple

n_seeds = 60
t_end = 500.0

for dim in (1, 2):
    if dim == 1:
        g = build_cycle(1001)
        z0, z1 = 500, 503
    else:
        g = build_torus(201, 2)
        z0 = torus_index((100, 100), 201)
        z1 = z0 + 3
    times = []
    restarts = 0
    for s in range(n_seeds):
        field = LazyClockField(g.n, 300 + s)
        run = mirror_couple(g, z0, z1, field, t_end, seed=300 + s, record=False)
        restarts += run.restarts
        if run.meeting_time is not None:
            times.append(run.meeting_time)
    t = np.array(times)
    print(f"d={dim}: met in {t.size}/{n_seeds} runs by t={t_end}; "
          f"median meeting time {np.median(t):.1f}, {restarts} restarts total")

# one recorded run: verify the trajectories coincide after the meeting
g = build_torus(101, 2)
z0 = torus_index((50, 50), 101)
run = mirror_couple(g, z0, z0 + 2, LazyClockField(g.n, 12), 300.0, seed=12)
print(f"\nrecorded run: meeting at t={run.meeting_time:.2f}, "
      f"max displacements {run.displacement_max[0]:.0f}/{run.displacement_max[1]:.0f}")
ta, tb = run.trajectories
ia = next(i for i, (t, _) in enumerate(ta) if t == run.meeting_time)
ib = next(i for i, (t, _) in enumerate(tb) if t == run.meeting_time)
print(f"post-meeting suffixes equal: {ta[ia:] == tb[ib:]}")
