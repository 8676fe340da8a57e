"""Forward evolution of the mass field, the exact path oracle, zero-set checks.

The forward simulator replays an EventLog in merged order.  The backward
oracle recomputes a single vertex's mass at a single time by summing over all
admissible backward paths through the same log; agreement of the two is the
core correctness check of the whole artifact.
"""

from __future__ import annotations

import bisect
import sys
from dataclasses import dataclass

import numpy as np

from .events import EventLog, merged_events
from .graph import Graph


class DynamicsError(ValueError):
    pass


class BudgetExceeded(RuntimeError):
    """Backward-cone recursion grew past the configured state budget."""


@dataclass
class MassState:
    """Nonnegative mass per vertex at a given time.  Single-owner mutable."""

    masses: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        self.masses = np.asarray(self.masses, dtype=float)
        if np.any(self.masses < 0):
            raise DynamicsError("masses must be nonnegative")

    @property
    def total(self) -> float:
        return float(self.masses.sum())

    def copy(self) -> "MassState":
        return MassState(self.masses.copy(), self.time)


def flat_state(g: Graph, mass: float = 1.0) -> MassState:
    return MassState(np.full(g.n, float(mass)))


def hit(state: MassState, v: int, g: Graph) -> MassState:
    """Pure hit map: mass at v is split equally among neighbors and zeroed."""
    out = state.copy()
    m = out.masses[v]
    if m > 0.0:
        out.masses[v] = 0.0
        out.masses[g.neighbors(v)] += m / g.degree(v)
    return out


DRIFT_CHECK_EVERY = 10**6
DRIFT_RTOL = 1e-9


def simulate(g: Graph, state0: MassState, log: EventLog, t_end: float) -> MassState:
    """Replay all events with time <= t_end in merged order.

    A drift monitor recomputes the total mass every 10^6 events and raises if
    the relative drift exceeds 1e-9.
    """
    if t_end > log.horizon:
        raise DynamicsError(f"t_end={t_end} exceeds log horizon {log.horizon}")
    if log.n != g.n:
        raise DynamicsError("log and graph sizes differ")
    masses = np.asarray(state0.masses, dtype=float).copy()
    total0 = masses.sum()
    t, v = merged_events(log)
    stop = np.searchsorted(t, t_end, side="right")
    for i in range(stop):
        u = v[i]
        m = masses[u]
        if m > 0.0:
            masses[u] = 0.0
            masses[g.neighbors(u)] += m / g.degrees[u]
        if (i + 1) % DRIFT_CHECK_EVERY == 0:
            drift = abs(masses.sum() - total0) / max(total0, 1.0)
            if drift > DRIFT_RTOL:
                raise DynamicsError(f"mass drift {drift:.3e} exceeds {DRIFT_RTOL}")
    if total0 > 0:
        drift = abs(masses.sum() - total0) / total0
        if drift > DRIFT_RTOL:
            raise DynamicsError(f"mass drift {drift:.3e} exceeds {DRIFT_RTOL}")
    return MassState(masses, float(t_end))


def mass_via_paths(
    g: Graph,
    state0: MassState,
    log: EventLog,
    x: int,
    T: float,
    budget: int = 10**7,
) -> float:
    """Exact mass at (x, T) as a weighted sum over admissible backward paths.

    A path occupying v on an interval may not contain a hit of v in its
    interior (the hit would have swept the mass away), so working backward
    from (x, T) the occupation interval extends to v's last hit before its
    endpoint.  The path either started at v at time 0 (contributing M^v_0) or
    jumped in from a neighbor w at a hit of w inside the interval, with
    weight 1/d_w.  Computed by memoized recursion on (vertex, global event
    index) rather than literal path enumeration.
    """
    if T > log.horizon:
        raise DynamicsError(f"T={T} exceeds log horizon {log.horizon}")
    t_all, v_all = merged_events(log)
    stop = int(np.searchsorted(t_all, T, side="right"))
    # per-vertex sorted lists of global event indices below the cutoff
    by_vertex: list[list[int]] = [[] for _ in range(g.n)]
    for i in range(stop):
        by_vertex[int(v_all[i])].append(i)

    memo: dict[tuple[int, int], float] = {}

    sys.setrecursionlimit(max(sys.getrecursionlimit(), 4 * stop + 1000))

    def f(v: int, j: int) -> float:
        # mass carried by backward paths whose occupation of v ends just
        # before global event j (j = stop means "ends at time T")
        key = (v, j)
        if key in memo:
            return memo[key]
        if len(memo) >= budget:
            raise BudgetExceeded(f"path oracle exceeded budget of {budget} states")
        ev = by_vertex[v]
        p = bisect.bisect_left(ev, j)
        last = ev[p - 1] if p else -1
        # sitting at v since time 0 is admissible only if v was never hit
        acc = float(state0.masses[v]) if last == -1 else 0.0
        for w in g.neighbors(v):
            w = int(w)
            evw = by_vertex[w]
            dw = g.degree(w)
            lo = bisect.bisect_right(evw, last)
            hi = bisect.bisect_left(evw, j)
            for q in range(lo, hi):
                acc += f(w, evw[q]) / dw
        memo[key] = acc
        return acc

    return f(int(x), stop)


def boundary_cone_clear(
    g: Graph,
    log: EventLog,
    observation_set,
    T: float,
    boundary=None,
) -> bool:
    """True iff no influence can propagate from the boundary layer into
    `observation_set` by time T under this log.

    Influence spreads exactly along event-adjacency: an event at an infected
    vertex infects its neighbors.  This dominates every admissible path, so a
    True result certifies the observation set saw no boundary effect.
    """
    if boundary is None:
        if g.topology == "window":
            deg_max = int(g.degrees.max())
            boundary = {v for v in range(g.n) if g.degree(v) < deg_max}
        else:
            # wrapped topologies have no geometric boundary; use the layer
            # farthest from the observation set (where wrap-around effects
            # would have to originate)
            dist = np.full(g.n, -1, dtype=np.int64)
            queue = [int(v) for v in observation_set]
            for v in queue:
                dist[v] = 0
            head = 0
            while head < len(queue):
                v = queue[head]
                head += 1
                for w in g.neighbors(v):
                    if dist[w] < 0:
                        dist[w] = dist[v] + 1
                        queue.append(int(w))
            boundary = set(np.flatnonzero(dist == dist.max()).tolist())
    infected = set(int(v) for v in boundary)
    obs = set(int(v) for v in observation_set)
    if infected & obs:
        return False
    t_all, v_all = merged_events(log)
    stop = int(np.searchsorted(t_all, T, side="right"))
    for i in range(stop):
        v = int(v_all[i])
        if v in infected:
            for w in g.neighbors(v):
                w = int(w)
                if w not in infected:
                    if w in obs:
                        return False
                    infected.add(w)
    return not (infected & obs)


def zero_set_check(g: Graph, state0: MassState, log: EventLog, t: float) -> bool:
    """Verify the zero-mass characterization at time t for every eligible vertex.

    M^v_t = 0 iff either (a) v's last hit is the most recent hit in its closed
    neighborhood (and someone there was hit), or (b) M^v_0 = 0 and no neighbor
    of v was hit by t.  Only vertices whose neighbors all start with positive
    mass are eligible; others are skipped.
    """
    state = simulate(g, state0, log, t)
    from .events import last_hit_before

    ok = True
    for v in range(g.n):
        nbrs = [int(w) for w in g.neighbors(v)]
        if any(state0.masses[w] <= 0.0 for w in nbrs):
            continue  # hypothesis violated at v; skipped
        tv = last_hit_before(log, v, t)
        t_nbhd = max([tv] + [last_hit_before(log, w, t) for w in nbrs])
        clause_a = tv == t_nbhd and tv > -1.0
        clause_b = state0.masses[v] == 0.0 and all(
            last_hit_before(log, w, t) == -1.0 for w in nbrs
        )
        is_zero = state.masses[v] == 0.0
        if is_zero != (clause_a or clause_b):
            ok = False
    return ok


def zero_pair_count(state: MassState, g: Graph) -> int:
    """Number of ordered adjacent pairs (x, v) with M^x + M^v = 0."""
    count = 0
    for v in range(g.n):
        if state.masses[v] == 0.0:
            for w in g.neighbors(v):
                if state.masses[w] == 0.0:
                    count += 1
    return count


def heat_mean_oracle(g: Graph, state0: MassState, x: int, t: float) -> float:
    """Expected mass at (x, t): the heat semigroup applied to the start state.

    E M^x_t = sum_y p_t(x, y) M^y_0 where p_t is the rate-1 simple random walk
    kernel; evaluated by uniformization (truncated Poisson-weighted powers of
    the one-step kernel) to absolute tolerance 1e-10.
    """
    if t < 0:
        raise DynamicsError("t must be >= 0")
    m = np.asarray(state0.masses, dtype=float)
    if t == 0.0:
        return float(m[x])
    # sum_y p_t(x,y) m_y = (e^{t(P' - I)} m)_x with P' the transpose kernel
    term = np.exp(-t)
    acc = m * term
    w = m
    j = 0
    tail = 1.0 - term
    while tail > 1e-10:
        j += 1
        # w <- Pᵀ w : each vertex receives share from each neighbor
        nw = np.zeros(g.n)
        share = w / g.degrees
        for v in range(g.n):
            nw[v] = share[g.neighbors(v)].sum()
        w = nw
        term *= t / j
        acc += w * term
        tail -= term
        if j > 100 * (t + 10):
            break
    return float(acc[x])
