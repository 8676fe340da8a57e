"""Weakly interacting walks on the shared clock field.

Walks jump exactly at the clock hits of the vertex they occupy, to an
independently chosen uniform neighbor.  Two walks on the same vertex
therefore share their jump times but not their directions.  This module also
houses the exact rational equilibrium check for the triple-walk skeleton
chain and the mirror coupling used for meeting-time experiments.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .events import (
    STREAM_COUPLE,
    STREAM_INIT,
    STREAM_WIMP,
    EventLog,
    next_hit_after_in_log,
    rng_stream,
)
from .graph import Graph, torus_coords, torus_index


class WimpError(ValueError):
    pass


@dataclass
class WimpSystem:
    """Trajectories of j walks driven by one clock source.

    trajectories[i] is the list of (time, vertex) pairs for walk i, starting
    with (0.0, start vertex).
    """

    positions: np.ndarray
    trajectories: list


def sample_initial_positions(state0_masses, n_walks: int, seed: int) -> np.ndarray:
    masses = np.asarray(state0_masses, dtype=float)
    total = masses.sum()
    if total <= 0:
        raise WimpError("total mass must be positive")
    rng = rng_stream(seed, STREAM_INIT)
    return rng.choice(masses.size, size=n_walks, p=masses / total)


def _uniform_neighbor(g: Graph, v: int, seed: int, walk: int, jump: int) -> int:
    # one dedicated stream per (walk, jump) so trajectories are reproducible
    # regardless of evaluation order
    rng = rng_stream(seed, walk, jump, STREAM_WIMP)
    nbrs = g.neighbors(v)
    return int(nbrs[rng.integers(len(nbrs))])


def run_wimps(
    g: Graph,
    state0,
    log: EventLog,
    j: int,
    t: float,
    seed: int,
) -> WimpSystem:
    """Run j walks to time t; starts sampled independently by initial mass."""
    masses = state0.masses if hasattr(state0, "masses") else state0
    if t > log.horizon:
        raise WimpError(f"t={t} exceeds log horizon {log.horizon}")
    starts = sample_initial_positions(masses, j, seed)
    trajectories = []
    finals = np.empty(j, dtype=np.int64)
    for i in range(j):
        v = int(starts[i])
        now = 0.0
        traj = [(0.0, v)]
        jumps = 0
        while True:
            nxt = next_hit_after_in_log(log, v, now)
            if nxt is None or nxt > t:
                break
            v = _uniform_neighbor(g, v, seed, i, jumps)
            now = nxt
            jumps += 1
            traj.append((now, v))
        trajectories.append(traj)
        finals[i] = v
    return WimpSystem(positions=finals, trajectories=trajectories)


def verify_prime_solution(d: int) -> bool:
    """Exact rational check of the five equilibrium identities in dimension d.

    The candidate solution is 1 on the coincidence class, (6d-3)/(8d) on the
    unit-offset class, and 3/4 elsewhere.
    """
    if d < 1:
        raise WimpError("d must be >= 1")
    d = Fraction(d)
    p0 = Fraction(1)
    ph = (6 * d - 3) / (8 * d)
    pa = pb = pg = Fraction(3, 4)
    eqs = [
        p0 == Fraction(1 + 2 * d, 4 * d) * p0 + Fraction(2, 3) * ph,
        ph == Fraction(1, 3 * d) * pb + Fraction(2 * d - 2, 3 * d) * pa + Fraction(1, 3) * ph,
        pa
        == Fraction(1, 4 * d * d) * p0
        + Fraction(2, 3 * d) * ph
        + Fraction(2 * d - 2, 3 * d) * pg
        + Fraction(1, 3) * pa,
        pb
        == Fraction(1, 8 * d * d) * p0
        + Fraction(1, 3 * d) * ph
        + Fraction(2 * d - 1, 3 * d) * pg
        + Fraction(1, 3) * pb,
        pg == Fraction(2, 3) * pg + Fraction(1, 3) * pg,
    ]
    return all(eqs)


def third_moment_crosscheck(samples, seed: int = 0, n_draws: int = 0):
    """Compare two estimators of the third moment on stationary samples.

    lhs: shift-averaged E(M^x)^3.  rhs: k^2 times the probability that three
    walks started independently with law M/k coincide.  With n_draws=0 the
    coincidence probability is evaluated in closed form per sample (sum of
    (M^x/k)^3); with n_draws>0 it is estimated by that many Monte Carlo
    triples per sample, making the two sides genuinely independent
    computations.  Returns (lhs, rhs, relative gap).
    """
    states = [np.asarray(s.masses if hasattr(s, "masses") else s, dtype=float) for s in samples]
    if len(states) < 100:
        raise WimpError(f"need at least 100 samples, got {len(states)}")
    k = states[0].size
    lhs = float(np.mean([np.mean(m**3) for m in states]))
    if n_draws == 0:
        coinc = float(np.mean([np.sum((m / k) ** 3) for m in states]))
    else:
        rng = rng_stream(seed, STREAM_INIT)
        hits = 0
        for m in states:
            z = rng.choice(k, size=(n_draws, 3), p=m / m.sum())
            hits += int(np.sum((z[:, 0] == z[:, 1]) & (z[:, 1] == z[:, 2])))
        coinc = hits / (n_draws * len(states))
    rhs = k**2 * coinc
    gap = abs(lhs - rhs) / max(abs(lhs), 1e-12)
    return lhs, rhs, gap


@dataclass
class CouplingRun:
    meeting_time: float | None
    trajectories: list  # [traj_A, traj_B], each a list of (time, vertex index)
    displacement_max: tuple
    restarts: int = 0


class _MirrorSkeletons:
    """Lazily generated mirror-coupled pair of skeleton walks.

    Walk A's skeleton takes i.i.d. uniform nearest-neighbor steps from
    `base_a`; walk B's skeleton mirrors each coordinate until that
    coordinate's skeleton gap reaches {0, 1} in absolute value, then copies
    A's steps, so the two skeletons run parallel once every coordinate has
    coupled.  Positions are cached per skeleton index; both walks read the
    same sequences at their own (clock-driven) indices.
    """

    def __init__(self, d, base_a, base_b, rng):
        self.d = d
        self.rng = rng
        self.pos_a = [list(base_a)]  # position of A's skeleton at index j
        self.pos_b = [list(base_b)]
        self.gap = [b - a for a, b in zip(base_a, base_b)]
        self.absorbed = [abs(x) <= 1 for x in self.gap]
        self.absorb_index = 0 if all(self.absorbed) else None

    def extend_to(self, j):
        while len(self.pos_a) <= j:
            axis = int(self.rng.integers(self.d))
            s = 1 if self.rng.integers(2) else -1
            a = list(self.pos_a[-1])
            b = list(self.pos_b[-1])
            a[axis] += s
            if self.absorbed[axis]:
                b[axis] += s
            else:
                b[axis] -= s
                self.gap[axis] -= 2 * s
                if abs(self.gap[axis]) <= 1:
                    self.absorbed[axis] = True
                    if all(self.absorbed) and self.absorb_index is None:
                        self.absorb_index = len(self.pos_a)
            self.pos_a.append(a)
            self.pos_b.append(b)

    def a(self, j):
        self.extend_to(j)
        return self.pos_a[j]

    def b(self, j):
        self.extend_to(j)
        return self.pos_b[j]

    def all_absorbed(self):
        return all(self.absorbed)


def mirror_couple(
    g: Graph,
    z0: int,
    z0t: int,
    log,
    t_end: float,
    seed: int,
    patience: float = 50.0,
    record: bool = True,
) -> CouplingRun:
    """Couple two walks on a torus window driven by the same clock field.

    Both walks jump exactly at the hits of their occupied vertices in `log`
    (an EventLog or any object with ``next_hit_after``).  The second walk's
    skeleton mirrors the first's per coordinate until the coordinate gap is
    at most 1, then runs parallel.  If the skeletons have coupled but the
    walks still have not met after `patience` time units, the construction
    restarts from the current positions with fresh skeleton randomness.
    After an exact meeting the trajectories coincide.
    """
    if g.topology not in ("torus", "cycle"):
        raise WimpError("mirror_couple needs a torus or cycle window")
    if isinstance(log, EventLog) and t_end > log.horizon:
        raise WimpError(f"t_end={t_end} exceeds log horizon {log.horizon}")
    d = g.dim if g.topology == "torus" else 1
    side = g.side

    def coords(v):
        return list(torus_coords(v, side, d)) if g.topology == "torus" else [v]

    def to_index(c):
        return torus_index(c, side) if g.topology == "torus" else c[0] % side

    def next_hit(v, t):
        if isinstance(log, EventLog):
            s = next_hit_after_in_log(log, v, t)
            return s if s is not None else float("inf")
        return log.next_hit_after(v, t)

    pos_a = coords(int(z0))  # unwrapped integer coordinates
    pos_b = coords(int(z0t))
    start_a, start_b = list(pos_a), list(pos_b)
    traj_a = [(0.0, int(z0))]
    traj_b = [(0.0, int(z0t))]
    disp_a = 0.0
    disp_b = 0.0
    t = 0.0
    meeting = 0.0 if pos_a == pos_b else None
    restarts = 0
    phase = 0

    while meeting is None and t < t_end:
        rng = rng_stream(seed, phase, STREAM_COUPLE)
        sk = _MirrorSkeletons(d, pos_a, pos_b, rng)
        ja = jb = 0
        phase_start = t
        restart = False
        while t < t_end and meeting is None and not restart:
            na = next_hit(to_index(pos_a), t)
            nb = next_hit(to_index(pos_b), t)
            nxt = min(na, nb)
            if nxt > t_end:
                t = t_end
                break
            t = nxt
            if na <= nb:
                ja += 1
                pos_a = sk.a(ja)
            else:
                jb += 1
                pos_b = sk.b(jb)
            disp_a = max(disp_a, sum(abs(pos_a[i] - start_a[i]) for i in range(d)))
            disp_b = max(disp_b, sum(abs(pos_b[i] - start_b[i]) for i in range(d)))
            if record:
                if na <= nb:
                    traj_a.append((t, to_index(pos_a)))
                else:
                    traj_b.append((t, to_index(pos_b)))
            if pos_a == pos_b:
                meeting = t
                if record:
                    # record the meeting point on both walks so the
                    # trajectories agree entry-for-entry from here on
                    if na <= nb:
                        traj_b.append((t, to_index(pos_b)))
                    else:
                        traj_a.append((t, to_index(pos_a)))
            elif t - phase_start > patience:
                # near-miss or a slow mirror excursion: re-randomize the
                # skeletons from the current positions and try again
                restarts += 1
                phase += 1
                restart = True

    if meeting is not None and t < t_end:
        # after meeting the walks are identical: shared jumps, shared steps
        rng = rng_stream(seed, 10**6, STREAM_COUPLE)
        pos = list(pos_a)
        while True:
            nxt = next_hit(to_index(pos), t)
            if nxt > t_end:
                break
            t = nxt
            axis = int(rng.integers(d))
            s = 1 if rng.integers(2) else -1
            pos[axis] += s
            if record:
                traj_a.append((t, to_index(pos)))
                traj_b.append((t, to_index(pos)))
            disp_a = max(disp_a, sum(abs(pos[i] - start_a[i]) for i in range(d)))
            disp_b = max(disp_b, sum(abs(pos[i] - start_b[i]) for i in range(d)))

    return CouplingRun(
        meeting_time=meeting,
        trajectories=[traj_a, traj_b],
        displacement_max=(disp_a, disp_b),
        restarts=restarts,
    )
