"""One-dimensional flow ledger, cumulative profile, and tracer particles.

On the line (or a cycle), the mass field is equivalently described by the
nondecreasing profile G^k = cumulative mass left of k; a hit at vertex k
moves G^k and G^{k+1} to their common midpoint.  Tracers are labels y riding
the profile: the tracer position is the unique k with G^k <= y < G^{k+1}.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

import numpy as np

from .events import EventLog, merged_events
from .graph import Graph
from . import _kernels


class FlowError(ValueError):
    pass


@dataclass
class FlowLedger:
    """Signed net mass transported across each edge (x, x+1) up to `time`.

    flows[x] accumulates rightward-positive transport across the edge between
    1D coordinates x and x+1.  final_masses holds the mass state at `time`
    so telescoping checks need no second pass.
    """

    flows: dict
    time: float
    final_masses: np.ndarray

    def f(self, x: int) -> float:
        return self.flows.get(x, 0.0)


def _require_1d(g: Graph):
    if g.topology not in ("cycle", "window") or (g.topology == "window" and g.dim != 1):
        raise FlowError(f"1D topology required, got {g.topology}(dim={g.dim})")


def accumulate_flow(g: Graph, state0, log: EventLog, t_end: float) -> FlowLedger:
    """Replay events to t_end, accumulating per-edge transport.

    At a hit of v with mass m, each neighbor receives m/d_v; the transport is
    booked on the edge it crossed, signed rightward-positive.
    """
    _require_1d(g)
    if t_end > log.horizon:
        raise FlowError(f"t_end={t_end} exceeds log horizon {log.horizon}")
    masses = np.asarray(state0.masses if hasattr(state0, "masses") else state0, dtype=float).copy()
    n = g.n
    flows: dict = {}
    t_all, v_all = merged_events(log)
    stop = int(np.searchsorted(t_all, t_end, side="right"))
    cyclic = g.topology == "cycle"
    for i in range(stop):
        v = int(v_all[i])
        m = masses[v]
        if m <= 0.0:
            continue
        share = m / g.degrees[v]
        masses[v] = 0.0
        for w in g.neighbors(v):
            w = int(w)
            masses[w] += share
            # edge coordinate: right move crosses edge v, left move edge v-1
            if cyclic:
                right = w == (v + 1) % n
            else:
                right = w == v + 1
            if right:
                flows[v] = flows.get(v, 0.0) + share
            else:
                left_edge = (v - 1) % n if cyclic else v - 1
                flows[left_edge] = flows.get(left_edge, 0.0) - share
    return FlowLedger(flows=flows, time=float(t_end), final_masses=masses)


@dataclass
class PathRep:
    """Profile G over a 1D window plus tracer labels with cached positions.

    For a line window of n vertices, gamma has n+1 entries (G^0 .. G^n).
    For a cycle, gamma has n entries and extends to all of Z through the
    universal cover: G^{k+n} = G^k + total.
    """

    gamma: np.ndarray
    cyclic: bool
    total: float
    tracers: dict = field(default_factory=dict)  # label y -> unwrapped position

    def value(self, k: int) -> float:
        if self.cyclic:
            n = self.gamma.size
            return float(self.gamma[k % n] + self.total * (k // n))
        return float(self.gamma[k])

    @property
    def n_vertices(self) -> int:
        return self.gamma.size if self.cyclic else self.gamma.size - 1

    def mass(self, k: int) -> float:
        return self.value(k + 1) - self.value(k)


def gamma_init(state0, origin: int = 0, cyclic: bool = False) -> PathRep:
    """Profile of the initial state: G^origin = 0, increments are the masses."""
    masses = np.asarray(state0.masses if hasattr(state0, "masses") else state0, dtype=float)
    n = masses.size
    total = float(masses.sum())
    if cyclic:
        gamma = np.zeros(n)
        gamma[1:] = np.cumsum(masses[:-1])
        gamma -= gamma[origin]
    else:
        gamma = np.zeros(n + 1)
        gamma[1:] = np.cumsum(masses)
        gamma -= gamma[origin]
    return PathRep(gamma=gamma, cyclic=cyclic, total=total)


def gamma_step(rep: PathRep, k: int) -> PathRep:
    """Hit at vertex k: G^k and G^{k+1} jump to their midpoint.  In place."""
    g = rep.gamma
    if rep.cyclic:
        n = g.size
        k = k % n
        a = g[k]
        b = g[(k + 1) % n] + (rep.total if k == n - 1 else 0.0)
        mid = 0.5 * (a + b)
        g[k] = mid
        if k == n - 1:
            g[0] = mid - rep.total
        else:
            g[k + 1] = mid
    else:
        if not (0 <= k < g.size - 1):
            raise FlowError(f"vertex {k} outside represented window")
        mid = 0.5 * (g[k] + g[k + 1])
        g[k] = mid
        g[k + 1] = mid
    rep.tracers = {y: _locate_from(rep, y, h) for y, h in rep.tracers.items()}
    return rep


def _locate_from(rep: PathRep, y: float, h: int) -> int:
    # local repair around a previous position (profile moves locally)
    while rep.value(h) > y:
        h -= 1
    while rep.value(h + 1) <= y:
        h += 1
    return h


def locate_tracer(rep: PathRep, y: float) -> int:
    """The unique k with G^k <= y < G^{k+1} (rightmost on plateaus)."""
    if rep.cyclic:
        if rep.total <= 0:
            raise FlowError("empty profile")
        h = rep.tracers.get(y)
        if h is None:
            # start the search from the base window via the cover shift
            shift, y0 = divmod(y - rep.gamma[0], rep.total)
            h = int(bisect.bisect_right(rep.gamma, rep.gamma[0] + y0)) - 1 + int(shift) * rep.gamma.size
            h = _locate_from(rep, y, h)
            rep.tracers[y] = h
        return h
    g = rep.gamma
    if not (g[0] <= y < g[-1]):
        raise FlowError(f"label {y} outside represented window [{g[0]}, {g[-1]})")
    h = int(bisect.bisect_right(g, y)) - 1
    # bisect_right lands right of any plateau at value y, matching the
    # rightmost-k convention
    return h


def track_tracer(rep: PathRep, y: float) -> int:
    """Register y as a live tracer (its position follows gamma_step)."""
    h = locate_tracer(rep, y)
    rep.tracers[y] = h
    return h


def winding_check(g: Graph, theta: float, log_or_vertices, t_end: float | None = None):
    """Run the cyclic profile dynamics from the flat state and return the
    maximum unwrapped tracer displacement of the label theta, in vertices.
    """
    if g.topology != "cycle":
        raise FlowError("winding_check needs a cycle")
    if isinstance(log_or_vertices, EventLog):
        t_all, v_all = merged_events(log_or_vertices)
        stop = int(np.searchsorted(t_all, t_end, side="right")) if t_end is not None else t_all.size
        vertices = v_all[:stop]
    else:
        vertices = np.asarray(log_or_vertices, dtype=np.int64)
    n = g.n
    gamma = np.arange(n, dtype=float)  # flat unit masses
    W = float(n)
    if not (0 <= theta < W):
        raise FlowError("theta must lie in [0, total mass)")
    start = int(np.searchsorted(np.arange(n + 1, dtype=float), theta, side="right")) - 1
    labels = np.array([theta])
    pos = np.array([start], dtype=np.int64)
    start_pos = pos.copy()
    max_dev = np.zeros(1, dtype=np.int64)
    violations = _kernels.cycle_gamma_tracers(gamma, W, vertices, labels, pos, start_pos, max_dev)
    if violations:
        raise FlowError("tracer order violated")  # impossible with one tracer
    return int(max_dev[0])
