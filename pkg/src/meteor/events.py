"""Rate-1 Poisson clock field: sampling, replay, queries, serialization.

Every vertex carries an independent unit-rate Poisson stream of hit times.
A pre-sampled :class:`EventLog` is the canonical representation so that the
forward simulator, the backward path oracle, and the shared-field couplings
all consume exactly the same realization.

Randomness is drawn from numpy's PCG64 seeded through ``SeedSequence`` with
documented integer key tuples (see :func:`rng_stream`), so every per-vertex
stream is reproducible bit-for-bit regardless of consumption order.
"""

from __future__ import annotations

import bisect
import csv
import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"MEVT"
FORMAT_VERSION = 1

# stream-id tags used as the last element of RNG key tuples
STREAM_CLOCK = 0
STREAM_WIMP = 1
STREAM_INIT = 2
STREAM_DRIVE = 3
STREAM_COUPLE = 4


class EventError(ValueError):
    pass


def rng_stream(*key: int) -> np.random.Generator:
    """PCG64 generator for the integer key tuple.

    Distinct keys give statistically independent streams; the same key always
    reproduces the same stream.
    """
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(list(key))))


@dataclass(frozen=True)
class EventLog:
    """Per-vertex sorted hit times on (0, horizon]; immutable and replayable."""

    n: int
    horizon: float
    seed: int
    times: tuple  # tuple of numpy arrays, one per vertex, strictly increasing

    def count(self, v: int) -> int:
        return len(self.times[v])

    @property
    def total_events(self) -> int:
        return sum(len(t) for t in self.times)


def sample_event_log(g_or_n, horizon: float, seed: int) -> EventLog:
    """Independent Poisson(1) hit times on (0, horizon] for every vertex.

    Each vertex draws from its own stream keyed (seed, vertex, STREAM_CLOCK),
    so the log is fully determined by (n, horizon, seed).
    """
    n = g_or_n if isinstance(g_or_n, int) else g_or_n.n
    if horizon < 0:
        raise EventError(f"horizon must be >= 0, got {horizon}")
    times = []
    for v in range(n):
        rng = rng_stream(seed, v, STREAM_CLOCK)
        k = rng.poisson(horizon)
        t = np.sort(rng.uniform(0.0, horizon, size=k)) if k else np.empty(0)
        # exact duplicates have probability zero but floats can collide
        while t.size > 1 and np.any(np.diff(t) == 0.0):
            t = np.sort(rng.uniform(0.0, horizon, size=k))
        times.append(t)
    return EventLog(n=n, horizon=float(horizon), seed=int(seed), times=tuple(times))


def event_log_from_times(times, horizon: float, seed: int = -1) -> EventLog:
    """Wrap explicit per-vertex time arrays (mainly for tests and replay)."""
    arrs = tuple(np.asarray(t, dtype=float) for t in times)
    for t in arrs:
        if t.size and (np.any(np.diff(t) <= 0) or t[0] <= 0 or t[-1] > horizon):
            raise EventError("per-vertex times must be strictly increasing in (0, horizon]")
    return EventLog(n=len(arrs), horizon=float(horizon), seed=int(seed), times=arrs)


def merged_events(log: EventLog):
    """All events as (time, vertex) pairs, ascending; ties broken by vertex index."""
    total = log.total_events
    t = np.empty(total)
    v = np.empty(total, dtype=np.int64)
    pos = 0
    for u in range(log.n):
        k = len(log.times[u])
        t[pos : pos + k] = log.times[u]
        v[pos : pos + k] = u
        pos += k
    order = np.lexsort((v, t))
    return t[order], v[order]


def last_hit_before(log: EventLog, v: int, t: float) -> float:
    """Largest hit time of v in [0, t], or -1.0 if v was never hit by t."""
    if not (0 <= t <= log.horizon):
        raise EventError(f"t={t} outside [0, {log.horizon}]")
    times = log.times[v]
    i = bisect.bisect_right(times, t)
    return float(times[i - 1]) if i else -1.0


class EventStream:
    """Single-owner streaming event source, equivalent in law to an EventLog.

    Globally, events occur at rate n with a uniformly chosen vertex.  Long
    stationary runs use this instead of materializing a log; the seed is
    recorded so any window can be re-materialized for oracle comparisons.
    """

    def __init__(self, n: int, seed: int):
        self.n = n
        self.seed = int(seed)
        self._rng = rng_stream(seed, STREAM_DRIVE)
        self.t = 0.0

    def next_event(self):
        self.t += self._rng.exponential(1.0 / self.n)
        return self.t, int(self._rng.integers(self.n))

    def vertex_batch(self, size: int) -> np.ndarray:
        """Vertices of the next `size` events (times discarded)."""
        return self._rng.integers(0, self.n, size=size)


class LazyClockField:
    """Per-vertex Poisson streams materialized on demand.

    Law-equivalent to sample_event_log with an unbounded horizon, but only the
    visited vertices' streams are ever generated.  Used by coupling runs whose
    walks touch a vanishing fraction of a large window.  Single-owner: the
    realization is deterministic in the seed for a fixed consumption pattern.
    """

    def __init__(self, n: int, seed: int):
        self.n = n
        self.seed = int(seed)
        self._rng = rng_stream(seed, STREAM_CLOCK)
        self._times = {}

    def next_hit_after(self, v: int, t: float) -> float:
        """Smallest hit time of v strictly greater than t."""
        times = self._times.get(v)
        if times is None:
            times = self._times[v] = [float(self._rng.exponential())]
        while times[-1] <= t:
            times.append(times[-1] + float(self._rng.exponential()))
        i = bisect.bisect_right(times, t)
        return times[i]

    def hits_up_to(self, v: int, t: float):
        self.next_hit_after(v, t)  # ensure materialized past t
        times = self._times[v]
        return [s for s in times if s <= t]


def next_hit_after_in_log(log: EventLog, v: int, t: float):
    """Smallest hit time of v in the log strictly greater than t, or None."""
    times = log.times[v]
    i = bisect.bisect_right(times, t)
    return float(times[i]) if i < len(times) else None


def save_binary(log: EventLog, path) -> None:
    """magic, version, n, horizon, seed, per-vertex counts, concatenated times."""
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<IQdq", FORMAT_VERSION, log.n, log.horizon, log.seed))
        counts = np.array([len(t) for t in log.times], dtype="<u8")
        f.write(counts.tobytes())
        for t in log.times:
            f.write(np.asarray(t, dtype="<f8").tobytes())


def load_binary(path) -> EventLog:
    with open(path, "rb") as f:
        if f.read(4) != MAGIC:
            raise EventError("not an event-log file")
        version, n, horizon, seed = struct.unpack("<IQdq", f.read(4 + 8 + 8 + 8))
        if version != FORMAT_VERSION:
            raise EventError(f"unsupported event-log version {version}")
        counts = np.frombuffer(f.read(8 * n), dtype="<u8")
        times = []
        for v in range(n):
            k = int(counts[v])
            times.append(np.frombuffer(f.read(8 * k), dtype="<f8").copy())
    return EventLog(n=int(n), horizon=horizon, seed=seed, times=tuple(times))


def save_csv(log: EventLog, path) -> None:
    t, v = merged_events(log)
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["time", "vertex"])
        for ti, vi in zip(t, v):
            w.writerow([repr(float(ti)), int(vi)])
