"""Stationary sampling and moment estimation with replica-based intervals.

Long runs are driven by the streaming event source (uniform vertex per
event), which matches the clock-field law for time-marginal questions.
Confidence intervals always come from batch means over independent replicas,
never from autocorrelated within-run samples.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import stats as sstats

from . import _kernels
from .dynamics import MassState
from .events import EventStream, rng_stream, STREAM_INIT
from .graph import Graph


class StatsError(ValueError):
    pass


DEFAULT_BURN_IN_PER_VERTEX = 200
DEFAULT_GAP_PER_VERTEX = 5


def stationary_sample(
    g: Graph,
    burn_in_events: int,
    n_samples: int,
    gap_events: int,
    seed: int,
    start: np.ndarray | None = None,
) -> list[MassState]:
    """Evolve from the flat state and record a state every gap_events events.

    Total initial mass is |V| (one unit per vertex) unless `start` overrides
    the flat start.
    """
    masses = np.full(g.n, 1.0) if start is None else np.asarray(start, dtype=float).copy()
    stream = EventStream(g.n, seed)
    chunk = 1 << 20
    remaining = int(burn_in_events)
    while remaining > 0:
        take = min(chunk, remaining)
        _kernels.run_hits(masses, g.indptr, g.indices, stream.vertex_batch(take))
        remaining -= take
    if n_samples == 0:
        return []
    out = np.empty((n_samples, g.n))
    verts = stream.vertex_batch(int(gap_events) * n_samples)
    _kernels.run_hits_record(masses, g.indptr, g.indices, verts, int(gap_events), out)
    return [MassState(out[i].copy()) for i in range(n_samples)]


@dataclass
class MomentReport:
    rows: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, name, estimate, ci, target, tolerance=None):
        passed = None
        if tolerance is not None:
            passed = bool(abs(estimate - target) <= tolerance)
        self.rows.append(
            {
                "name": name,
                "estimate": float(estimate),
                "ci": float(ci),
                "target": float(target),
                "pass": passed,
            }
        )

    def get(self, name):
        for row in self.rows:
            if row["name"] == name:
                return row
        raise KeyError(name)

    def all_pass(self) -> bool:
        return all(r["pass"] is not False for r in self.rows)

    def to_csv(self, path, header_lines=()):
        with open(path, "w", newline="") as f:
            for line in header_lines:
                f.write(f"# {line}\n")
            w = csv.writer(f)
            w.writerow(["quantity", "estimate", "ci", "target", "pass"])
            for r in self.rows:
                w.writerow([r["name"], repr(r["estimate"]), repr(r["ci"]), repr(r["target"]), r["pass"]])

    def to_json(self, path):
        with open(path, "w") as f:
            json.dump({"schema": 1, "meta": self.meta, "rows": self.rows}, f, indent=2, sort_keys=True)
            f.write("\n")


def _replica_ci(per_replica: np.ndarray) -> tuple[float, float]:
    """Mean and 95% half-width over independent replica estimates."""
    r = per_replica.size
    m = float(per_replica.mean())
    if r < 2:
        return m, float("inf")
    half = float(sstats.t.ppf(0.975, r - 1) * per_replica.std(ddof=1) / np.sqrt(r))
    return m, half


def _torus_array(masses: np.ndarray, g: Graph) -> np.ndarray:
    shape = (g.side,) * g.dim if g.topology == "torus" else (g.n,)
    return masses.reshape(shape)


def _box_sums(arr: np.ndarray, n: int) -> np.ndarray:
    """Sums over all cyclic translates of the n^d box."""
    s = arr
    for axis in range(arr.ndim):
        s = sum(np.roll(s, -j, axis=axis) for j in range(n))
    return s


def sample_moments(masses: np.ndarray, g: Graph, box_sizes=()) -> dict:
    """Shift-averaged per-sample statistics on a vertex-transitive graph."""
    m = masses
    mbar = m.mean()
    out = {
        "mean": float(mbar),
        "second_central": float(((m - mbar) ** 2).mean()),
        "third": float((m**3).mean()),
    }
    centered = m - mbar
    # neighbor covariance, averaged over all directed edges
    acc = 0.0
    for v in range(g.n):
        acc += centered[v] * centered[g.neighbors(v)].sum()
    out["neighbor_cov"] = float(acc / g.degrees.sum())
    # a fixed non-neighbor pair class: offset two steps along the first axis
    if g.topology in ("cycle", "torus"):
        arr = _torus_array(centered, g)
        out["nonneighbor_cov"] = float((arr * np.roll(arr, 2, axis=0)).mean())
    for n in box_sizes:
        s = _box_sums(_torus_array(m, g), n)
        out[f"box_var_{n}"] = float(((s - s.mean()) ** 2).mean())
    return out


def moment_report(
    samples_by_replica: list,
    g: Graph,
    d: int,
    box_sizes=(),
    tolerances: dict | None = None,
) -> MomentReport:
    """Aggregate per-replica shift-averaged estimates into a report.

    samples_by_replica: list (one entry per independent replica) of lists of
    MassState (or arrays).  Intervals are replica batch means.
    """
    if sum(len(rep) for rep in samples_by_replica) < 100:
        raise StatsError("need at least 100 samples")
    names = None
    per_rep: dict[str, list] = {}
    for rep in samples_by_replica:
        acc: dict[str, float] = {}
        for s in rep:
            m = np.asarray(s.masses if hasattr(s, "masses") else s, dtype=float)
            mom = sample_moments(m, g, box_sizes)
            for kk, vv in mom.items():
                acc[kk] = acc.get(kk, 0.0) + vv
        for kk in acc:
            per_rep.setdefault(kk, []).append(acc[kk] / len(rep))
        names = list(acc)
    tol = tolerances or {}
    targets = {
        "mean": 1.0,
        "second_central": 1.0,
        "third": float("nan"),
        "neighbor_cov": -1.0 / (2 * d),
        "nonneighbor_cov": 0.0,
    }
    for n in box_sizes:
        targets[f"box_var_{n}"] = float(n ** (d - 1))
    report = MomentReport()
    report.meta = {
        "replicas": len(samples_by_replica),
        "samples_per_replica": len(samples_by_replica[0]),
        "graph": f"{g.topology}(side={g.side}, dim={g.dim})",
    }
    for name in names:
        est, ci = _replica_ci(np.asarray(per_rep[name]))
        target = targets.get(name, float("nan"))
        report.add(name, est, ci, target, tol.get(name))
    return report


def tail_estimate(displacements, m: float):
    """Exceedance frequency P(|D| > m) with an exact binomial 95% CI."""
    if m < 1:
        raise StatsError("m must be >= 1")
    d = np.abs(np.asarray(displacements, dtype=float))
    n = d.size
    x = int((d > m).sum())
    p = x / n
    lo = 0.0 if x == 0 else float(sstats.beta.ppf(0.025, x, n - x + 1))
    hi = 1.0 if x == n else float(sstats.beta.ppf(0.975, x + 1, n - x))
    return p, lo, hi


def scaling_test(samples_by_replica: list, g: Graph, d: int, c: float) -> bool:
    """Check that scaling every state by c scales mean by c and variance by c^2."""
    if c <= 0:
        raise StatsError("c must be positive")
    base = moment_report(samples_by_replica, g, d)
    scaled_samples = [
        [c * np.asarray(s.masses if hasattr(s, "masses") else s, dtype=float) for s in rep]
        for rep in samples_by_replica
    ]
    scaled = moment_report(scaled_samples, g, d)
    for name, factor in (("mean", c), ("second_central", c * c)):
        b = base.get(name)
        s = scaled.get(name)
        slack = factor * b["ci"] + s["ci"] + 1e-12
        if abs(s["estimate"] - factor * b["estimate"]) > slack:
            return False
    return True
