"""Experiment runner.

Every experiment is a flat key=value configuration (file and/or command-line
overrides, base seed overridable by the METEOR_SEED environment variable).
All outputs carry the config hash and seed in their header and are
byte-identical across reruns of the same configuration.

Subcommands: simulate, oracle, moments, flow, tracer, support, couple, verify.
Exit codes: 0 all checks passed, 1 a check failed, 2 bad usage.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys

import numpy as np
from scipy import stats as sstats

from . import _kernels
from .dynamics import MassState, flat_state, mass_via_paths, simulate
from .events import EventStream, LazyClockField, rng_stream, sample_event_log, save_csv, STREAM_INIT
from .flowpaths import winding_check
from .graph import Graph, build_cycle, build_path, build_torus
from .stats import MomentReport, moment_report, stationary_sample, tail_estimate
from .support import in_U_star, replay_until_close
from .wimps import mirror_couple, verify_prime_solution


DEFAULTS = {
    "simulate": {"topology": "cycle", "side": 20, "dim": 1, "horizon": 10.0, "t_end": 10.0, "seed": 1},
    "oracle": {"topology": "cycle", "side": 8, "dim": 1, "horizon": 5.0, "trials": 10, "seed": 1},
    "moments": {
        "topology": "cycle",
        "side": 200,
        "dim": 1,
        "replicas": 16,
        "samples": 100,
        "burn_in": 0,
        "gap": 0,
        "boxes": "",
        "seed": 1,
    },
    "flow": {"side": 500, "times": "1,5,25", "replicas": 200, "burn_in": 0, "seed": 1},
    "tracer": {"side": 500, "t": 50.0, "ms": "6,8,12", "replicas": 200, "seed": 1},
    "support": {"topology": "cycle", "side": 5, "dim": 1, "eps": 0.05, "targets": 5, "cap": 100000, "seed": 1},
    "couple": {"dim": 1, "side": 501, "gap": 2, "replicas": 100, "t_end": 400.0, "patience": 50.0, "seed": 1},
    "verify": {"dmax": 8},
}


def load_config(path: str) -> dict:
    cfg = {}
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            cfg[key.strip()] = val.strip()
    return cfg


def build_config(sub: str, args) -> dict:
    cfg = dict(DEFAULTS[sub])
    if args.config:
        for k, v in load_config(args.config).items():
            if k not in cfg:
                raise ValueError(f"unknown config key {k!r} for {sub}")
            cfg[k] = type(cfg[k])(v) if not isinstance(cfg[k], str) else v
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        if k not in cfg:
            raise ValueError(f"unknown config key {k!r} for {sub}")
        cfg[k] = type(cfg[k])(v) if not isinstance(cfg[k], str) else v
    if "seed" in cfg and os.environ.get("METEOR_SEED"):
        cfg["seed"] = int(os.environ["METEOR_SEED"])
    cfg["subcommand"] = sub
    return cfg


def config_hash(cfg: dict) -> str:
    blob = ",".join(f"{k}={cfg[k]}" for k in sorted(cfg))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def header_lines(cfg: dict) -> list:
    lines = [f"config_hash={config_hash(cfg)}"]
    if "seed" in cfg:
        lines.append(f"seed={cfg['seed']}")
    lines.append("config " + " ".join(f"{k}={cfg[k]}" for k in sorted(cfg)))
    return lines


def write_csv(path, cfg, columns, rows):
    with open(path, "w", newline="") as f:
        for line in header_lines(cfg):
            f.write(f"# {line}\n")
        w = csv.writer(f)
        w.writerow(columns)
        for row in rows:
            w.writerow(row)


def make_graph(cfg) -> Graph:
    topo = cfg.get("topology", "cycle")
    side = int(cfg["side"])
    dim = int(cfg.get("dim", 1))
    if topo == "cycle":
        return build_cycle(side)
    if topo == "torus":
        return build_torus(side, dim)
    if topo == "path":
        return build_path(side)
    raise ValueError(f"unknown topology {topo!r}")


def cmd_simulate(cfg, outdir) -> int:
    g = make_graph(cfg)
    log = sample_event_log(g, float(cfg["horizon"]), int(cfg["seed"]))
    state = simulate(g, flat_state(g), log, float(cfg["t_end"]))
    write_csv(
        os.path.join(outdir, "state.csv"),
        cfg,
        ["vertex", "mass"],
        [(v, repr(float(state.masses[v]))) for v in range(g.n)],
    )
    save_csv(log, os.path.join(outdir, "events.csv"))
    drift = abs(state.total - g.n) / g.n
    print(f"simulate: {g.n} vertices, t={cfg['t_end']}, mass drift {drift:.2e}")
    return 0 if drift < 1e-9 else 1


def cmd_oracle(cfg, outdir) -> int:
    g = make_graph(cfg)
    horizon = float(cfg["horizon"])
    base = int(cfg["seed"])
    worst = 0.0
    rows = []
    for trial in range(int(cfg["trials"])):
        log = sample_event_log(g, horizon, base + trial)
        rng = rng_stream(base + trial, STREAM_INIT)
        s0 = MassState(rng.random(g.n) * 2)
        end = simulate(g, s0, log, horizon)
        for x in range(g.n):
            o = mass_via_paths(g, s0, log, x, horizon)
            gap = abs(o - end.masses[x]) / max(1.0, abs(o))
            worst = max(worst, gap)
            rows.append((trial, x, repr(float(end.masses[x])), repr(float(o)), repr(gap)))
    write_csv(os.path.join(outdir, "oracle.csv"), cfg, ["trial", "vertex", "simulated", "oracle", "rel_gap"], rows)
    print(f"oracle: worst relative gap {worst:.3e} over {cfg['trials']} trials")
    return 0 if worst <= 1e-9 else 1


def cmd_moments(cfg, outdir) -> int:
    g = make_graph(cfg)
    d = int(cfg.get("dim", 1))
    burn = int(cfg["burn_in"]) or 200 * g.n
    gap = int(cfg["gap"]) or 5 * g.n
    boxes = tuple(int(b) for b in str(cfg["boxes"]).split(",") if b)
    reps = [
        stationary_sample(g, burn, int(cfg["samples"]), gap, int(cfg["seed"]) + r)
        for r in range(int(cfg["replicas"]))
    ]
    tol = {"mean": 0.02, "second_central": 0.1, "neighbor_cov": 0.05, "nonneighbor_cov": 0.05}
    report = moment_report(reps, g, d, box_sizes=boxes, tolerances=tol)
    report.meta["config_hash"] = config_hash(cfg)
    report.meta["seed"] = int(cfg["seed"])
    report.to_csv(os.path.join(outdir, "moments.csv"), header_lines(cfg))
    report.to_json(os.path.join(outdir, "moments.json"))
    for r in report.rows:
        print(
            f"moments: {r['name']:16s} {r['estimate']:+.4f} ± {r['ci']:.4f}"
            f"  target {r['target']:+.4f}  {'ok' if r['pass'] is not False else 'FAIL'}"
        )
    return 0 if report.all_pass() else 1


def cmd_flow(cfg, outdir) -> int:
    n = int(cfg["side"])
    times = [float(t) for t in str(cfg["times"]).split(",") if t]
    burn = int(cfg["burn_in"]) or 200 * n
    replicas = int(cfg["replicas"])
    base = int(cfg["seed"])
    g = build_cycle(n)
    flows = np.zeros((replicas, len(times)))
    for r in range(replicas):
        stream = EventStream(n, base + r)
        masses = np.full(n, 1.0)
        _kernels.run_hits(masses, g.indptr, g.indices, stream.vertex_batch(burn))
        rng = rng_stream(base + r, 1, STREAM_INIT)
        t_prev = 0.0
        acc = 0.0
        for j, t in enumerate(times):
            n_events = int(rng.poisson(n * (t - t_prev)))
            acc += _kernels.cycle_hits_flow(masses, stream.vertex_batch(n_events))
            flows[r, j] = acc
            t_prev = t
    rows = []
    ok = True
    for j, t in enumerate(times):
        var = float(flows[:, j].var(ddof=1))
        # chi-square interval on the replica variance
        hi = var * (replicas - 1) / sstats.chi2.ppf(0.025, replicas - 1)
        passed = var <= 2.0 + (hi - var)
        ok = ok and passed
        rows.append((t, repr(var), repr(hi), 2.0, passed))
        print(f"flow: t={t:<6} Var F = {var:.4f} (upper {hi:.4f})  bound 2  {'ok' if passed else 'FAIL'}")
    write_csv(os.path.join(outdir, "flow.csv"), cfg, ["t", "var", "var_upper95", "bound", "pass"], rows)
    return 0 if ok else 1


def cmd_tracer(cfg, outdir) -> int:
    n = int(cfg["side"])
    t = float(cfg["t"])
    ms = [float(m) for m in str(cfg["ms"]).split(",") if m]
    replicas = int(cfg["replicas"])
    base = int(cfg["seed"])
    disp = tracer_displacements(n, t, replicas, base)
    rows = []
    ok = True
    for m in ms:
        p, lo, hi = tail_estimate(disp, m)
        bound = 24.0 / m**2
        passed = hi <= bound or bound >= 1.0
        ok = ok and passed
        rows.append((m, repr(p), repr(hi), repr(bound), passed))
        print(f"tracer: m={m:<5} P(|dH|>m) = {p:.4f} (upper {hi:.4f})  bound {bound:.4f}  {'ok' if passed else 'FAIL'}")
    write_csv(os.path.join(outdir, "tracer.csv"), cfg, ["m", "p", "p_upper95", "bound", "pass"], rows)
    return 0 if ok else 1


def tracer_displacements(n: int, t: float, replicas: int, base_seed: int, burn: int | None = None) -> np.ndarray:
    """Unwrapped tracer displacement at time t from stationary starts."""
    g = build_cycle(n)
    burn = burn if burn is not None else 200 * n
    out = np.empty(replicas)
    for r in range(replicas):
        stream = EventStream(n, base_seed + r)
        masses = np.full(n, 1.0)
        _kernels.run_hits(masses, g.indptr, g.indices, stream.vertex_batch(burn))
        gamma = np.zeros(n)
        gamma[1:] = np.cumsum(masses[:-1])
        W = float(masses.sum())
        y = W / 2.0
        start = int(np.searchsorted(np.append(gamma, W), y, side="right")) - 1
        rng = rng_stream(base_seed + r, 2, STREAM_INIT)
        n_events = int(rng.poisson(n * t))
        pos = np.array([start], dtype=np.int64)
        start_pos = pos.copy()
        max_dev = np.zeros(1, dtype=np.int64)
        _kernels.cycle_gamma_tracers(
            gamma, W, stream.vertex_batch(n_events), np.array([y]), pos, start_pos, max_dev
        )
        out[r] = pos[0] - start_pos[0]
    return out


def cmd_support(cfg, outdir) -> int:
    g = make_graph(cfg)
    eps = float(cfg["eps"])
    base = int(cfg["seed"])
    rng = rng_stream(base, STREAM_INIT)
    rows = []
    ok = True
    for i in range(int(cfg["targets"])):
        a = np.zeros(g.n)
        idx = rng.permutation(g.n)
        a[idx[1:]] = 0.2 + rng.random(g.n - 1)
        a *= g.n / a.sum()
        c = rng.random(g.n)
        c[int(rng.integers(g.n))] = 0.0
        c *= g.n / c.sum()
        try:
            c1, steps = replay_until_close(g, a, c, eps, step_cap=int(cfg["cap"]))
            dist = float(np.abs(c1 - a).sum())
            passed = dist <= 2 * eps
        except Exception:
            dist, steps, passed = float("nan"), -1, False
        ok = ok and passed
        rows.append((i, steps, repr(dist), repr(2 * eps), passed))
        print(f"support: target {i}: |c1 - a|_1 = {dist:.5f} after {steps} steps (goal {2 * eps})")
    write_csv(os.path.join(outdir, "support.csv"), cfg, ["target", "steps", "l1_dist", "goal", "pass"], rows)
    return 0 if ok else 1


def cmd_couple(cfg, outdir) -> int:
    dim = int(cfg["dim"])
    side = int(cfg["side"])
    gap = int(cfg["gap"])
    base = int(cfg["seed"])
    g = build_cycle(side) if dim == 1 else build_torus(side, dim)
    z0 = side // 2 if dim == 1 else int(np.ravel_multi_index((side // 2,) * dim, (side,) * dim))
    z1 = z0 + gap  # offset along the last axis
    met = 0
    rows = []
    for r in range(int(cfg["replicas"])):
        fld = LazyClockField(g.n, base + r)
        run = mirror_couple(g, z0, z1, fld, float(cfg["t_end"]), base + r, patience=float(cfg["patience"]), record=False)
        if run.meeting_time is not None:
            met += 1
        rows.append((r, repr(run.meeting_time) if run.meeting_time is not None else "", run.restarts))
    rate = met / int(cfg["replicas"])
    write_csv(os.path.join(outdir, "couple.csv"), cfg, ["replica", "meeting_time", "restarts"], rows)
    print(f"couple: d={dim} gap={gap}: met in {met}/{cfg['replicas']} runs ({rate:.3f})")
    return 0 if rate >= 0.95 else 1


def cmd_verify(cfg, outdir) -> int:
    ok = all(verify_prime_solution(d) for d in range(1, int(cfg["dmax"]) + 1))
    print(f"verify: equilibrium identities for d=1..{cfg['dmax']}: {'ok' if ok else 'FAIL'}")
    write_csv(
        os.path.join(outdir, "verify.csv"),
        cfg,
        ["d", "pass"],
        [(d, verify_prime_solution(d)) for d in range(1, int(cfg["dmax"]) + 1)],
    )
    return 0 if ok else 1


COMMANDS = {
    "simulate": cmd_simulate,
    "oracle": cmd_oracle,
    "moments": cmd_moments,
    "flow": cmd_flow,
    "tracer": cmd_tracer,
    "support": cmd_support,
    "couple": cmd_couple,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="meteor", description=__doc__)
    sub = parser.add_subparsers(dest="subcommand", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key")
        p.add_argument("--out", default="out", help="output directory")
    try:
        args = parser.parse_args(argv)
        cfg = build_config(args.subcommand, args)
    except SystemExit:
        raise
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    os.makedirs(args.out, exist_ok=True)
    try:
        return COMMANDS[args.subcommand](cfg, args.out)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
