"""Numba-compiled inner loops for event-throughput-bound experiments.

Everything here is plain array-in/array-out; all randomness is drawn by the
callers so the kernels stay deterministic and replayable.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True)
def run_hits(masses, indptr, indices, vertices):
    """Apply the redistribution hit at each vertex of `vertices` in order."""
    for i in range(vertices.size):
        v = vertices[i]
        m = masses[v]
        if m > 0.0:
            masses[v] = 0.0
            deg = indptr[v + 1] - indptr[v]
            share = m / deg
            for j in range(indptr[v], indptr[v + 1]):
                masses[indices[j]] += share


@njit(cache=True)
def run_hits_record(masses, indptr, indices, vertices, gap, out):
    """Apply hits, storing a snapshot into `out` every `gap` events.

    `vertices` must hold exactly gap * out.shape[0] entries.
    """
    k = 0
    for s in range(out.shape[0]):
        run_hits(masses, indptr, indices, vertices[k : k + gap])
        k += gap
        out[s, :] = masses


@njit(cache=True)
def cycle_hits_flow(masses, vertices):
    """Cycle hits; returns the signed mass moved across the edge (0, 1).

    A hit at 0 pushes half its mass rightward across the edge; a hit at 1
    pushes half leftward.
    """
    n = masses.size
    flow = 0.0
    for i in range(vertices.size):
        v = vertices[i]
        m = masses[v]
        if m > 0.0:
            half = 0.5 * m
            masses[v] = 0.0
            left = v - 1 if v > 0 else n - 1
            right = v + 1 if v < n - 1 else 0
            masses[left] += half
            masses[right] += half
            if v == 0:
                flow += half
            elif v == 1:
                flow -= half
    return flow


@njit(cache=True)
def cycle_hits_zero_pairs(masses, vertices, tol_every, initial_total):
    """Cycle hits with zero-pair tracking and a periodic conservation check.

    Returns (pair-increase count, max relative total-mass drift).  The pair
    count is over ordered adjacent pairs (x, v) with M^x + M^v == 0.
    """
    n = masses.size
    pairs = 0
    for v in range(n):
        if masses[v] == 0.0 and masses[(v + 1) % n] == 0.0:
            pairs += 2
    increases = 0
    max_drift = 0.0
    touched = np.empty(4, dtype=np.int64)
    for i in range(vertices.size):
        v = vertices[i]
        m = masses[v]
        if m > 0.0:
            left = v - 1 if v > 0 else n - 1
            right = v + 1 if v < n - 1 else 0
            # only edges with an endpoint in {left, v, right} can change;
            # identify each edge by its lower-arc endpoint a (edge a, a+1)
            touched[0] = left - 1 if left > 0 else n - 1
            touched[1] = left
            touched[2] = v
            touched[3] = right
            ntouch = 0
            for j in range(4):
                dup = False
                for kk in range(ntouch):
                    if touched[kk] == touched[j]:
                        dup = True
                if not dup:
                    touched[ntouch] = touched[j]
                    ntouch += 1
            before = 0
            for j in range(ntouch):
                a = touched[j]
                b = a + 1 if a < n - 1 else 0
                if masses[a] == 0.0 and masses[b] == 0.0:
                    before += 2
            half = 0.5 * m
            masses[v] = 0.0
            masses[left] += half
            masses[right] += half
            after = 0
            for j in range(ntouch):
                a = touched[j]
                b = a + 1 if a < n - 1 else 0
                if masses[a] == 0.0 and masses[b] == 0.0:
                    after += 2
            if after > before:
                increases += 1
            pairs += after - before
        if tol_every > 0 and (i + 1) % tol_every == 0:
            total = 0.0
            for x in range(n):
                total += masses[x]
            drift = abs(total - initial_total) / initial_total
            if drift > max_drift:
                max_drift = drift
    return increases, max_drift


@njit(cache=True)
def _gamma_hat(G, W, k):
    n = G.size
    return G[k % n] + W * (k // n)


@njit(cache=True)
def cycle_gamma_tracers(G, W, vertices, labels, pos, start_pos, max_dev):
    """Cyclic cumulative-profile dynamics with tracer particles.

    G holds the base window of the profile on the universal cover
    (profile(k + n) = profile(k) + W, W = total mass).  `labels` must be
    ascending; `pos` holds current unwrapped tracer positions and is updated
    in place.  `max_dev` accumulates per-tracer max |pos - start_pos|.
    Returns the number of tracer-order violations observed (0 expected).
    """
    n = G.size
    violations = 0
    for i in range(vertices.size):
        v = vertices[i]
        a = G[v]
        b = G[v + 1] if v < n - 1 else G[0] + W
        mid = 0.5 * (a + b)
        G[v] = mid
        if v < n - 1:
            G[v + 1] = mid
        else:
            G[0] = mid - W
        for t in range(labels.size):
            y = labels[t]
            h = pos[t]
            while _gamma_hat(G, W, h) > y:
                h -= 1
            while _gamma_hat(G, W, h + 1) <= y:
                h += 1
            pos[t] = h
            dev = abs(h - start_pos[t])
            if dev > max_dev[t]:
                max_dev[t] = dev
        for t in range(1, labels.size):
            if pos[t] < pos[t - 1]:
                violations += 1
    return violations
