"""Hit operator, its constructive inverse, and the reachability algorithm.

op_T is the deterministic hit map on mass vectors; op_R undoes it when the
hit vertex is zero and its neighbors are positive.  reverse_sequence runs the
inverse dynamics from a target with tiny controlled perturbations, producing
a vertex sequence whose forward replay steers any start vector toward the
target in L1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graph import Graph


class SupportError(ValueError):
    pass


def op_T(a, y: int, g: Graph) -> np.ndarray:
    """Hit at y: b_y = 0, each neighbor gains a_y/d_y.  Pure."""
    b = np.asarray(a, dtype=float).copy()
    m = b[y]
    b[y] = 0.0
    b[g.neighbors(y)] += m / g.degree(y)
    return b


def op_R(a, y: int, g: Graph) -> np.ndarray:
    """Inverse hit at y: pull the minimal neighbor value back onto y.

    With m = min over neighbors of a: b_y = a_y + d_y*m and each neighbor
    loses m.  When a_y = 0 and m > 0 this exactly undoes op_T.
    """
    b = np.asarray(a, dtype=float).copy()
    nbrs = g.neighbors(y)
    m = float(b[nbrs].min())
    b[y] += g.degree(y) * m
    b[nbrs] -= m
    return b


def in_U(a, tol: float = 0.0) -> bool:
    """At least one coordinate is (numerically) zero."""
    return bool(np.min(np.asarray(a, dtype=float)) <= tol)


def in_U_star(a, g: Graph, tol: float = 0.0) -> bool:
    """In U, and every edge has at least one strictly positive endpoint."""
    a = np.asarray(a, dtype=float)
    if not in_U(a, tol):
        return False
    for v, w in g.edges():
        if a[v] <= tol and a[w] <= tol:
            return False
    return True


@dataclass
class ReverseTrace:
    """Output of reverse_sequence: the vertex sequence and its budgets."""

    xs: list
    deltas: list
    epsilons: list
    endpoint: np.ndarray
    underflow: bool = False


def reverse_sequence(g: Graph, a, eps1: float, n: int) -> ReverseTrace:
    """Run n steps of the perturbed inverse dynamics from target a.

    Each step spreads a geometrically weighted budget delta_j over all
    currently-zero vertices except the longest-standing zero z1 (taken from a
    positive donor), then applies op_R at z1 and records x_j = z1.  The
    epsilon budget shrinks fast enough that replaying the sequence forward
    recovers the target to within eps1.
    """
    a = np.asarray(a, dtype=float).copy()
    if not in_U_star(a, g):
        raise SupportError("target must have a zero and no all-zero edge")
    nz = a[a > 0]
    if not (0 < eps1 < nz.min() / 2):
        raise SupportError(f"eps1 must lie in (0, {nz.min() / 2})")
    k = g.n
    # zero_run[x]: number of consecutive steps (including the current state)
    # in which x has been zero; drives the alpha ordering
    zero_run = np.where(a == 0.0, 1, 0).astype(np.int64)
    eps = float(eps1)
    xs: list[int] = []
    deltas: list[float] = []
    epsilons: list[float] = []
    underflow = False
    for j in range(1, n + 1):
        zeros = np.flatnonzero(a == 0.0)
        # longest-standing zero first; ties by index
        order = sorted(zeros, key=lambda x: (-zero_run[x], x))
        z1 = int(order[0])
        rest = order[1:]
        delta = min(eps / 2.0 ** (j + 1), float(a.max()) / 2.0)
        if delta <= 0.0:
            underflow = True
            break
        donor = int(np.argmax(a))
        spread = 0.0
        for r, z in enumerate(rest, start=2):
            w = delta / 2.0**r
            a[z] += w
            spread += w
        a[donor] -= spread
        a_next = op_R(a, z1, g)
        xs.append(z1)
        deltas.append(delta)
        epsilons.append(eps)
        a = a_next
        zero_run = np.where(a == 0.0, zero_run + 1, 0)
        nz = a[a > 0]
        eps = min(eps, float(nz.min())) / 4.0
        if eps <= 0.0:
            underflow = True
            break
    return ReverseTrace(xs=xs, deltas=deltas, epsilons=epsilons, endpoint=a, underflow=underflow)


def forward_replay(g: Graph, c, xseq) -> np.ndarray:
    """Apply op_T along the reversed vertex sequence and return the result."""
    b = np.asarray(c, dtype=float).copy()
    for y in reversed(list(xseq)):
        b = op_T(b, int(y), g)
    return b


def replay_until_close(
    g: Graph,
    a,
    c,
    eps1: float,
    step_cap: int = 10**5,
) -> tuple[np.ndarray, int]:
    """Grow the reverse sequence until replaying c lands within 2*eps1 of a.

    Doubles the sequence length n until |replay(c) - a|_1 <= 2*eps1 or the
    cap is reached.  Returns (final vector, n used); raises on cap hit.
    """
    a = np.asarray(a, dtype=float)
    n = max(4 * g.n, 16)
    while n <= step_cap:
        trace = reverse_sequence(g, a, eps1, n)
        c1 = forward_replay(g, c, trace.xs)
        if np.abs(c1 - a).sum() <= 2 * eps1:
            return c1, len(trace.xs)
        if trace.underflow:
            break
        n *= 2
    raise SupportError(f"replay did not reach the target within {step_cap} steps")
