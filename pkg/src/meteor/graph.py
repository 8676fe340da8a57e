"""Finite simple graphs: cycles, tori, and custom edge lists.

Vertices are dense integer indices 0..n-1.  Torus coordinates map to indices
row-major, so ``build_torus(side, 1)`` has the same adjacency as
``build_cycle(side)``.  Graphs are immutable after construction and safe to
share between concurrent runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class GraphError(ValueError):
    pass


@dataclass(frozen=True)
class Graph:
    """Connected simple graph in CSR form.

    ``indptr``/``indices`` follow the usual compressed-sparse-row layout:
    the neighbors of v are ``indices[indptr[v]:indptr[v+1]]``, sorted.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    topology: str = "custom"
    side: int = 0
    dim: int = 0
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "degrees", np.diff(self.indptr).astype(np.int64))

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def degree(self, v: int) -> int:
        return int(self.degrees[v])

    @property
    def edge_count(self) -> int:
        return int(self.indices.size) // 2

    def edges(self):
        for v in range(self.n):
            for w in self.neighbors(v):
                if v < w:
                    yield (v, int(w))


def _from_adjacency_sets(n, adj, topology="custom", side=0, dim=0) -> Graph:
    indptr = np.zeros(n + 1, dtype=np.int64)
    for v in range(n):
        indptr[v + 1] = indptr[v] + len(adj[v])
    indices = np.empty(indptr[-1], dtype=np.int64)
    for v in range(n):
        indices[indptr[v] : indptr[v + 1]] = sorted(adj[v])
    g = Graph(n=n, indptr=indptr, indices=indices, topology=topology, side=side, dim=dim)
    if not _connected(g):
        raise GraphError("graph is not connected")
    return g


def _connected(g: Graph) -> bool:
    if g.n == 0:
        return False
    seen = np.zeros(g.n, dtype=bool)
    stack = [0]
    seen[0] = True
    count = 1
    while stack:
        v = stack.pop()
        for w in g.neighbors(v):
            if not seen[w]:
                seen[w] = True
                count += 1
                stack.append(int(w))
    return count == g.n


def build_cycle(k: int) -> Graph:
    """Cycle on k >= 3 vertices; vertex j is adjacent to (j-1) % k and (j+1) % k."""
    if k < 3:
        raise GraphError(f"cycle needs at least 3 vertices, got {k}")
    adj = [{(j - 1) % k, (j + 1) % k} for j in range(k)]
    return _from_adjacency_sets(k, adj, topology="cycle", side=k, dim=1)


def torus_index(coords, side: int) -> int:
    """Row-major index of a torus coordinate tuple."""
    idx = 0
    for c in coords:
        idx = idx * side + (c % side)
    return idx


def torus_coords(idx: int, side: int, d: int):
    out = []
    for _ in range(d):
        out.append(idx % side)
        idx //= side
    return tuple(reversed(out))


def build_torus(side: int, d: int) -> Graph:
    """d-fold product of cycles with the given side; every vertex has degree 2d."""
    if side < 3:
        raise GraphError(f"torus side must be >= 3, got {side}")
    if d < 1:
        raise GraphError(f"torus dimension must be >= 1, got {d}")
    n = side**d
    if n > 10**8:
        raise GraphError(f"torus with side^d = {n} vertices is too large")
    adj = [set() for _ in range(n)]
    strides = [side ** (d - 1 - i) for i in range(d)]
    for idx in range(n):
        coords = torus_coords(idx, side, d)
        for axis in range(d):
            for step in (-1, 1):
                c = coords[axis]
                w = idx + ((c + step) % side - c) * strides[axis]
                adj[idx].add(w)
    return _from_adjacency_sets(n, adj, topology="torus", side=side, dim=d)


def build_path(k: int) -> Graph:
    """Path graph 0-1-...-(k-1); the 1D window used to approximate the line."""
    if k < 2:
        raise GraphError(f"path needs at least 2 vertices, got {k}")
    adj = [set() for _ in range(k)]
    for j in range(k - 1):
        adj[j].add(j + 1)
        adj[j + 1].add(j)
    return _from_adjacency_sets(k, adj, topology="window", side=k, dim=1)


def build_grid_window(side: int, d: int) -> Graph:
    """d-dimensional side^d box without wrap-around (window into the lattice)."""
    if side < 2 or d < 1:
        raise GraphError("grid window needs side >= 2 and d >= 1")
    n = side**d
    adj = [set() for _ in range(n)]
    strides = [side ** (d - 1 - i) for i in range(d)]
    for idx in range(n):
        coords = torus_coords(idx, side, d)
        for axis in range(d):
            for step in (-1, 1):
                c = coords[axis] + step
                if 0 <= c < side:
                    adj[idx].add(idx + step * strides[axis])
    return _from_adjacency_sets(n, adj, topology="window", side=side, dim=d)


def build_from_edges(n: int, edges) -> Graph:
    """Graph with exactly the given undirected edges; must be connected."""
    if n < 1:
        raise GraphError("need at least one vertex")
    adj = [set() for _ in range(n)]
    seen = set()
    for u, v in edges:
        u, v = int(u), int(v)
        if not (0 <= u < n and 0 <= v < n):
            raise GraphError(f"edge ({u},{v}) out of range for n={n}")
        if u == v:
            raise GraphError(f"self-loop at vertex {u}")
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphError(f"duplicate edge {key}")
        seen.add(key)
        adj[u].add(v)
        adj[v].add(u)
    return _from_adjacency_sets(n, adj, topology="custom")


def load_edge_list(path) -> Graph:
    """Read a plain-text edge list: first line "n m", then m lines "u v"."""
    with open(path) as f:
        tokens = f.read().split()
    if len(tokens) < 2:
        raise GraphError("edge list file too short")
    n, m = int(tokens[0]), int(tokens[1])
    if len(tokens) != 2 + 2 * m:
        raise GraphError(f"expected {m} edges, file has {(len(tokens) - 2) // 2}")
    pairs = [(int(tokens[2 + 2 * i]), int(tokens[3 + 2 * i])) for i in range(m)]
    return build_from_edges(n, pairs)
