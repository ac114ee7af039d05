"""Graph families used by the deployment simulations.

Every generator returns an immutable :class:`Graph`. Explicit graphs keep a
CSR adjacency (``indptr``/``indices``, neighbors sorted ascending); cliques
are implicit and answer every query by formula, so a 10000-node clique never
materializes its ~5e7 edges.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Optional, TextIO

import numpy as np
import scipy.sparse as sp

from ._validation import check_node, check_positive_int, check_probability

KINDS = ("clique", "erdos_renyi", "barabasi_albert", "binary_tree")


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph on nodes ``0 .. node_count - 1``.

    Attributes
    ----------
    node_count : int
    kind : str
        One of ``clique``, ``erdos_renyi``, ``barabasi_albert``, ``binary_tree``.
    indptr, indices : ndarray or None
        CSR adjacency. ``None`` for the implicit clique.
    depth : ndarray or None
        Per-node depth, present iff ``kind == "binary_tree"``.
    """

    node_count: int
    kind: str
    indptr: Optional[np.ndarray] = field(default=None, repr=False)
    indices: Optional[np.ndarray] = field(default=None, repr=False)
    depth: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown graph kind {self.kind!r}; expected one of {KINDS}")
        if (self.depth is None) != (self.kind != "binary_tree"):
            raise ValueError("depth must be given exactly for binary_tree graphs")
        if self.kind != "clique" and (self.indptr is None or self.indices is None):
            raise ValueError(f"{self.kind} graphs need an explicit adjacency")
        for arr in (self.indptr, self.indices, self.depth):
            if arr is not None:
                arr.setflags(write=False)

    @property
    def implicit(self) -> bool:
        return self.indptr is None

    @property
    def edge_count(self) -> int:
        n = self.node_count
        if self.implicit:
            return n * (n - 1) // 2
        return int(self.indices.size) // 2

    def degree(self, v) -> int:
        v = check_node(self.node_count, v)
        if self.implicit:
            return self.node_count - 1
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        if self.implicit:
            return np.full(self.node_count, self.node_count - 1, dtype=np.int64)
        return np.diff(self.indptr).astype(np.int64)

    def neighbors(self, v) -> np.ndarray:
        v = check_node(self.node_count, v)
        if self.implicit:
            ids = np.arange(self.node_count, dtype=np.int64)
            return ids[ids != v]
        return self.indices[self.indptr[v]:self.indptr[v + 1]]

    def adjacency(self, v) -> frozenset:
        return frozenset(int(u) for u in self.neighbors(v))

    def depth_of(self, v) -> int:
        if self.depth is None:
            raise ValueError(f"depth is only defined on binary_tree graphs, not {self.kind}")
        return int(self.depth[check_node(self.node_count, v)])

    def edges(self) -> Iterator[tuple]:
        """Yield each undirected edge once as ``(u, v)`` with ``u < v``."""
        for u in range(self.node_count):
            for w in self.neighbors(u):
                if w > u:
                    yield u, int(w)

    def adjacency_matrix(self) -> sp.csr_matrix:
        n = self.node_count
        if self.implicit:
            dense = np.ones((n, n), dtype=np.int8) - np.eye(n, dtype=np.int8)
            return sp.csr_matrix(dense)
        return self._csr.copy()

    def adopted_neighbor_counts(self, adopted: np.ndarray) -> np.ndarray:
        """Number of adopted neighbors of every node, given a boolean flag vector."""
        adopted = np.asarray(adopted, dtype=bool)
        if self.implicit:
            return int(adopted.sum()) - adopted.astype(np.int64)
        return self._csr @ adopted.astype(np.int64)

    @cached_property
    def _csr(self) -> sp.csr_matrix:
        n = self.node_count
        data = np.ones(self.indices.size, dtype=np.int64)
        return sp.csr_matrix((data, self.indices, self.indptr), shape=(n, n))


def degree(g: Graph, v) -> int:
    return g.degree(v)


def _from_edges(n: int, u: np.ndarray, v: np.ndarray, kind: str, depth=None) -> Graph:
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    order = np.lexsort((cols, rows))
    rows, cols = rows[order], cols[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(rows, minlength=n), out=indptr[1:])
    return Graph(n, kind, indptr, cols, depth)


def make_clique(n) -> Graph:
    n = check_positive_int(n, "n")
    return Graph(n, "clique")


def _pair_from_linear(k: np.ndarray, n: int) -> tuple:
    """Map linear indices over the upper triangle (row-major, i < j) to pairs."""
    i_idx = np.arange(n, dtype=np.int64)
    # offsets[i] = number of pairs in rows < i
    offsets = i_idx * (2 * n - i_idx - 1) // 2
    i = np.searchsorted(offsets, k, side="right") - 1
    j = k - offsets[i] + i + 1
    return i, j


def make_erdos_renyi(n, edge_prob, rng) -> Graph:
    """G(n, p): each of the n(n-1)/2 pairs is present independently.

    Draws the edge count from Binomial(n(n-1)/2, p) and then a uniform subset
    of that size, which has the same law as independent per-pair coins.
    """
    n = check_positive_int(n, "n")
    edge_prob = check_probability(edge_prob, "edge_prob")
    rng = np.random.default_rng(rng)
    pairs = n * (n - 1) // 2
    m = int(rng.binomial(pairs, edge_prob)) if pairs else 0
    if m == pairs:
        k = np.arange(pairs, dtype=np.int64)
    else:
        k = np.sort(rng.choice(pairs, size=m, replace=False)).astype(np.int64)
    u, v = _pair_from_linear(k, n)
    return _from_edges(n, u, v, "erdos_renyi")


def make_barabasi_albert(n, ring_size, m, rng) -> Graph:
    """Preferential attachment grown from a ring of ``ring_size`` nodes.

    Each new node links to ``m`` distinct existing nodes picked with
    probability proportional to degree. Sampling draws uniformly from a list
    holding every node once per incident edge end; a repeat target is
    redrawn.
    """
    n = check_positive_int(n, "n")
    ring_size = check_positive_int(ring_size, "ring_size", minimum=3)
    m = check_positive_int(m, "m")
    if n < ring_size:
        raise ValueError(f"n ({n}) must be >= ring_size ({ring_size})")
    if m > ring_size:
        raise ValueError(f"m ({m}) must be <= ring_size ({ring_size})")
    rng = np.random.default_rng(rng)

    total_edges = ring_size + m * (n - ring_size)
    src = np.empty(total_edges, dtype=np.int64)
    dst = np.empty(total_edges, dtype=np.int64)
    ring = np.arange(ring_size)
    src[:ring_size] = ring
    dst[:ring_size] = (ring + 1) % ring_size

    ends = np.empty(2 * total_edges, dtype=np.int64)
    ends[:ring_size] = ring
    ends[ring_size:2 * ring_size] = ring
    filled = 2 * ring_size
    e = ring_size
    for new in range(ring_size, n):
        targets: list = []
        while len(targets) < m:
            t = int(ends[rng.integers(filled)])
            if t not in targets:
                targets.append(t)
        for t in targets:
            src[e] = new
            dst[e] = t
            e += 1
        ends[filled:filled + m] = targets
        ends[filled + m:filled + 2 * m] = new
        filled += 2 * m
    return _from_edges(n, src, dst, "barabasi_albert")


def tree_depths(n: int) -> np.ndarray:
    # floor(log2(k + 1)) without floating point
    return np.array([(k + 1).bit_length() - 1 for k in range(n)], dtype=np.int64)


def make_binary_tree(n) -> Graph:
    """Heap-ordered complete binary tree: node k has children 2k+1 and 2k+2."""
    n = check_positive_int(n, "n")
    child = np.arange(1, n, dtype=np.int64)
    parent = (child - 1) // 2
    return _from_edges(n, parent, child, "binary_tree", depth=tree_depths(n))


# -- edge-list text format ---------------------------------------------------

def write_edge_list(g: Graph, fh: TextIO) -> None:
    """Write ``n <count>``, a ``# kind`` comment, ``u v`` lines, then depths for trees."""
    fh.write(f"n {g.node_count}\n")
    fh.write(f"# kind {g.kind}\n")
    for u, v in g.edges():
        fh.write(f"{u} {v}\n")
    if g.depth is not None:
        fh.write("depths\n")
        for d in g.depth:
            fh.write(f"{int(d)}\n")


def read_edge_list(fh: TextIO, kind: Optional[str] = None) -> Graph:
    lines = [ln.strip() for ln in fh]
    if not lines or not lines[0].startswith("n "):
        raise ValueError("edge list must start with 'n <node_count>'")
    n = check_positive_int(int(lines[0].split()[1]), "node_count")
    u, v, depths = [], [], None
    for ln in lines[1:]:
        if not ln:
            continue
        if ln.startswith("#"):
            parts = ln[1:].split()
            if kind is None and len(parts) == 2 and parts[0] == "kind":
                kind = parts[1]
            continue
        if ln == "depths":
            depths = []
            continue
        if depths is not None:
            depths.append(int(ln))
            continue
        a, b = (int(x) for x in ln.split())
        if a == b:
            raise ValueError(f"self-loop on node {a}")
        if not (0 <= a < n and 0 <= b < n):
            raise ValueError(f"edge ({a}, {b}) out of range for n={n}")
        u.append(min(a, b))
        v.append(max(a, b))
    if len(set(zip(u, v))) != len(u):
        raise ValueError("duplicate edge in edge list")
    if depths is not None:
        if len(depths) != n:
            raise ValueError(f"expected {n} depths, got {len(depths)}")
        kind = kind or "binary_tree"
        depths = np.asarray(depths, dtype=np.int64)
    if kind is None:
        raise ValueError("graph kind unknown; pass kind= or include a '# kind' line")
    if kind == "clique":
        if len(u) != n * (n - 1) // 2:
            raise ValueError("clique edge list is not complete")
        return make_clique(n)
    return _from_edges(n, np.array(u, dtype=np.int64), np.array(v, dtype=np.int64), kind, depths)


def dumps_edge_list(g: Graph) -> str:
    buf = io.StringIO()
    write_edge_list(g, buf)
    return buf.getvalue()


def loads_edge_list(text: str, kind: Optional[str] = None) -> Graph:
    return read_edge_list(io.StringIO(text), kind=kind)
