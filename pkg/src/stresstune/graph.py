"""Dissimilarity graphs: construction from point sets, traversal, completion.

The central type is :class:`DissimilarityGraph`, an undirected weighted graph
over nodes ``0..n-1`` with a canonical edge order (sorted pairs ``i < j``),
which makes downstream seeded pipelines reproducible byte for byte.
"""

from __future__ import annotations

import csv
import os
from collections import deque
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse import triu as sparse_triu
from scipy.sparse.csgraph import connected_components as _csgraph_components
from scipy.sparse.csgraph import shortest_path as _csgraph_shortest_path
from scipy.spatial import cKDTree

from .core import (
    Configuration,
    DenseSymmetricMatrix,
    DisconnectedGraphError,
    StressTuneError,
)

# Zero-weight edges are kept traversable by bumping their stored weight to the
# smallest subnormal; adding it to any practical path length is a no-op.
_ZERO_WEIGHT_BUMP = 5e-324


class DissimilarityGraph:
    """Undirected graph with nonnegative edge weights (observed dissimilarities).

    Edges are canonicalized to ``i < j`` and sorted lexicographically; self
    loops and duplicate pairs are rejected. Instances are immutable.
    """

    def __init__(self, n: int, edges):
        if not isinstance(n, (int, np.integer)) or n < 1:
            raise ValueError("n must be a positive integer")
        if (
            isinstance(edges, tuple)
            and len(edges) == 3
            and all(isinstance(a, np.ndarray) for a in edges)
        ):
            ei, ej, w = edges
        else:
            triples = [(int(a), int(b), float(d)) for a, b, d in edges]
            ei = np.array([t[0] for t in triples], dtype=np.int64)
            ej = np.array([t[1] for t in triples], dtype=np.int64)
            w = np.array([t[2] for t in triples], dtype=np.float64)
        ei = np.asarray(ei, dtype=np.int64)
        ej = np.asarray(ej, dtype=np.int64)
        w = np.asarray(w, dtype=np.float64)
        if not (ei.shape == ej.shape == w.shape) or ei.ndim != 1:
            raise ValueError("edge arrays must be one-dimensional and equal length")
        if ei.size:
            if ei.min(initial=0) < 0 or ej.min(initial=0) < 0 or max(ei.max(), ej.max()) >= n:
                raise ValueError("edge endpoints must lie in [0, n)")
            if (ei == ej).any():
                raise ValueError("self loops are not allowed")
            if not np.isfinite(w).all() or (w < 0).any():
                raise ValueError("weights must be finite and nonnegative")
        lo = np.minimum(ei, ej)
        hi = np.maximum(ei, ej)
        order = np.lexsort((hi, lo))
        lo, hi, w = lo[order], hi[order], w[order]
        if lo.size > 1 and bool(((lo[1:] == lo[:-1]) & (hi[1:] == hi[:-1])).any()):
            raise ValueError("duplicate edges are not allowed")
        for a in (lo, hi, w):
            a.setflags(write=False)
        self._n = int(n)
        self.ei = lo
        self.ej = hi
        self.weights = w
        self._adj = None
        self._structure = None
        self._bumped = None

    @property
    def n(self) -> int:
        return self._n

    @property
    def edge_count(self) -> int:
        return int(self.ei.size)

    def _adj_csr(self) -> csr_matrix:
        """CSR adjacency with true weights (may hold explicit zeros); for slicing only."""
        if self._adj is None:
            rows = np.concatenate([self.ei, self.ej])
            cols = np.concatenate([self.ej, self.ei])
            data = np.concatenate([self.weights, self.weights])
            m = csr_matrix((data, (rows, cols)), shape=(self._n, self._n))
            m.sort_indices()
            self._adj = m
        return self._adj

    def structure_csr(self) -> csr_matrix:
        """CSR adjacency with unit weights, for unweighted traversals."""
        if self._structure is None:
            m = self._adj_csr().copy()
            m.data = np.ones_like(m.data)
            self._structure = m
        return self._structure

    def csgraph_csr(self) -> csr_matrix:
        """CSR adjacency safe for scipy.csgraph (zero weights bumped to subnormal)."""
        if self._bumped is None:
            m = self._adj_csr().copy()
            m.data = np.where(m.data > 0.0, m.data, _ZERO_WEIGHT_BUMP)
            self._bumped = m
        return self._bumped

    def neighbors(self, v: int) -> tuple[np.ndarray, np.ndarray]:
        """Neighbor indices (ascending) and matching weights for node ``v``."""
        adj = self._adj_csr()
        lo, hi = adj.indptr[v], adj.indptr[v + 1]
        return adj.indices[lo:hi], adj.data[lo:hi]

    def edge_weight(self, i: int, j: int) -> float:
        """Weight of edge ``{i, j}``; raises KeyError if absent."""
        nbrs, w = self.neighbors(i)
        pos = np.searchsorted(nbrs, j)
        if pos >= nbrs.size or nbrs[pos] != j:
            raise KeyError(f"no edge between {i} and {j}")
        return float(w[pos])

    def degrees(self) -> np.ndarray:
        adj = self._adj_csr()
        return np.diff(adj.indptr)


@dataclass(frozen=True)
class HopNeighborhood:
    """Nodes within ``h`` hops of ``center`` (members stored sorted ascending)."""

    center: int
    h: int
    members: tuple[int, ...]

    def __post_init__(self):
        if self.h < 1:
            raise ValueError("h must be >= 1")
        members = tuple(int(m) for m in self.members)
        if list(members) != sorted(set(members)):
            raise ValueError("members must be strictly increasing and unique")
        if self.center not in members:
            raise ValueError("center must belong to its own neighborhood")
        object.__setattr__(self, "members", members)

    @property
    def size(self) -> int:
        return len(self.members)


def knn_graph(config: Configuration, k: int) -> DissimilarityGraph:
    """Symmetrized k-nearest-neighbor graph with Euclidean edge weights.

    An edge is kept when either endpoint lists the other among its k nearest
    (union symmetrization), so every node ends with degree >= k.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = config.n
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    X = config.points
    tree = cKDTree(X)
    _, idx = tree.query(X, k=k + 1)
    idx = np.atleast_2d(idx)
    pairs = set()
    for i in range(n):
        row = [int(j) for j in idx[i] if int(j) != i][:k]
        for j in row:
            pairs.add((i, j) if i < j else (j, i))
    if not pairs:
        raise StressTuneError("k-NN construction produced no edges")
    ei = np.array([a for a, _ in sorted(pairs)], dtype=np.int64)
    ej = np.array([b for _, b in sorted(pairs)], dtype=np.int64)
    w = np.linalg.norm(X[ei] - X[ej], axis=1)
    return DissimilarityGraph(n, (ei, ej, w))


def knn_graph_from_matrix(matrix: DenseSymmetricMatrix, k: int) -> DissimilarityGraph:
    """Union-symmetrized k-NN graph over a precomputed dissimilarity matrix."""
    n = matrix.order
    if k < 1:
        raise ValueError("k must be >= 1")
    if n <= k:
        raise ValueError(f"need n > k, got n={n}, k={k}")
    D = matrix.values
    pairs = set()
    for i in range(n):
        order = np.argsort(D[i], kind="stable")
        row = [int(j) for j in order if int(j) != i][:k]
        for j in row:
            pairs.add((i, j) if i < j else (j, i))
    ei = np.array([a for a, _ in sorted(pairs)], dtype=np.int64)
    ej = np.array([b for _, b in sorted(pairs)], dtype=np.int64)
    w = D[ei, ej]
    return DissimilarityGraph(n, (ei, ej, w))


def radius_graph(config: Configuration, r: float) -> DissimilarityGraph:
    """Graph with an edge wherever ``||x_i - x_j|| <= r``."""
    if not (r > 0):
        raise ValueError("r must be positive")
    X = config.points
    tree = cKDTree(X)
    pairs = sorted(tree.query_pairs(r))
    ei = np.array([a for a, _ in pairs], dtype=np.int64)
    ej = np.array([b for _, b in pairs], dtype=np.int64)
    w = np.linalg.norm(X[ei] - X[ej], axis=1) if pairs else np.zeros(0)
    return DissimilarityGraph(config.n, (ei, ej, w))


def min_connectivity_radius(config: Configuration) -> float:
    """Longest edge of a Euclidean minimum spanning tree.

    The radius graph is connected at this value and disconnected at any
    strictly smaller one. Prim's algorithm over implicit dense distances.
    """
    X = config.points
    n = X.shape[0]
    if n < 2:
        raise ValueError("need at least two points")
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = np.linalg.norm(X - X[0], axis=1)
    best[0] = np.inf
    bottleneck = 0.0
    for _ in range(n - 1):
        d = np.where(in_tree, np.inf, best)
        v = int(np.argmin(d))
        bottleneck = max(bottleneck, float(d[v]))
        in_tree[v] = True
        best = np.minimum(best, np.linalg.norm(X - X[v], axis=1))
    return bottleneck


def hop_neighborhood(g: DissimilarityGraph, v: int, h: int) -> HopNeighborhood:
    """Breadth-first ball of radius ``h`` (in hops) around node ``v``."""
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range")
    if h < 1:
        raise ValueError("h must be >= 1")
    adj = g.structure_csr()
    seen = {v}
    frontier = deque([(v, 0)])
    while frontier:
        u, d = frontier.popleft()
        if d == h:
            continue
        for nb in adj.indices[adj.indptr[u] : adj.indptr[u + 1]]:
            nb = int(nb)
            if nb not in seen:
                seen.add(nb)
                frontier.append((nb, d + 1))
    return HopNeighborhood(center=v, h=h, members=tuple(sorted(seen)))


def hop_distances(g: DissimilarityGraph) -> np.ndarray:
    """All-pairs hop counts (float matrix, ``inf`` for unreachable pairs)."""
    return _csgraph_shortest_path(g.structure_csr(), method="D", directed=False, unweighted=True)


def _floyd_warshall_dense(n: int, ei, ej, w) -> np.ndarray:
    D = np.full((n, n), np.inf)
    np.fill_diagonal(D, 0.0)
    D[ei, ej] = w
    D[ej, ei] = w
    for k in range(n):
        np.minimum(D, D[:, k, None] + D[None, k, :], out=D)
    return D


def all_pairs_shortest_paths(
    g: DissimilarityGraph, method: str = "dijkstra"
) -> DenseSymmetricMatrix:
    """Complete the observed dissimilarities with weighted shortest-path lengths.

    Unreachable pairs get a ``+inf`` sentinel. ``method`` selects between the
    per-source Dijkstra fast path and the dense Floyd-Warshall reference; on
    additively exact weights (e.g. integers) the two agree bit for bit.
    """
    if method == "dijkstra":
        D = _snap_bumped_zeros(_csgraph_shortest_path(g.csgraph_csr(), method="D", directed=False))
    elif method == "floyd-warshall":
        D = _floyd_warshall_dense(g.n, g.ei, g.ej, g.weights)
    else:
        raise ValueError(f"unknown method {method!r}")
    D = np.minimum(D, D.T)
    return DenseSymmetricMatrix(D, allow_infinite=True)


def connected_components(g: DissimilarityGraph) -> list[list[int]]:
    """Partition of the nodes into connected components.

    Components are ordered by their smallest member; members are ascending.
    """
    _, labels = _csgraph_components(g.structure_csr(), directed=False)
    groups: dict[int, list[int]] = {}
    for node, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(node)
    return sorted(groups.values(), key=lambda c: c[0])


def is_connected(g: DissimilarityGraph) -> bool:
    return len(connected_components(g)) == 1


def induced_subgraph_csr(g: DissimilarityGraph, members: np.ndarray) -> csr_matrix:
    """CSR adjacency of the induced subgraph, rows/cols in ``members`` order."""
    sub = g._adj_csr()[members][:, members]
    return sub.tocsr()


def subgraph_edges(sub: csr_matrix) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unique edges (i < j) of a symmetric CSR adjacency, with true weights."""
    upper = sparse_triu(sub, k=1).tocoo()
    order = np.lexsort((upper.col, upper.row))
    return (
        upper.row[order].astype(np.int64),
        upper.col[order].astype(np.int64),
        upper.data[order].astype(np.float64),
    )


def _snap_bumped_zeros(D: np.ndarray) -> np.ndarray:
    # Zero-weight edges enter Dijkstra bumped to the smallest subnormal, so a
    # pure-zero path sums to < n * 5e-324, far below the smallest normal
    # float. Any path through a genuine positive weight is normal-sized, so
    # snapping subnormal outputs back to zero undoes the bump exactly.
    D[D < np.finfo(np.float64).tiny] = 0.0
    return D


def shortest_paths_csr(sub: csr_matrix) -> np.ndarray:
    """Per-source Dijkstra on a (bumped) CSR adjacency; symmetrized output."""
    data = np.where(sub.data > 0.0, sub.data, _ZERO_WEIGHT_BUMP)
    safe = csr_matrix((data, sub.indices, sub.indptr), shape=sub.shape)
    D = _snap_bumped_zeros(_csgraph_shortest_path(safe, method="D", directed=False))
    return np.minimum(D, D.T)


def write_edge_csv(g: DissimilarityGraph, path: str | os.PathLike) -> None:
    """Write edges as ``i,j,d`` rows in canonical order (repr floats)."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["i", "j", "d"])
        for a, b, d in zip(g.ei, g.ej, g.weights):
            writer.writerow([int(a), int(b), repr(float(d))])


def read_edge_csv(path: str | os.PathLike, n: int | None = None) -> DissimilarityGraph:
    """Read an edge list written by :func:`write_edge_csv`.

    ``n`` defaults to ``max(index) + 1``; pass it explicitly when trailing
    nodes are isolated (an edge list cannot represent them).
    """
    ei, ej, w = [], [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["i", "j", "d"]:
            raise ValueError(f"{path}: expected header i,j,d")
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            if len(rec) != 3:
                raise ValueError(f"{path}: row {lineno} has {len(rec)} fields, expected 3")
            try:
                ei.append(int(rec[0]))
                ej.append(int(rec[1]))
                w.append(float(rec[2]))
            except ValueError as exc:
                raise ValueError(f"{path}: row {lineno}: {exc}") from exc
    if not ei:
        raise ValueError(f"{path}: no edges")
    inferred = max(max(ei), max(ej)) + 1
    if n is None:
        n = inferred
    elif n < inferred:
        raise ValueError(f"{path}: edge endpoints exceed n={n}")
    return DissimilarityGraph(
        n, (np.array(ei, dtype=np.int64), np.array(ej, dtype=np.int64), np.array(w))
    )
