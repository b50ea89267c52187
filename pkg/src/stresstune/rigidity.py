"""Trilateration orderings and incremental embedding along them.

A graph admits a trilaterative ordering for dimension ``p`` when some
``p+1``-clique can seed a vertex order in which every later vertex is
adjacent to at least ``p+1`` of its predecessors. Such graphs are uniquely
localizable from exact dissimilarities: embed the seed clique by classical
scaling, then trilaterate each next vertex from its placed neighbors.
"""

from __future__ import annotations

import heapq
import warnings
from dataclasses import dataclass

import numpy as np

from .core import (
    Configuration,
    DegenerateGeometryError,
    DenseSymmetricMatrix,
    StressTuneError,
)
from .embed import classical_scaling, trilaterate
from .graph import DissimilarityGraph

DEFAULT_SEED_CLIQUE_CAP = 10_000


@dataclass(frozen=True)
class TrilaterativeOrdering:
    """A full vertex ordering whose first ``p+1`` nodes form the seed clique."""

    p: int
    order: tuple[int, ...]

    def __post_init__(self):
        if self.p < 1:
            raise ValueError("p must be >= 1")
        order = tuple(int(v) for v in self.order)
        if len(order) < self.p + 1:
            raise ValueError("ordering must contain at least p+1 vertices")
        if sorted(order) != list(range(len(order))):
            raise ValueError("ordering must be a permutation of 0..n-1")
        object.__setattr__(self, "order", order)

    @property
    def seed_clique(self) -> tuple[int, ...]:
        return self.order[: self.p + 1]


def verify_trilaterative_ordering(g: DissimilarityGraph, ordering: TrilaterativeOrdering) -> bool:
    """Direct predecessor-count check of the ordering property.

    Independent of how the ordering was found: confirms the seed is a clique
    and that each later vertex has >= p+1 neighbors among its predecessors.
    """
    if len(ordering.order) != g.n:
        return False
    p = ordering.p
    seed = ordering.seed_clique
    for a in range(len(seed)):
        for b in range(a + 1, len(seed)):
            try:
                g.edge_weight(seed[a], seed[b])
            except KeyError:
                return False
    placed = set(seed)
    for v in ordering.order[p + 1 :]:
        nbrs, _ = g.neighbors(v)
        if sum(1 for u in nbrs if int(u) in placed) < p + 1:
            return False
        placed.add(v)
    return True


def _cliques(adj: list[set[int]], size: int):
    """Yield cliques of the given size as ascending tuples, lexicographically."""

    def extend(clique, common):
        if len(clique) == size:
            yield tuple(clique)
            return
        for u in sorted(common):
            narrowed = {x for x in common & adj[u] if x > u}
            yield from extend(clique + [u], narrowed)

    for v in range(len(adj)):
        above = {u for u in adj[v] if u > v}
        yield from extend([v], above)


def _greedy_closure(g: DissimilarityGraph, seed: tuple[int, ...], p: int) -> list[int] | None:
    """Grow the seed by repeatedly appending the lowest-index eligible vertex."""
    n = g.n
    placed = np.zeros(n, dtype=bool)
    counts = np.zeros(n, dtype=np.int64)
    order = list(seed)
    for v in seed:
        placed[v] = True
    heap: list[int] = []
    for v in seed:
        nbrs, _ = g.neighbors(v)
        for u in nbrs:
            u = int(u)
            if not placed[u]:
                counts[u] += 1
                if counts[u] == p + 1:
                    heapq.heappush(heap, u)
    while heap:
        u = heapq.heappop(heap)
        if placed[u]:
            continue
        placed[u] = True
        order.append(u)
        nbrs, _ = g.neighbors(u)
        for w in nbrs:
            w = int(w)
            if not placed[w]:
                counts[w] += 1
                if counts[w] == p + 1:
                    heapq.heappush(heap, w)
    return order if len(order) == n else None


def find_trilaterative_ordering(
    g: DissimilarityGraph, p: int, max_seed_cliques: int = DEFAULT_SEED_CLIQUE_CAP
) -> TrilaterativeOrdering | None:
    """Search for a trilaterative ordering by greedy closure over seed cliques.

    Seed ``p+1``-cliques are enumerated lexicographically; each is grown by
    the monotone closure rule until it either covers the graph (success) or
    stalls. Returns None when no enumerated seed closes; hitting the
    enumeration cap additionally emits a warning, since a valid ordering may
    exist beyond it.
    """
    if p < 1:
        raise ValueError("p must be >= 1")
    if max_seed_cliques < 1:
        raise ValueError("max_seed_cliques must be >= 1")
    adj = [set() for _ in range(g.n)]
    for a, b in zip(g.ei, g.ej):
        adj[int(a)].add(int(b))
        adj[int(b)].add(int(a))
    tried = 0
    for seed in _cliques(adj, p + 1):
        if tried >= max_seed_cliques:
            warnings.warn(
                f"seed-clique cap {max_seed_cliques} reached without a closing seed; "
                "an ordering may still exist",
                stacklevel=2,
            )
            return None
        tried += 1
        order = _greedy_closure(g, seed, p)
        if order is not None:
            return TrilaterativeOrdering(p=p, order=tuple(order))
    return None


def sequential_trilateration(
    g: DissimilarityGraph, ordering: TrilaterativeOrdering, p: int
) -> Configuration:
    """Embed along a trilaterative ordering.

    The seed clique is embedded by classical scaling of its (complete)
    dissimilarity submatrix; every later vertex is trilaterated from all of
    its already-placed neighbors. Exact distances give exact recovery up to
    a rigid map.
    """
    if ordering.p != p:
        raise ValueError("ordering was built for a different dimension")
    if len(ordering.order) != g.n:
        raise ValueError("ordering must cover every node")
    seed = ordering.seed_clique
    k = len(seed)
    D = np.zeros((k, k))
    for a in range(k):
        for b in range(a + 1, k):
            try:
                D[a, b] = D[b, a] = g.edge_weight(seed[a], seed[b])
            except KeyError as exc:
                raise StressTuneError(
                    f"seed clique is missing the dissimilarity between "
                    f"{seed[a]} and {seed[b]}"
                ) from exc
    coords = np.zeros((g.n, p))
    placed = np.zeros(g.n, dtype=bool)
    seed_idx = np.array(seed, dtype=np.int64)
    coords[seed_idx] = classical_scaling(DenseSymmetricMatrix(D), p).points
    placed[seed_idx] = True
    for v in ordering.order[k:]:
        nbrs, w = g.neighbors(v)
        mask = placed[nbrs]
        landmarks = nbrs[mask]
        if landmarks.size < p + 1:
            raise StressTuneError(
                f"node {v} has only {landmarks.size} placed neighbors; ordering is invalid"
            )
        try:
            coords[v] = trilaterate(Configuration(coords[landmarks]), w[mask])
        except DegenerateGeometryError as exc:
            raise DegenerateGeometryError(f"degenerate landmarks at node {v}: {exc}") from exc
        placed[v] = True
    return Configuration(coords)
