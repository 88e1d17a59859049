"""Compatibility graphs, complements, and the orderings built on them."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from equiwide.model import DissimilarityMatrix, DomainError


def _row_mask(row: np.ndarray) -> int:
    return int.from_bytes(np.packbits(row, bitorder="little").tobytes(), "little")


def iter_bits(mask: int):
    """Yield set bit positions of ``mask`` in increasing order."""
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class ThresholdGraph:
    """Undirected simple graph, stored as a boolean matrix, neighbor tuples and bitsets.

    An edge joins two elements whose dissimilarity is at most ``threshold``.
    Instances are immutable after construction.
    """

    def __init__(self, adjacency, threshold: Optional[float] = None):
        adj = np.array(adjacency, dtype=bool, copy=True)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise DomainError(f"adjacency must be square, got shape {adj.shape}")
        np.fill_diagonal(adj, False)
        if np.any(adj != adj.T):
            raise DomainError("adjacency must be symmetric")
        adj.setflags(write=False)
        self.adjacency = adj
        self.threshold = threshold
        self.neighbors = tuple(tuple(int(j) for j in np.flatnonzero(row)) for row in adj)
        self.masks = tuple(_row_mask(row) for row in adj)

    @property
    def n(self) -> int:
        return self.adjacency.shape[0]

    def degree(self, v: int) -> int:
        return len(self.neighbors[v])

    def has_edge(self, i: int, j: int) -> bool:
        return bool(self.adjacency[i, j])

    def edges(self) -> list[tuple[int, int]]:
        return [(i, j) for i in range(self.n) for j in self.neighbors[i] if i < j]

    def n_edges(self) -> int:
        return int(self.adjacency.sum()) // 2

    def __eq__(self, other) -> bool:
        if not isinstance(other, ThresholdGraph):
            return NotImplemented
        return type(self) is type(other) and np.array_equal(self.adjacency, other.adjacency)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n}, edges={self.n_edges()})"


class ComplementGraph(ThresholdGraph):
    """Incompatibility graph: an edge joins elements farther apart than the threshold."""


def build_threshold_graph(D: DissimilarityMatrix, T: float) -> ThresholdGraph:
    if not T >= 0:
        raise DomainError(f"threshold must be nonnegative, got {T}")
    return ThresholdGraph(D.values <= T, threshold=T)


def complement(G: ThresholdGraph) -> ThresholdGraph:
    """Complement on the same vertex set; maps threshold graphs to complement graphs and back."""
    cls = ThresholdGraph if isinstance(G, ComplementGraph) else ComplementGraph
    return cls(~G.adjacency, threshold=G.threshold)


def fpf_order(D: DissimilarityMatrix) -> list[int]:
    """Furthest-point-first ordering of the elements.

    The first element maximizes its total dissimilarity to all others; each
    next element maximizes its distance to the nearest already placed one.
    Ties go to the lowest index.
    """
    n = D.n
    if n < 1:
        raise DomainError("cannot order an empty population")
    vals = D.values
    first = int(np.argmax(vals.sum(axis=1)))
    order = [first]
    placed = np.zeros(n, dtype=bool)
    placed[first] = True
    dist_to_set = vals[first].copy()
    for _ in range(n - 1):
        cand = np.where(placed, -np.inf, dist_to_set)
        nxt = int(np.argmax(cand))
        order.append(nxt)
        placed[nxt] = True
        np.minimum(dist_to_set, vals[nxt], out=dist_to_set)
    return order


def greedy_independent_set(G: ThresholdGraph, order: Sequence[int]) -> list[int]:
    """Scan ``order`` and keep each vertex not adjacent to any vertex kept so far.

    On a threshold graph the result is a set of pairwise incompatible
    elements, so its size bounds the number of clusters from below.
    Returned in scan order.
    """
    if sorted(order) != list(range(G.n)):
        raise DomainError("order must be a permutation of the vertices")
    chosen: list[int] = []
    blocked = 0
    for v in order:
        if not (blocked >> v) & 1:
            chosen.append(v)
            blocked |= G.masks[v] | (1 << v)
    return chosen
