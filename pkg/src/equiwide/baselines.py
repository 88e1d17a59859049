"""Comparison algorithms: complete-link HAC, DSATUR coloring and CLUSTERGRAPH."""

from __future__ import annotations

import sys
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from equiwide.graph import (
    ThresholdGraph,
    build_threshold_graph,
    complement,
    fpf_order,
    greedy_independent_set,
)
from equiwide.model import DissimilarityMatrix, DomainError, Partition, diameter


@dataclass(frozen=True)
class Coloring:
    colors: tuple[int, ...]
    k: int = field(init=False)
    proven: bool = False

    def __post_init__(self):
        colors = tuple(int(c) for c in self.colors)
        object.__setattr__(self, "colors", colors)
        k = max(colors) + 1 if colors else 0
        if len(set(colors)) != k:
            raise DomainError("color ids must be 0..k-1 with every id used")
        object.__setattr__(self, "k", k)

    def is_proper(self, G: ThresholdGraph) -> bool:
        return all(self.colors[i] != self.colors[j] for i, j in G.edges())


@dataclass(frozen=True)
class Dendrogram:
    """Merges as (cluster a, cluster b, distance); the merged cluster keeps id a."""

    n: int
    merges: tuple[tuple[int, int, float], ...]

    def cut(self, T: float) -> Partition:
        parent = list(range(self.n))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for a, b, dist in self.merges:
            if dist > T:
                break
            parent[find(b)] = find(a)
        return _compact([find(i) for i in range(self.n)])


def _compact(labels: Sequence[int]) -> Partition:
    mapping: dict[int, int] = {}
    for lab in labels:
        mapping.setdefault(lab, len(mapping))
    return Partition(tuple(mapping[lab] for lab in labels))


def complete_link_dendrogram(D: DissimilarityMatrix, T: float = np.inf) -> Dendrogram:
    """Complete-link agglomeration, stopping once the closest pair is farther than ``T``.

    Cluster ids are the lowest member index; the closest pair is merged
    first with the lexicographically smallest id pair winning ties.
    Distances are updated with the Lance-Williams max rule.
    """
    n = D.n
    M = D.values.copy()
    np.fill_diagonal(M, np.inf)
    row_arg = np.argmin(M, axis=1) if n else np.zeros(0, dtype=np.intp)
    row_min = M[np.arange(n), row_arg] if n else np.zeros(0)
    merges = []
    for _ in range(n - 1):
        a = int(np.argmin(row_min))
        b = int(row_arg[a])
        dist = float(row_min[a])
        if dist > T or not np.isfinite(dist):
            break
        a, b = min(a, b), max(a, b)
        merges.append((a, b, dist))
        merged = np.maximum(M[a], M[b])
        merged[a] = np.inf
        M[a, :] = merged
        M[:, a] = merged
        M[b, :] = np.inf
        M[:, b] = np.inf
        row_min[b] = np.inf
        for r in np.flatnonzero((row_arg == a) | (row_arg == b)).tolist() + [a]:
            if r == b:
                continue
            row_arg[r] = int(np.argmin(M[r]))
            row_min[r] = M[r, row_arg[r]]
        # other rows only saw entries grow, so their minimum is unchanged
    return Dendrogram(n, tuple(merges))


def hac_complete_link(D: DissimilarityMatrix, T: float) -> Partition:
    """Complete-link clustering cut at ``T``: diameter-homogeneous, no optimality claim."""
    if not T >= 0:
        raise DomainError(f"threshold must be nonnegative, got {T}")
    return complete_link_dendrogram(D, T).cut(T)


def dsatur_heuristic(G: ThresholdGraph) -> Coloring:
    """Greedy DSATUR: most saturated vertex first, then higher degree, then lower index."""
    n = G.n
    masks = G.masks
    degree = [G.degree(v) for v in range(n)]
    colors = [-1] * n
    sat = [0] * n
    uncolored = set(range(n))
    while uncolored:
        v = max(uncolored, key=lambda u: (sat[u].bit_count(), degree[u], -u))
        forbidden = sat[v]
        c = 0
        while (forbidden >> c) & 1:
            c += 1
        colors[v] = c
        uncolored.discard(v)
        bit = 1 << c
        m = masks[v]
        while m:
            low = m & -m
            sat[low.bit_length() - 1] |= bit
            m ^= low
    return Coloring(tuple(colors))


def greedy_clique(G: ThresholdGraph, order: Sequence[int]) -> list[int]:
    """Vertices of ``order`` kept when adjacent to every vertex kept before them."""
    return greedy_independent_set(complement(G), order)


@contextmanager
def _recursion_room(depth: int):
    old = sys.getrecursionlimit()
    if depth + 200 > old:
        sys.setrecursionlimit(depth + 200)
    try:
        yield
    finally:
        sys.setrecursionlimit(old)


class _ColoringSearch:
    """DSATUR branch-and-bound looking for colorings with fewer than ``bound`` colors."""

    def __init__(self, G: ThresholdGraph, clique: Sequence[int], bound: int,
                 deadline: Optional[float], first_only: bool = False):
        self.n = G.n
        self.masks = G.masks
        self.degree = [G.degree(v) for v in range(G.n)]
        self.colors = [-1] * G.n
        self.sat = [0] * G.n
        self.uncolored = set(range(G.n))
        self.bound = bound
        self.lower = len(clique)
        self.best: Optional[list[int]] = None
        self.deadline = deadline
        self.first_only = first_only
        self.nodes = 0
        self.timed_out = False
        self.finished = False
        for c, v in enumerate(clique):
            self._assign(v, c)
        self.k_used = len(clique)

    def _assign(self, v: int, c: int) -> list[tuple[int, int]]:
        self.colors[v] = c
        self.uncolored.discard(v)
        bit = 1 << c
        changed = []
        sat = self.sat
        m = self.masks[v]
        while m:
            low = m & -m
            u = low.bit_length() - 1
            m ^= low
            if not sat[u] & bit:
                changed.append((u, sat[u]))
                sat[u] |= bit
        return changed

    def _unassign(self, v: int, changed) -> None:
        self.colors[v] = -1
        self.uncolored.add(v)
        for u, old in changed:
            self.sat[u] = old

    def run(self) -> None:
        self._search(self.k_used)

    def _search(self, k_used: int) -> None:
        if not self.uncolored:
            self.best = list(self.colors)
            self.bound = k_used
            if self.first_only or self.bound <= self.lower:
                self.finished = True
            return
        self.nodes += 1
        if self.deadline is not None and not self.nodes & 0x3FF:
            if time.perf_counter() > self.deadline:
                self.timed_out = True
        if self.timed_out or k_used >= self.bound:
            return
        sat, degree = self.sat, self.degree
        v = max(self.uncolored, key=lambda u: (sat[u].bit_count(), degree[u], -u))
        forbidden = sat[v]
        for c in range(k_used):
            if (forbidden >> c) & 1:
                continue
            if k_used >= self.bound:
                return
            changed = self._assign(v, c)
            self._search(k_used)
            self._unassign(v, changed)
            if self.finished or self.timed_out:
                return
        if k_used + 1 < self.bound:
            changed = self._assign(v, k_used)
            self._search(k_used + 1)
            self._unassign(v, changed)


def _clique_order(G: ThresholdGraph, order: Optional[Sequence[int]]) -> list[int]:
    if order is not None:
        return list(order)
    return sorted(range(G.n), key=lambda v: (-G.degree(v), v))


def exact_coloring(
    G: ThresholdGraph,
    time_limit: Optional[float] = None,
    order: Optional[Sequence[int]] = None,
) -> Coloring:
    """Minimum proper coloring by DSATUR branch-and-bound.

    The DSATUR heuristic gives the first upper bound. A greedy clique built
    along ``order`` (pass the furthest-point-first order of the source
    matrix for complement graphs; highest degree first otherwise) is
    precolored and gives the lower bound. New colors are only opened one
    at a time, which removes color-permutation symmetry.
    When ``time_limit`` (seconds) expires the best coloring found is
    returned with ``proven=False``.
    """
    n = G.n
    if n == 0:
        return Coloring((), proven=True)
    heuristic = dsatur_heuristic(G)
    clique = greedy_clique(G, _clique_order(G, order))
    if heuristic.k <= len(clique):
        return Coloring(heuristic.colors, proven=True)
    deadline = None if time_limit is None else time.perf_counter() + time_limit
    search = _ColoringSearch(G, clique, heuristic.k, deadline)
    with _recursion_room(n):
        search.run()
    if search.best is None:
        return Coloring(heuristic.colors, proven=not search.timed_out)
    return Coloring(_canonical(search.best), proven=not search.timed_out)


def _canonical(colors: Sequence[int]) -> tuple[int, ...]:
    mapping: dict[int, int] = {}
    for c in colors:
        mapping.setdefault(c, len(mapping))
    return tuple(mapping[c] for c in colors)


def k_coloring(
    G: ThresholdGraph,
    k: int,
    deadline: Optional[float] = None,
    order: Optional[Sequence[int]] = None,
) -> tuple[Optional[Coloring], bool]:
    """A proper coloring with at most ``k`` colors, or None; second item is False on timeout."""
    if G.n == 0:
        return Coloring(()), True
    heuristic = dsatur_heuristic(G)
    if heuristic.k <= k:
        return heuristic, True
    clique = greedy_clique(G, _clique_order(G, order))
    if len(clique) > k:
        return None, True
    search = _ColoringSearch(G, clique, k + 1, deadline, first_only=True)
    with _recursion_room(G.n):
        search.run()
    if search.best is None:
        return None, not search.timed_out
    return Coloring(_canonical(search.best)), True


def coloring_to_partition(col: Coloring) -> Partition:
    """Same color, same cluster."""
    return Partition(col.colors)


@dataclass(frozen=True)
class ClustergraphResult:
    partition: Partition
    achieved_diameter: float
    threshold: float
    proven: bool


def clustergraph(
    D: DissimilarityMatrix,
    D_max: float,
    time_limit: Optional[float] = None,
) -> ClustergraphResult:
    """Fewest clusters under ``D_max``, then the smallest achievable maximum diameter.

    The chromatic number k* of the incompatibility graph at ``D_max`` fixes
    the cluster count; a binary search over the distinct dissimilarity
    values up to ``D_max`` then finds the smallest threshold whose
    incompatibility graph is still k*-colorable.
    """
    if not D_max >= 0:
        raise DomainError(f"threshold must be nonnegative, got {D_max}")
    start = time.perf_counter()
    deadline = None if time_limit is None else start + time_limit
    order = fpf_order(D) if D.n else []
    top = exact_coloring(complement(build_threshold_graph(D, D_max)), time_limit, order)
    proven = top.proven
    k_star = top.k
    vals = D.values[np.triu_indices(D.n, k=1)]
    candidates = np.unique(np.concatenate(([0.0], vals[vals <= D_max])))
    best = top
    best_T = float(D_max)
    lo, hi = 0, len(candidates) - 1
    # invariant: candidates[hi] admits a k*-coloring
    if candidates[hi] < D_max:
        best_T = float(candidates[hi])
    while lo < hi and proven:
        mid = (lo + hi) // 2
        T_mid = float(candidates[mid])
        col, finished = k_coloring(complement(build_threshold_graph(D, T_mid)), k_star, deadline, order)
        if not finished:
            proven = False
            break
        if col is not None:
            hi = mid
            best, best_T = col, T_mid
        else:
            lo = mid + 1
    P = coloring_to_partition(best)
    achieved = max((diameter(c, D) for c in P.clusters()), default=0.0)
    return ClustergraphResult(P, achieved, best_T, proven)
