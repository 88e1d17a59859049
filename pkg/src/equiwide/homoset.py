"""Enumeration of maximal homogeneous sets: radius balls and maximal cliques."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from equiwide.graph import ThresholdGraph, iter_bits
from equiwide.model import (
    DissimilarityMatrix,
    DomainError,
    HomogeneousSet,
    WidthConstraint,
)

DEFAULT_CLIQUE_CAP = 10**6


@dataclass(frozen=True)
class HomogeneousSetCollection:
    sets: tuple[HomogeneousSet, ...]
    constraint: Optional[WidthConstraint]
    n: int
    truncated: bool = False

    def __len__(self) -> int:
        return len(self.sets)

    def __iter__(self):
        return iter(self.sets)

    def __getitem__(self, i) -> HomogeneousSet:
        return self.sets[i]

    def masks(self) -> list[int]:
        return [s.mask for s in self.sets]

    def covers_universe(self) -> bool:
        acc = 0
        for s in self.sets:
            acc |= s.mask
        return acc == (1 << self.n) - 1


def radius_balls(D: DissimilarityMatrix, R_max: float) -> HomogeneousSetCollection:
    """One ball per element: everything within ``R_max`` of it, centered on it."""
    if not R_max >= 0:
        raise DomainError(f"R_max must be nonnegative, got {R_max}")
    within = D.values <= R_max
    sets = tuple(
        HomogeneousSet(tuple(int(j) for j in np.flatnonzero(within[i])), center=i)
        for i in range(D.n)
    )
    return HomogeneousSetCollection(sets, WidthConstraint.radius(R_max), D.n)


class _Stop(Exception):
    pass


def degeneracy_order(G: ThresholdGraph) -> list[int]:
    """Repeatedly remove a vertex of minimum remaining degree (lowest index on ties)."""
    n = G.n
    deg = G.adjacency.sum(axis=1).astype(np.int64)
    removed = np.zeros(n, dtype=bool)
    order = []
    big = np.iinfo(np.int64).max
    for _ in range(n):
        v = int(np.argmin(np.where(removed, big, deg)))
        order.append(v)
        removed[v] = True
        deg[list(G.neighbors[v])] -= 1
    return order


def maximal_cliques(
    G: ThresholdGraph,
    cap: int = DEFAULT_CLIQUE_CAP,
    deadline: Optional[float] = None,
) -> HomogeneousSetCollection:
    """All maximal cliques of ``G`` via pivoting Bron-Kerbosch.

    The outer loop follows a degeneracy ordering; inside, the pivot is the
    vertex of P | X with the most neighbors in P. Enumeration stops, with
    ``truncated`` set, once more than ``cap`` cliques exist or the
    ``deadline`` (a ``time.perf_counter()`` value) passes. Cliques are
    returned sorted by their member tuples.
    """
    if cap < 1:
        raise DomainError(f"cap must be at least 1, got {cap}")
    masks = G.masks
    found: list[tuple[int, ...]] = []
    calls = 0

    def expand(R: tuple, P: int, X: int) -> None:
        nonlocal calls
        if not P:
            if not X:
                if len(found) >= cap:
                    raise _Stop
                found.append(R)
            return
        calls += 1
        if deadline is not None and not calls & 0xFFF and time.perf_counter() > deadline:
            raise _Stop
        best = -1
        pivot_nbrs = 0
        for u in iter_bits(P | X):
            c = (P & masks[u]).bit_count()
            if c > best:
                best = c
                pivot_nbrs = masks[u]
        cand = P & ~pivot_nbrs
        while cand:
            low = cand & -cand
            v = low.bit_length() - 1
            nv = masks[v]
            expand(R + (v,), P & nv, X & nv)
            P ^= low
            X |= low
            cand ^= low

    truncated = False
    later = (1 << G.n) - 1
    try:
        for v in degeneracy_order(G):
            later &= ~(1 << v)
            expand((v,), masks[v] & later, masks[v] & ~later)
    except _Stop:
        truncated = True

    found = sorted(tuple(sorted(c)) for c in found)
    sets = tuple(HomogeneousSet(c) for c in found)
    constraint = None if G.threshold is None else WidthConstraint.diameter(G.threshold)
    return HomogeneousSetCollection(sets, constraint, G.n, truncated)


def prune_dominated(c: HomogeneousSetCollection) -> HomogeneousSetCollection:
    """Drop every set strictly contained in another; of equal sets keep the first.

    Radius balls come ordered by center, so the first of equal balls is the
    one with the lowest center.
    """
    s = len(c.sets)
    if s <= 1:
        return c
    M = np.zeros((s, c.n), dtype=np.float32)
    for i, hs in enumerate(c.sets):
        M[i, list(hs.members)] = 1.0
    sizes = M.sum(axis=1)
    keep = np.ones(s, dtype=bool)
    idx = np.arange(s)
    chunk = max(1, min(s, 2**24 // s))
    for start in range(0, s, chunk):
        stop = min(s, start + chunk)
        inter = M[start:stop] @ M.T
        rows = idx[start:stop]
        subset = inter == sizes[rows][:, None]
        strictly = subset & (sizes[None, :] > sizes[rows][:, None])
        equal_earlier = subset & (sizes[None, :] == sizes[rows][:, None]) & (idx[None, :] < rows[:, None])
        keep[start:stop] = ~np.any(strictly | equal_earlier, axis=1)
    sets = tuple(hs for hs, k in zip(c.sets, keep) if k)
    return HomogeneousSetCollection(sets, c.constraint, c.n, c.truncated)
