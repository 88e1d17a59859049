"""Turning an overlapping cover into a disjoint partition."""

from __future__ import annotations

import enum
from typing import Optional

import numpy as np

from equiwide.cover import Cover
from equiwide.model import (
    ConstraintKind,
    DissimilarityMatrix,
    EquiwideError,
    Partition,
    WidthConstraint,
    radius,
)


class CoverInconsistencyError(EquiwideError):
    """The cover does not describe the population it is assigned over."""


class AssignmentStrategy(enum.Enum):
    CLOSEST_CENTER = "closest-center"
    LARGEST_FIRST = "largest-first"


def relabel_compact(P: Partition | list | tuple) -> Partition:
    """Renumber clusters 0..k-1 by first occurrence; centers follow their clusters."""
    labels = P.labels if isinstance(P, Partition) else tuple(P)
    centers = P.centers if isinstance(P, Partition) else None
    mapping: dict[int, int] = {}
    for lab in labels:
        if lab not in mapping:
            mapping[lab] = len(mapping)
    new_labels = tuple(mapping[lab] for lab in labels)
    new_centers = None
    if centers is not None:
        new_centers = [0] * len(mapping)
        for old, new in mapping.items():
            new_centers[new] = centers[old]
        new_centers = tuple(new_centers)
    return Partition(new_labels, new_centers)


def _relabel_with_centers(labels: list[int], centers: list[Optional[int]]) -> Partition:
    mapping: dict[int, int] = {}
    for lab in labels:
        if lab not in mapping:
            mapping[lab] = len(mapping)
    new_centers = [None] * len(mapping)
    for old, new in mapping.items():
        new_centers[new] = centers[old]
    return Partition(tuple(mapping[lab] for lab in labels), tuple(new_centers))


def assign_unique(
    cover: Cover,
    D: DissimilarityMatrix,
    c: WidthConstraint,
    strategy: AssignmentStrategy = AssignmentStrategy.CLOSEST_CENTER,
) -> Partition:
    """Give every element exactly one of the chosen sets containing it.

    Elements in a single chosen set stay there. Under a radius constraint
    each ball's center is pinned to its own ball, so every member stays
    within the threshold of a center of its cluster. The remaining
    (undecided) elements are resolved by ``strategy``:

    * closest-center: nearest provisional center among candidate clusters,
      the provisional center being the ball center (radius) or the radius
      center of the decided core (diameter); lowest cluster id on ties.
    * largest-first: clusters in decreasing decided-core size absorb all
      their still unassigned members.

    Clusters left empty are dropped and the rest relabelled compactly.
    Returned centers are ball centers (radius) or the radius center of each
    final cluster (diameter).
    """
    n = D.n
    if cover.universe_size != n:
        raise CoverInconsistencyError(
            f"cover is over {cover.universe_size} elements but the matrix has {n}"
        )
    strategy = AssignmentStrategy(strategy)
    k = len(cover.chosen)
    candidates: list[list[int]] = [[] for _ in range(n)]
    for j, s in enumerate(cover.chosen):
        for e in s.members:
            candidates[e].append(j)

    labels = [-1] * n
    pinned_centers: list[Optional[int]] = [None] * k
    if c.kind is ConstraintKind.RADIUS:
        for j, s in enumerate(cover.chosen):
            center = s.center if s.center is not None else radius(s.members, D)[1]
            if labels[center] == -1:
                labels[center] = j
                pinned_centers[j] = center

    for e in range(n):
        if labels[e] == -1 and len(candidates[e]) == 1:
            labels[e] = candidates[e][0]

    core_size = [0] * k
    for lab in labels:
        if lab >= 0:
            core_size[lab] += 1
    undecided = [e for e in range(n) if labels[e] == -1]

    if strategy is AssignmentStrategy.LARGEST_FIRST:
        _largest_first(labels, undecided, candidates, core_size)
    else:
        centers: list[Optional[int]] = list(pinned_centers)
        if c.kind is ConstraintKind.DIAMETER:
            for j in range(k):
                core = [e for e in range(n) if labels[e] == j]
                if core:
                    centers[j] = radius(core, D)[1]
        leftovers = []
        for e in undecided:
            options = [j for j in candidates[e] if centers[j] is not None]
            if not options:
                leftovers.append(e)
                continue
            dists = [D.values[centers[j], e] for j in options]
            labels[e] = options[int(np.argmin(dists))]
        if leftovers:
            _largest_first(labels, leftovers, candidates, core_size)

    if c.kind is ConstraintKind.RADIUS:
        return _relabel_with_centers(labels, pinned_centers)
    P = relabel_compact(labels)
    reps = tuple(radius(members, D)[1] for members in P.clusters())
    return Partition(P.labels, reps)


def _largest_first(labels, undecided, candidates, core_size) -> None:
    pending = set(undecided)
    order = sorted(range(len(core_size)), key=lambda j: (-core_size[j], j))
    for j in order:
        for e in sorted(pending):
            if j in candidates[e]:
                labels[e] = j
        pending = {e for e in pending if labels[e] == -1}
        if not pending:
            break
