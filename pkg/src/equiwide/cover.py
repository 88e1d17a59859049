"""Minimum set cover of the population by homogeneous sets.

Three solvers share one representation (sets as integer bitmasks over the
elements): a greedy heuristic, an exact depth-first branch-and-bound, and
an enumeration of every minimum-cardinality cover.
"""

from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from equiwide.graph import iter_bits
from equiwide.homoset import HomogeneousSetCollection
from equiwide.model import (
    ConstraintKind,
    DissimilarityMatrix,
    DomainError,
    EquiwideError,
    HomogeneousSet,
    WidthConstraint,
    eccentricity,
    radius,
)

DEFAULT_ENUM_LIMIT = 10**5


class InfeasibleCoverError(EquiwideError):
    """Some element belongs to no set of the collection."""


class TruncatedCollectionError(DomainError):
    """An exact solver was handed a truncated enumeration."""


class SubObjective(enum.Enum):
    NONE = "none"
    MAX_WIDTH = "max-width"
    WCSD = "wcsd"
    SIZE_VARIANCE = "variance"


@dataclass(frozen=True)
class Cover:
    """Sets chosen from a collection; ``indices`` point back into it."""

    chosen: tuple[HomogeneousSet, ...]
    universe_size: int
    indices: tuple[int, ...] = ()
    constraint: Optional[WidthConstraint] = None
    proven: bool = False

    def __post_init__(self):
        acc = 0
        for s in self.chosen:
            acc |= s.mask
        if acc != (1 << self.universe_size) - 1:
            missing = next(iter_bits(((1 << self.universe_size) - 1) & ~acc))
            raise InfeasibleCoverError(f"element {missing} is not covered")

    def __len__(self) -> int:
        return len(self.chosen)

    def is_irredundant(self) -> bool:
        for i in range(len(self.chosen)):
            rest = 0
            for j, s in enumerate(self.chosen):
                if j != i:
                    rest |= s.mask
            if rest == (1 << self.universe_size) - 1:
                return False
        return True


@dataclass(frozen=True)
class CoverEnumeration:
    covers: list[Cover] = field(default_factory=list)
    optimum: int = 0
    complete: bool = True

    def __len__(self) -> int:
        return len(self.covers)

    def __iter__(self):
        return iter(self.covers)

    def __getitem__(self, i) -> Cover:
        return self.covers[i]


def _make_cover(c: HomogeneousSetCollection, indices: Sequence[int], proven: bool) -> Cover:
    indices = tuple(sorted(indices))
    return Cover(tuple(c.sets[i] for i in indices), c.n, indices, c.constraint, proven)


def harmonic(n: int) -> float:
    return sum(1.0 / k for k in range(1, n + 1))


def greedy_cover(c: HomogeneousSetCollection) -> Cover:
    """Pick the set covering the most uncovered elements until all are covered.

    Ties go to the set with the lowest first member, then to the earliest
    set in the collection.
    """
    masks = c.masks()
    uncovered = (1 << c.n) - 1
    firsts = [s.members[0] for s in c.sets]
    chosen: list[int] = []
    while uncovered:
        best, best_key = -1, None
        for i, m in enumerate(masks):
            gain = (m & uncovered).bit_count()
            if gain == 0:
                continue
            key = (-gain, firsts[i], i)
            if best_key is None or key < best_key:
                best, best_key = i, key
        if best < 0:
            missing = next(iter_bits(uncovered))
            raise InfeasibleCoverError(f"element {missing} belongs to no set")
        chosen.append(best)
        uncovered &= ~masks[best]
    return _make_cover(c, chosen, proven=False)


def _reduce_elements(masks: list[int], n: int, universe: int) -> int:
    """Drop elements implied by others: if every set holding e also holds f, f is redundant."""
    elems = list(iter_bits(universe))
    s = len(masks)
    if len(elems) * s > 5 * 10**7 or len(elems) < 2:
        return universe
    E = np.zeros((len(elems), s), dtype=np.float32)
    pos = {e: k for k, e in enumerate(elems)}
    for i, m in enumerate(masks):
        for e in iter_bits(m & universe):
            E[pos[e], i] = 1.0
    deg = E.sum(axis=1)
    inter = E @ E.T
    # implied[f, e]: sets(e) is a subset of sets(f)
    implied = inter == deg[None, :]
    np.fill_diagonal(implied, False)
    idx = np.arange(len(elems))
    same = deg[:, None] == deg[None, :]
    # of two elements with identical set lists keep the lower one
    implied &= ~same | (idx[None, :] < idx[:, None])
    drop = np.any(implied, axis=1)
    for k in np.flatnonzero(drop):
        universe &= ~(1 << elems[k])
    return universe


class _BranchAndBound:
    """Depth-first search over covers, branching on the least-covered element."""

    def __init__(self, masks: list[int], universe: int, deadline: Optional[float]):
        self.masks = masks
        self.members = [list(iter_bits(m & universe)) for m in masks]
        n = universe.bit_length()
        self.containing: list[list[int]] = [[] for _ in range(n)]
        for i, mem in enumerate(self.members):
            for e in mem:
                self.containing[e].append(i)
        self.avail = [len(cs) for cs in self.containing]
        self.excluded = bytearray(len(masks))
        self.universe = universe
        self.deadline = deadline
        self.nodes = 0
        self.timed_out = False

    def _exclude(self, s: int) -> None:
        self.excluded[s] = 1
        for e in self.members[s]:
            self.avail[e] -= 1

    def _include(self, s: int) -> None:
        self.excluded[s] = 0
        for e in self.members[s]:
            self.avail[e] += 1

    def _lower_bound(self, uncovered: int, elems: list[int]) -> int:
        # elements that pairwise share no available set need distinct sets
        masks, excluded, containing = self.masks, self.excluded, self.containing
        blocked = 0
        packed = 0
        for e in elems:
            if (blocked >> e) & 1:
                continue
            packed += 1
            for s in containing[e]:
                if not excluded[s]:
                    blocked |= masks[s]
        best_gain = 0
        for e in elems:
            for s in containing[e]:
                if not excluded[s]:
                    g = (masks[s] & uncovered).bit_count()
                    if g > best_gain:
                        best_gain = g
        if best_gain == 0:
            return len(elems) + 1
        return max(packed, -(-len(elems) // best_gain))

    def search(self, uncovered: int, chosen: list[int]) -> None:
        if not uncovered:
            self.record(chosen)
            return
        self.nodes += 1
        if self.deadline is not None and not self.nodes & 0x3FF:
            if time.perf_counter() > self.deadline:
                self.timed_out = True
        if self.timed_out:
            return
        avail = self.avail
        elems = sorted(iter_bits(uncovered), key=lambda x: (avail[x], x))
        e = elems[0]
        if avail[e] == 0:
            return
        depth = len(chosen)
        if depth + self._lower_bound(uncovered, elems) > self.limit:
            return
        masks = self.masks
        cands = [s for s in self.containing[e] if not self.excluded[s]]
        cands.sort(key=lambda s: (-(masks[s] & uncovered).bit_count(), s))
        newly_excluded = []
        for s in cands:
            chosen.append(s)
            self.search(uncovered & ~masks[s], chosen)
            chosen.pop()
            if self.timed_out or self.done or depth + 1 > self.limit:
                break
            self._exclude(s)
            newly_excluded.append(s)
        for s in newly_excluded:
            self._include(s)

    done = False
    limit = 0

    def record(self, chosen: list[int]) -> None:
        raise NotImplementedError


class _MinimumSearch(_BranchAndBound):
    def __init__(self, masks, universe, deadline, incumbent: list[int]):
        super().__init__(masks, universe, deadline)
        self.best = list(incumbent)
        self.limit = len(incumbent) - 1

    def record(self, chosen):
        if len(chosen) <= self.limit:
            self.best = list(chosen)
            self.limit = len(chosen) - 1


class _EnumerateSearch(_BranchAndBound):
    def __init__(self, masks, universe, deadline, size: int, max_covers: int):
        super().__init__(masks, universe, deadline)
        self.limit = size
        self.max_covers = max_covers
        self.found: list[tuple[int, ...]] = []
        self.overflow = False

    def record(self, chosen):
        if len(chosen) != self.limit:
            return
        if len(self.found) >= self.max_covers:
            self.overflow = True
            self.done = True
            return
        self.found.append(tuple(sorted(chosen)))


def _check_exact_input(c: HomogeneousSetCollection) -> None:
    if c.truncated:
        raise TruncatedCollectionError(
            "the homogeneous set enumeration was truncated; optimality cannot be certified"
        )
    if not c.covers_universe():
        acc = 0
        for m in c.masks():
            acc |= m
        missing = next(iter_bits(((1 << c.n) - 1) & ~acc))
        raise InfeasibleCoverError(f"element {missing} belongs to no set")


def _deadline(time_limit: Optional[float]) -> Optional[float]:
    return None if time_limit is None else time.perf_counter() + time_limit


def _reduced_sets(masks: list[int], universe: int) -> list[int]:
    """Indices of sets kept after dropping duplicates and sets dominated on ``universe``."""
    restricted = [m & universe for m in masks]
    order = sorted(range(len(masks)), key=lambda i: (-restricted[i].bit_count(), i))
    kept: list[int] = []
    if len(masks) > 20000:
        seen = set()
        for i in order:
            if restricted[i] and restricted[i] not in seen:
                seen.add(restricted[i])
                kept.append(i)
        return sorted(kept)
    for i in order:
        r = restricted[i]
        if r and not any((r & restricted[j]) == r for j in kept):
            kept.append(i)
    return sorted(kept)


def exact_min_cover(c: HomogeneousSetCollection, time_limit: Optional[float] = None) -> Cover:
    """Cover of provably minimum cardinality, by branch-and-bound.

    The greedy cover seeds the incumbent. When ``time_limit`` (seconds) runs
    out the incumbent is returned with ``proven=False``.

    Raises:
        TruncatedCollectionError: if ``c`` is a truncated enumeration.
        InfeasibleCoverError: if some element is in no set.
    """
    _check_exact_input(c)
    deadline = _deadline(time_limit)
    full = (1 << c.n) - 1
    masks = c.masks()
    universe = _reduce_elements(masks, c.n, full)
    kept = _reduced_sets(masks, universe)
    sub_masks = [masks[i] for i in kept]
    incumbent = greedy_cover(
        HomogeneousSetCollection(tuple(c.sets[i] for i in kept), c.constraint, c.n)
    ).indices
    search = _MinimumSearch(sub_masks, universe, deadline, list(incumbent))
    search.search(universe, [])
    proven = not search.timed_out
    return _make_cover(c, [kept[i] for i in search.best], proven)


def enumerate_min_covers(
    c: HomogeneousSetCollection,
    limit: int = DEFAULT_ENUM_LIMIT,
    time_limit: Optional[float] = None,
) -> CoverEnumeration:
    """Every cover of minimum cardinality, each once, in canonical order.

    Covers are distinguished by which sets of the collection they use, so
    duplicate sets yield distinct covers. ``complete`` is False when
    ``limit`` covers were reached or time ran out.
    """
    start = time.perf_counter()
    best = exact_min_cover(c, time_limit)
    if not best.proven:
        return CoverEnumeration([best], len(best), complete=False)
    remaining = None if time_limit is None else max(0.0, time_limit - (time.perf_counter() - start))
    masks = c.masks()
    universe = _reduce_elements(masks, c.n, (1 << c.n) - 1)
    search = _EnumerateSearch(masks, universe, _deadline(remaining), len(best), limit)
    search.search(universe, [])
    found = sorted(set(search.found))
    covers = [_make_cover(c, idx, proven=True) for idx in found]
    complete = not (search.timed_out or search.overflow)
    if not covers:
        covers = [best]
    return CoverEnumeration(covers, len(best), complete)


def set_width(s: HomogeneousSet, D: DissimilarityMatrix, kind: ConstraintKind) -> float:
    idx = np.asarray(s.members, dtype=np.intp)
    if kind is ConstraintKind.DIAMETER:
        return float(D.values[np.ix_(idx, idx)].max())
    if s.center is not None:
        return eccentricity(s.center, s.members, D)
    return radius(s.members, D)[0]


def set_dissimilarity_sum(s: HomogeneousSet, D: DissimilarityMatrix, kind: ConstraintKind) -> float:
    idx = np.asarray(s.members, dtype=np.intp)
    if kind is ConstraintKind.RADIUS:
        center = s.center if s.center is not None else radius(s.members, D)[1]
        return float(D.values[center, idx].sum())
    return float(np.triu(D.values[np.ix_(idx, idx)], k=1).sum())


def select_cover(
    covers: Sequence[Cover],
    D: DissimilarityMatrix,
    sub: SubObjective = SubObjective.NONE,
    kind: Optional[ConstraintKind] = None,
) -> Cover:
    """Best cover under ``sub``; the first one in the given order wins ties.

    ``kind`` defaults to the constraint the covers were built under.
    """
    covers = list(covers)
    if not covers:
        raise DomainError("cannot select from an empty list of covers")
    sub = SubObjective(sub)
    if sub is SubObjective.NONE or len(covers) == 1:
        return covers[0]
    if kind is None:
        kind = covers[0].constraint.kind if covers[0].constraint else ConstraintKind.DIAMETER

    def score(cov: Cover) -> float:
        if sub is SubObjective.MAX_WIDTH:
            return max(set_width(s, D, kind) for s in cov.chosen)
        if sub is SubObjective.WCSD:
            return sum(set_dissimilarity_sum(s, D, kind) for s in cov.chosen)
        return -sum(len(s) ** 2 for s in cov.chosen)

    scores = [score(cov) for cov in covers]
    return covers[int(np.argmin(scores))]


def greedy_bound(n: int, optimum: int) -> int:
    """Largest cardinality the greedy cover may reach on ``n`` elements."""
    return math.floor(harmonic(n) * optimum)
