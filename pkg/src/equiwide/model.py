"""Core domain types and wideness computations shared by every solver."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np


class EquiwideError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(EquiwideError, ValueError):
    """An operation was called outside its domain (e.g. on an empty set)."""


class ValidationError(EquiwideError):
    """A partition violates its wideness constraint."""

    def __init__(self, message: str, cluster: int | None = None, width: float | None = None):
        super().__init__(message)
        self.cluster = cluster
        self.width = width


class UnsupportedOperationError(EquiwideError):
    """The requested computation needs data that is not available."""


class IngestionError(EquiwideError, ValueError):
    """Input data is malformed."""


class DissimilarityMatrix:
    """Dense symmetric nonnegative matrix with a zero diagonal.

    The array is copied to float64 and made read-only, so instances can be
    shared freely between solvers and threads.
    """

    __slots__ = ("values",)

    def __init__(self, values, check: bool = True):
        arr = np.array(values, dtype=np.float64, copy=True)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise IngestionError(f"dissimilarity matrix must be square, got shape {arr.shape}")
        if check:
            _check_dissimilarity(arr)
        arr.setflags(write=False)
        self.values = arr

    @property
    def n(self) -> int:
        return self.values.shape[0]

    def __len__(self) -> int:
        return self.n

    def __getitem__(self, key):
        return self.values[key]

    def __eq__(self, other) -> bool:
        if not isinstance(other, DissimilarityMatrix):
            return NotImplemented
        return np.array_equal(self.values, other.values)

    def __repr__(self) -> str:
        return f"DissimilarityMatrix(n={self.n})"

    def permuted(self, perm: Sequence[int]) -> "DissimilarityMatrix":
        """Matrix of the same elements re-indexed so new index i is old ``perm[i]``."""
        p = np.asarray(perm, dtype=np.intp)
        return DissimilarityMatrix(self.values[np.ix_(p, p)], check=False)


def _check_dissimilarity(arr: np.ndarray) -> None:
    if not np.all(np.isfinite(arr)):
        i, j = np.argwhere(~np.isfinite(arr))[0]
        raise IngestionError(f"non-finite dissimilarity at row {i}, column {j}")
    if np.any(arr < 0):
        i, j = np.argwhere(arr < 0)[0]
        raise IngestionError(f"negative dissimilarity {arr[i, j]} at row {i}, column {j}")
    diag = np.diagonal(arr)
    if np.any(diag != 0):
        i = int(np.flatnonzero(diag)[0])
        raise IngestionError(f"nonzero diagonal entry {diag[i]} at row {i}")
    asym = arr != arr.T
    if np.any(asym):
        i, j = np.argwhere(asym)[0]
        raise IngestionError(
            f"asymmetric dissimilarity at row {i}, column {j}: {arr[i, j]} != {arr[j, i]}"
        )


class ConstraintKind(enum.Enum):
    DIAMETER = "diameter"
    RADIUS = "radius"


@dataclass(frozen=True)
class WidthConstraint:
    kind: ConstraintKind
    threshold: float

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", ConstraintKind(self.kind))
        if not self.threshold >= 0:
            raise DomainError(f"threshold must be nonnegative, got {self.threshold}")

    @classmethod
    def diameter(cls, threshold: float) -> "WidthConstraint":
        return cls(ConstraintKind.DIAMETER, threshold)

    @classmethod
    def radius(cls, threshold: float) -> "WidthConstraint":
        return cls(ConstraintKind.RADIUS, threshold)


@dataclass(frozen=True)
class HomogeneousSet:
    """Candidate cluster: a sorted index set, with a center for radius balls."""

    members: tuple[int, ...]
    center: Optional[int] = None

    def __post_init__(self):
        members = tuple(sorted(set(int(m) for m in self.members)))
        if not members:
            raise DomainError("homogeneous set must be nonempty")
        object.__setattr__(self, "members", members)
        if self.center is not None and self.center not in members:
            raise DomainError(f"center {self.center} is not a member of {members}")

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, item) -> bool:
        return item in self.members

    def __iter__(self):
        return iter(self.members)

    @property
    def mask(self) -> int:
        m = 0
        for i in self.members:
            m |= 1 << i
        return m


@dataclass(frozen=True)
class Partition:
    """Disjoint cluster assignment: ``labels[i]`` is the cluster of element i."""

    labels: tuple[int, ...]
    centers: Optional[tuple[int, ...]] = None
    k: int = field(init=False)

    def __post_init__(self):
        labels = tuple(int(x) for x in self.labels)
        object.__setattr__(self, "labels", labels)
        k = max(labels) + 1 if labels else 0
        object.__setattr__(self, "k", k)
        if labels and min(labels) < 0:
            raise DomainError("cluster labels must be nonnegative")
        if len(set(labels)) != k:
            missing = sorted(set(range(k)) - set(labels))
            raise DomainError(f"cluster ids {missing} are unused")
        if self.centers is not None:
            centers = tuple(int(c) for c in self.centers)
            if len(centers) != k:
                raise DomainError(f"expected {k} centers, got {len(centers)}")
            for cid, c in enumerate(centers):
                if labels[c] != cid:
                    raise DomainError(f"center {c} does not belong to cluster {cid}")
            object.__setattr__(self, "centers", centers)

    @property
    def n(self) -> int:
        return len(self.labels)

    def clusters(self) -> list[list[int]]:
        out: list[list[int]] = [[] for _ in range(self.k)]
        for i, lab in enumerate(self.labels):
            out[lab].append(i)
        return out

    @classmethod
    def from_clusters(cls, clusters: Iterable[Iterable[int]], n: int | None = None) -> "Partition":
        clusters = [list(c) for c in clusters]
        if n is None:
            n = sum(len(c) for c in clusters)
        labels = [-1] * n
        for cid, members in enumerate(clusters):
            for i in members:
                if labels[i] != -1:
                    raise DomainError(f"element {i} appears in more than one cluster")
                labels[i] = cid
        if -1 in labels:
            raise DomainError(f"element {labels.index(-1)} is not assigned")
        return cls(tuple(labels))


@dataclass(frozen=True)
class PartitionMetrics:
    max_width: float
    wcsd: float
    size_variance_objective: int
    per_cluster_width: tuple[float, ...]


def _members_array(members, n: int) -> np.ndarray:
    idx = np.asarray(sorted(set(int(m) for m in members)), dtype=np.intp)
    if idx.size == 0:
        raise DomainError("wideness of an empty set is undefined")
    if idx[0] < 0 or idx[-1] >= n:
        raise DomainError(f"member indices must lie in 0..{n - 1}")
    return idx


def diameter(members, D: DissimilarityMatrix) -> float:
    """Largest pairwise dissimilarity in ``members`` (0 for a singleton)."""
    idx = _members_array(members, D.n)
    return float(D.values[np.ix_(idx, idx)].max())


def radius(members, D: DissimilarityMatrix) -> tuple[float, int]:
    """Minimum eccentricity within ``members`` and the element realizing it.

    Ties go to the lowest element index.
    """
    idx = _members_array(members, D.n)
    ecc = D.values[np.ix_(idx, idx)].max(axis=1)
    best = int(np.argmin(ecc))
    return float(ecc[best]), int(idx[best])


def eccentricity(center: int, members, D: DissimilarityMatrix) -> float:
    idx = _members_array(members, D.n)
    return float(D.values[center, idx].max())


def center_diameter(members, points=None) -> np.ndarray:
    """Midpoint of the furthest pair of ``members`` in coordinate space.

    Only defined when raw coordinates are available. The furthest pair is
    chosen by Euclidean distance; ties go to the lexicographically smallest
    index pair.
    """
    if points is None or isinstance(points, DissimilarityMatrix):
        raise UnsupportedOperationError(
            "the diameter center needs point coordinates; use the radius center instead"
        )
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    idx = _members_array(members, pts.shape[0])
    sub = pts[idx]
    dist = np.linalg.norm(sub[:, None, :] - sub[None, :, :], axis=-1)
    a, b = np.unravel_index(int(np.argmax(dist)), dist.shape)
    return (sub[a] + sub[b]) / 2.0


def wcsd(P: Partition, D: DissimilarityMatrix) -> float:
    """Within-cluster sum of dissimilarities over unordered pairs.

    This is half the ordered-pair double sum; the minimizer is the same.
    """
    total = 0.0
    for members in P.clusters():
        idx = np.asarray(members, dtype=np.intp)
        total += float(np.triu(D.values[np.ix_(idx, idx)], k=1).sum())
    return total


def size_variance_objective(P: Partition) -> int:
    return int(sum(len(c) ** 2 for c in P.clusters()))


def cluster_width(members, D: DissimilarityMatrix, kind: ConstraintKind, center: int | None = None) -> float:
    if kind is ConstraintKind.DIAMETER:
        return diameter(members, D)
    if center is not None:
        return eccentricity(center, members, D)
    return radius(members, D)[0]


def validate_partition(P: Partition, D: DissimilarityMatrix, c: WidthConstraint) -> PartitionMetrics:
    """Check that every cluster of ``P`` is homogeneous under ``c``.

    Under a radius constraint, declared centers must witness the bound
    themselves; without declared centers the best center is used.

    Raises:
        ValidationError: naming the first offending cluster and its width.
    """
    if P.n != D.n:
        raise ValidationError(f"partition labels {P.n} elements but the matrix has {D.n}")
    widths = []
    for cid, members in enumerate(P.clusters()):
        width = cluster_width(members, D, c.kind)
        if width > c.threshold:
            raise ValidationError(
                f"cluster {cid} has {c.kind.value} {width} > {c.threshold}", cid, width
            )
        if P.centers is not None and c.kind is ConstraintKind.RADIUS:
            ecc = eccentricity(P.centers[cid], members, D)
            if ecc > c.threshold:
                raise ValidationError(
                    f"center {P.centers[cid]} of cluster {cid} has eccentricity {ecc} > {c.threshold}",
                    cid,
                    ecc,
                )
        widths.append(width)
    return PartitionMetrics(
        max_width=max(widths) if widths else 0.0,
        wcsd=wcsd(P, D),
        size_variance_objective=size_variance_objective(P),
        per_cluster_width=tuple(widths),
    )
