"""Building dissimilarity matrices from feature vectors and time series."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import pdist, squareform

from equiwide.model import DissimilarityMatrix, DomainError, IngestionError


class InfeasibleBandError(DomainError):
    """No warping path fits inside the requested band."""


@dataclass(frozen=True)
class PointDataset:
    rows: np.ndarray
    labels: Optional[tuple] = None

    def __post_init__(self):
        rows = np.array(self.rows, dtype=np.float64)
        if rows.ndim == 1:
            rows = rows[:, None]
        if rows.ndim != 2 or rows.shape[0] < 1:
            raise IngestionError("a point dataset needs at least one row of features")
        if not np.all(np.isfinite(rows)):
            i, j = np.argwhere(~np.isfinite(rows))[0]
            raise IngestionError(f"non-finite feature value at row {i}, column {j}")
        rows.setflags(write=False)
        object.__setattr__(self, "rows", rows)
        if self.labels is not None:
            if len(self.labels) != rows.shape[0]:
                raise IngestionError("one class label per row is required")
            object.__setattr__(self, "labels", tuple(self.labels))

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def dim(self) -> int:
        return self.rows.shape[1]


@dataclass(frozen=True)
class SeriesDataset:
    series: tuple
    window: int = 4

    def __post_init__(self):
        series = tuple(np.asarray(s, dtype=np.float64) for s in self.series)
        for i, s in enumerate(series):
            if s.ndim != 1 or s.size == 0:
                raise IngestionError(f"series {i} is empty or not one-dimensional")
            if not np.all(np.isfinite(s)):
                raise IngestionError(f"series {i} has non-finite values")
        if self.window < 0:
            raise DomainError(f"window must be nonnegative, got {self.window}")
        object.__setattr__(self, "series", series)

    @property
    def n(self) -> int:
        return len(self.series)


def euclidean_matrix(ds: PointDataset) -> DissimilarityMatrix:
    # squareform mirrors the condensed vector: exact symmetry, zero diagonal
    return DissimilarityMatrix(squareform(pdist(ds.rows, metric="euclidean")))


def dtw(a: Sequence[float], b: Sequence[float], window: int) -> float:
    """Dynamic time warping cost inside a Sakoe-Chiba band.

    Local cost is the absolute difference; the path cost is the plain sum,
    without length normalization. Both endpoints are aligned.
    """
    x = np.asarray(a, dtype=np.float64)
    y = np.asarray(b, dtype=np.float64)
    n, m = x.size, y.size
    if n == 0 or m == 0:
        raise DomainError("dtw needs two nonempty series")
    if window < abs(n - m):
        raise InfeasibleBandError(
            f"window {window} is smaller than the length difference {abs(n - m)}"
        )
    prev = np.full(m + 1, np.inf)
    prev[0] = 0.0
    for i in range(1, n + 1):
        cur = np.full(m + 1, np.inf)
        lo = max(1, i - window)
        hi = min(m, i + window)
        cost = np.abs(x[i - 1] - y[lo - 1:hi])
        for j in range(lo, hi + 1):
            best = prev[j - 1]
            if prev[j] < best:
                best = prev[j]
            if cur[j - 1] < best:
                best = cur[j - 1]
            cur[j] = cost[j - lo] + best
        prev = cur
    return float(prev[m])


def dtw_matrix(ds: SeriesDataset) -> DissimilarityMatrix:
    """Pairwise DTW matrix; each pair is truncated to its shorter length."""
    n = ds.n
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = ds.series[i], ds.series[j]
            length = min(a.size, b.size)
            out[i, j] = dtw(a[:length], b[:length], ds.window)
    return DissimilarityMatrix(out + out.T)
