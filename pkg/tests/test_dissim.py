import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from equiwide.dissim import (
    InfeasibleBandError,
    PointDataset,
    SeriesDataset,
    dtw,
    dtw_matrix,
    euclidean_matrix,
)
from equiwide.model import IngestionError
from oracles import dtw_recursive

series = st.lists(st.integers(-5, 5).map(float), min_size=1, max_size=6)


def test_euclidean_examples():
    assert euclidean_matrix(PointDataset([[1.5, 2.0], [1.5, 2.0]])).values[0, 1] == 0
    assert euclidean_matrix(PointDataset([[0.0], [3.0]])).values[0, 1] == 3
    assert euclidean_matrix(PointDataset([[0.0, 0.0], [3.0, 4.0]])).values[0, 1] == 5


def test_euclidean_single_row():
    assert euclidean_matrix(PointDataset([[1.0, 2.0]])).values.tolist() == [[0.0]]


def test_euclidean_rejects_non_finite():
    with pytest.raises(IngestionError, match="row 1, column 0"):
        PointDataset([[0.0], [np.nan]])


def test_euclidean_matches_naive_on_random_points():
    rng = np.random.default_rng(5)
    X = rng.normal(size=(12, 3))
    D = euclidean_matrix(PointDataset(X)).values
    for i in range(12):
        for j in range(12):
            assert D[i, j] == pytest.approx(np.sqrt(((X[i] - X[j]) ** 2).sum()), abs=1e-12)
    assert np.array_equal(D, D.T)


def test_dtw_examples():
    assert dtw([1.0, 3.0, 2.0], [1.0, 3.0, 2.0], 0) == 0
    assert dtw([0, 0, 0], [1, 1, 1], 4) == 3
    assert dtw([0, 2], [0, 1, 2], 4) == 1


def test_dtw_band_too_narrow():
    with pytest.raises(InfeasibleBandError):
        dtw([0, 1, 2, 3], [0], 2)


def test_dtw_matrix_examples():
    same = dtw_matrix(SeriesDataset(([1.0, 2.0, 3.0],) * 3, window=4))
    assert not same.values.any()
    two = dtw_matrix(SeriesDataset(([0, 0], [1, 1]), window=4)).values
    assert two[0, 1] == two[1, 0] == 2
    three = dtw_matrix(SeriesDataset(([0, 0], [0, 0], [0, 3]), window=4)).values
    off = three[np.triu_indices(3, 1)]
    assert np.array_equal(three, three.T)
    assert sorted(off.tolist()) == [0.0, 3.0, 3.0]


def test_dtw_matrix_truncates_unequal_lengths():
    m = dtw_matrix(SeriesDataset(([0, 1, 2, 3, 4, 5, 6, 7], [0, 1, 2]), window=0)).values
    assert m[0, 1] == 0


def test_series_dataset_validation():
    with pytest.raises(IngestionError):
        SeriesDataset(([],))
    with pytest.raises(ValueError):
        SeriesDataset(([1.0],), window=-1)


@settings(max_examples=80, deadline=None)
@given(series, series, st.integers(0, 7))
def test_dtw_symmetric(a, b, w):
    if w < abs(len(a) - len(b)):
        return
    assert dtw(a, b, w) == dtw(b, a, w)


@settings(max_examples=80, deadline=None)
@given(series, series)
def test_dtw_non_increasing_in_window(a, b):
    start = abs(len(a) - len(b))
    costs = [dtw(a, b, w) for w in range(start, 8)]
    assert all(x >= y for x, y in zip(costs, costs[1:]))


@settings(max_examples=80, deadline=None)
@given(series, series)
def test_wide_band_is_unconstrained_dtw(a, b):
    assert dtw(a, b, max(len(a), len(b))) == dtw_recursive(tuple(a), tuple(b))
