import pytest

from equiwide.assign import AssignmentStrategy, CoverInconsistencyError, assign_unique, relabel_compact
from equiwide.cover import Cover, enumerate_min_covers, exact_min_cover, greedy_cover
from equiwide.graph import build_threshold_graph
from equiwide.homoset import maximal_cliques, radius_balls
from equiwide.model import (
    DissimilarityMatrix,
    HomogeneousSet,
    Partition,
    WidthConstraint,
    eccentricity,
    validate_partition,
)
from oracles import random_instances

FOUR = DissimilarityMatrix([[abs(a - b) for b in (0, 2, 3, 5)] for a in (0, 2, 3, 5)])


def two_balls():
    return Cover((HomogeneousSet((0, 1, 2), center=1), HomogeneousSet((1, 2, 3), center=2)), 4)


def test_closest_center_keeps_centers_apart():
    P = assign_unique(two_balls(), FOUR, WidthConstraint.radius(2))
    assert P.clusters() == [[0, 1], [2, 3]]
    assert P.centers == (1, 2)


def test_largest_first_under_diameter():
    cover = Cover((HomogeneousSet((0, 1, 2)), HomogeneousSet((1, 2, 3))), 4)
    P = assign_unique(cover, FOUR, WidthConstraint.diameter(3), AssignmentStrategy.LARGEST_FIRST)
    assert P.clusters() == [[0, 1, 2], [3]]


def test_largest_first_under_radius_keeps_pinned_centers():
    P = assign_unique(two_balls(), FOUR, WidthConstraint.radius(2), AssignmentStrategy.LARGEST_FIRST)
    assert P.centers == (1, 2)
    validate_partition(P, FOUR, WidthConstraint.radius(2))


def test_disjoint_cover_is_unchanged(line_D):
    cover = Cover((HomogeneousSet((0, 1, 2)), HomogeneousSet((3, 4)), HomogeneousSet((5,))), 6)
    for strategy in AssignmentStrategy:
        P = assign_unique(cover, line_D, WidthConstraint.diameter(2), strategy)
        assert P.labels == (0, 0, 0, 1, 1, 2)


def test_size_mismatch(line_D):
    with pytest.raises(CoverInconsistencyError):
        assign_unique(two_balls(), line_D, WidthConstraint.radius(2))


def test_relabel_examples():
    assert relabel_compact([2, 2, 5]).labels == (0, 0, 1)
    assert relabel_compact([1, 0, 1]).labels == (0, 1, 0)
    P = relabel_compact(Partition((1, 0, 1), centers=(1, 0)))
    assert P.labels == (0, 1, 0) and P.centers == (0, 1)


@pytest.mark.parametrize("strategy", list(AssignmentStrategy))
@pytest.mark.parametrize("m,T", random_instances(40, seed=41, max_n=9))
def test_assignment_stays_homogeneous(m, T, strategy):
    D = DissimilarityMatrix(m)
    for c, coll in (
        (WidthConstraint.diameter(T), maximal_cliques(build_threshold_graph(D, T))),
        (WidthConstraint.radius(T), radius_balls(D, T)),
    ):
        for cover in [greedy_cover(coll), exact_min_cover(coll), *enumerate_min_covers(coll, limit=20)]:
            P = assign_unique(cover, D, c, strategy)
            validate_partition(P, D, c)
            assert P.k <= len(cover)
            assert all(lab >= 0 for lab in P.labels)
            if c.kind.value == "radius":
                for members, center in zip(P.clusters(), P.centers):
                    assert eccentricity(center, members, D) <= T
