"""Equiwide clustering: the fewest clusters whose diameter or radius stays under a threshold."""

from equiwide.model import (
    ConstraintKind,
    DissimilarityMatrix,
    HomogeneousSet,
    Partition,
    PartitionMetrics,
    WidthConstraint,
    diameter,
    radius,
    validate_partition,
)

__all__ = [
    "ConstraintKind",
    "DissimilarityMatrix",
    "HomogeneousSet",
    "Partition",
    "PartitionMetrics",
    "WidthConstraint",
    "diameter",
    "radius",
    "validate_partition",
]

__version__ = "0.1.0"
