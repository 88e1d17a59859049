"""End-to-end pipeline and command line interface.

``equiwide run`` clusters one input file and prints a JSON report;
``equiwide bench`` repeats a list of runs over several random element
orderings and prints a JSON table.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import statistics
import sys
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from equiwide.assign import AssignmentStrategy, assign_unique
from equiwide.baselines import (
    clustergraph,
    coloring_to_partition,
    dsatur_heuristic,
    exact_coloring,
    hac_complete_link,
)
from equiwide.cover import (
    DEFAULT_ENUM_LIMIT,
    SubObjective,
    enumerate_min_covers,
    exact_min_cover,
    greedy_cover,
    select_cover,
)
from equiwide.dissim import PointDataset, SeriesDataset, dtw_matrix, euclidean_matrix
from equiwide.graph import build_threshold_graph, complement, fpf_order
from equiwide.homoset import (
    DEFAULT_CLIQUE_CAP,
    HomogeneousSetCollection,
    maximal_cliques,
    prune_dominated,
    radius_balls,
)
from equiwide.model import (
    ConstraintKind,
    DissimilarityMatrix,
    EquiwideError,
    HomogeneousSet,
    IngestionError,
    Partition,
    ValidationError,
    WidthConstraint,
    validate_partition,
)

logger = logging.getLogger(__name__)

EQW_ALGORITHMS = ("eqw-greedy", "eqw-exact", "eqw-enum")
BASELINE_ALGORITHMS = ("hac", "dsatur", "exact-color", "clustergraph")
ALGORITHMS = EQW_ALGORITHMS + BASELINE_ALGORITHMS
INPUT_KINDS = ("points-csv", "matrix-csv", "series-csv")

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_UNPROVEN = 2


class ConfigError(EquiwideError, ValueError):
    """Inconsistent run configuration."""


class InternalError(EquiwideError):
    """A solver produced a partition that breaks its constraint."""


# ---------------------------------------------------------------- loading


def _parse_float(cell: str, row: int, col: int, path) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise IngestionError(f"{path}: non-numeric cell {cell!r} at row {row}, column {col}") from None
    if not np.isfinite(value):
        raise IngestionError(f"{path}: non-finite value {cell!r} at row {row}, column {col}")
    return value


def _read_rows(path) -> list[list[str]]:
    with open(path, newline="") as fh:
        return [[c.strip() for c in row] for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def _is_numeric(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_points_csv(path, label_col: Optional[int] = None) -> PointDataset:
    """Comma separated feature rows with an optional header line.

    ``label_col`` selects a column holding class labels (``-1`` for the
    last one); it is kept for reporting and ignored by the solvers.
    """
    rows = _read_rows(path)
    if not rows:
        raise IngestionError(f"{path}: no data rows")
    width = len(rows[0])

    def feature_cells(row):
        if label_col is None:
            return row
        col = label_col % width
        return row[:col] + row[col + 1:]

    if not all(_is_numeric(c) for c in feature_cells(rows[0])):
        rows = rows[1:]
        if not rows:
            raise IngestionError(f"{path}: header but no data rows")
    data, labels = [], []
    for r, row in enumerate(rows):
        if len(row) != width:
            raise IngestionError(f"{path}: row {r} has {len(row)} columns, expected {width}")
        if label_col is not None:
            labels.append(row[label_col % width])
        data.append([_parse_float(c, r, k, path) for k, c in enumerate(feature_cells(row))])
    return PointDataset(np.array(data), tuple(labels) if label_col is not None else None)


def load_matrix_csv(path) -> DissimilarityMatrix:
    """Square dissimilarity matrix without header; symmetry must be exact."""
    rows = _read_rows(path)
    n = len(rows)
    values = np.zeros((n, n))
    for r, row in enumerate(rows):
        if len(row) != n:
            raise IngestionError(f"{path}: row {r} has {len(row)} columns, expected {n}")
        values[r] = [_parse_float(c, r, k, path) for k, c in enumerate(row)]
    return DissimilarityMatrix(values)


def load_series_csv(path, window: int = 4) -> SeriesDataset:
    """One time series per row; rows may have different lengths."""
    rows = _read_rows(path)
    series = [[_parse_float(c, r, k, path) for k, c in enumerate(row) if c != ""] for r, row in enumerate(rows)]
    return SeriesDataset(tuple(series), window)


# ---------------------------------------------------------------- pipeline


@dataclass
class RunConfig:
    input: Optional[str] = None
    input_kind: str = "points-csv"
    constraint: str = "diameter"
    threshold: float = 0.0
    algorithm: str = "eqw-exact"
    subobjective: str = "none"
    time_limit_s: Optional[float] = 600.0
    seed: Optional[int] = None
    clique_cap: int = DEFAULT_CLIQUE_CAP
    enum_limit: int = DEFAULT_ENUM_LIMIT
    dtw_window: int = 4
    label_col: Optional[int] = None
    prune: bool = True

    def check(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; choose from {', '.join(ALGORITHMS)}")
        if self.input_kind not in INPUT_KINDS:
            raise ConfigError(f"unknown input kind {self.input_kind!r}")
        kind = ConstraintKind(self.constraint)
        if kind is ConstraintKind.RADIUS and self.algorithm not in EQW_ALGORITHMS:
            raise ConfigError(f"{self.algorithm} supports only the diameter constraint")
        if not self.threshold >= 0:
            raise ConfigError(f"threshold must be nonnegative, got {self.threshold}")
        SubObjective(self.subobjective)
        if self.clique_cap < 1 or self.enum_limit < 1:
            raise ConfigError("clique cap and enumeration limit must be positive")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        return cls(**d)


@dataclass
class RunReport:
    n_clusters: int
    labels: list[int]
    centers: Optional[list[int]]
    metrics: dict
    proven_optimal: bool
    duration_s: float
    truncated: bool
    time_limit_hit: bool
    config: dict = field(default_factory=dict)

    @property
    def exit_code(self) -> int:
        return EXIT_UNPROVEN if (self.truncated or self.time_limit_hit) else EXIT_OK

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


@dataclass
class _Outcome:
    partition: Partition
    proven: bool
    truncated: bool = False
    time_limit_hit: bool = False


def load_matrix(config: RunConfig) -> DissimilarityMatrix:
    if config.input is None:
        raise ConfigError("no input path given")
    if config.input_kind == "points-csv":
        return euclidean_matrix(load_points_csv(config.input, config.label_col))
    if config.input_kind == "matrix-csv":
        return load_matrix_csv(config.input)
    return dtw_matrix(load_series_csv(config.input, config.dtw_window))


def _remaining(deadline: Optional[float]) -> Optional[float]:
    if deadline is None:
        return None
    return max(0.0, deadline - time.perf_counter())


def _with_singletons(c: HomogeneousSetCollection) -> HomogeneousSetCollection:
    covered = 0
    for s in c.sets:
        covered |= s.mask
    extra = tuple(HomogeneousSet((i,)) for i in range(c.n) if not (covered >> i) & 1)
    return HomogeneousSetCollection(c.sets + extra, c.constraint, c.n, c.truncated)


def _solve_eqw(D: DissimilarityMatrix, config: RunConfig, constraint: WidthConstraint,
               deadline: Optional[float]) -> _Outcome:
    sub = SubObjective(config.subobjective)
    if constraint.kind is ConstraintKind.RADIUS:
        collection = radius_balls(D, constraint.threshold)
        if config.prune:
            collection = prune_dominated(collection)
    else:
        collection = maximal_cliques(
            build_threshold_graph(D, constraint.threshold), config.clique_cap, deadline
        )
    time_hit = False
    if collection.truncated:
        logger.warning("homogeneous set enumeration truncated at %d sets; falling back to greedy", len(collection))
        time_hit = deadline is not None and time.perf_counter() > deadline
        cover = greedy_cover(_with_singletons(collection))
        proven = False
    elif config.algorithm == "eqw-greedy":
        cover = greedy_cover(collection)
        proven = False
    elif config.algorithm == "eqw-exact":
        cover = exact_min_cover(collection, _remaining(deadline))
        proven = cover.proven
        time_hit = not proven
    else:
        enum = enumerate_min_covers(collection, config.enum_limit, _remaining(deadline))
        cover = select_cover(enum.covers, D, sub, constraint.kind)
        proven = cover.proven
        time_hit = not proven
    strategy = (AssignmentStrategy.LARGEST_FIRST if sub is SubObjective.SIZE_VARIANCE
                else AssignmentStrategy.CLOSEST_CENTER)
    P = assign_unique(cover, D, constraint, strategy)
    return _Outcome(P, proven, collection.truncated, time_hit)


def _solve_baseline(D: DissimilarityMatrix, config: RunConfig, deadline: Optional[float]) -> _Outcome:
    T = config.threshold
    if config.algorithm == "hac":
        return _Outcome(hac_complete_link(D, T), proven=False)
    if config.algorithm == "clustergraph":
        res = clustergraph(D, T, _remaining(deadline))
        return _Outcome(res.partition, res.proven, time_limit_hit=not res.proven)
    G = complement(build_threshold_graph(D, T))
    if config.algorithm == "dsatur":
        return _Outcome(coloring_to_partition(dsatur_heuristic(G)), proven=False)
    col = exact_coloring(G, _remaining(deadline), fpf_order(D) if D.n else None)
    return _Outcome(coloring_to_partition(col), col.proven, time_limit_hit=not col.proven)


def _unpermute(P: Partition, perm: np.ndarray) -> Partition:
    # element perm[i] of the original order sat at position i of the solved order
    labels = [0] * len(perm)
    for i, orig in enumerate(perm):
        labels[orig] = P.labels[i]
    mapping: dict[int, int] = {}
    for lab in labels:
        mapping.setdefault(lab, len(mapping))
    centers = None
    if P.centers is not None:
        centers = [0] * P.k
        for old, new in mapping.items():
            centers[new] = int(perm[P.centers[old]])
    return Partition(tuple(mapping[lab] for lab in labels), centers)


def solve(D: DissimilarityMatrix, config: RunConfig) -> RunReport:
    """Run ``config`` on an already built matrix (the input path is ignored)."""
    config.check()
    constraint = WidthConstraint(ConstraintKind(config.constraint), config.threshold)
    start = time.perf_counter()
    deadline = None if config.time_limit_s is None else start + config.time_limit_s
    if config.seed is None:
        perm = np.arange(D.n)
    else:
        perm = np.random.default_rng(config.seed).permutation(D.n)
    Dp = D.permuted(perm)
    if config.algorithm in EQW_ALGORITHMS:
        out = _solve_eqw(Dp, config, constraint, deadline)
    else:
        out = _solve_baseline(Dp, config, deadline)
    P = _unpermute(out.partition, perm)
    duration = time.perf_counter() - start
    try:
        metrics = validate_partition(P, D, constraint)
    except ValidationError as exc:
        raise InternalError(f"{config.algorithm} emitted a non-homogeneous partition: {exc}") from exc
    return RunReport(
        n_clusters=P.k,
        labels=list(P.labels),
        centers=list(P.centers) if P.centers is not None and constraint.kind is ConstraintKind.RADIUS else None,
        metrics={
            "max_width": metrics.max_width,
            "wcsd": metrics.wcsd,
            "wcsd_pairs": "unordered (half of the ordered-pair double sum)",
            "size_variance_objective": metrics.size_variance_objective,
            "per_cluster_width": list(metrics.per_cluster_width),
        },
        proven_optimal=out.proven,
        duration_s=duration,
        truncated=out.truncated,
        time_limit_hit=out.time_limit_hit,
        config=asdict(config),
    )


def run(config: RunConfig) -> RunReport:
    config.check()
    return solve(load_matrix(config), config)


def bench(configs: Sequence[RunConfig], seeds: Sequence[int] = (0, 1, 2, 3)) -> list[dict]:
    """Run every config once per seed; one summary row per config.

    A failing run is recorded in ``errors`` and the batch goes on.
    """
    table = []
    for config in configs:
        counts, durations, errors = [], [], []
        limits_hit = 0
        matrix = None
        for seed in seeds:
            cfg = RunConfig(**{**asdict(config), "seed": seed})
            try:
                if matrix is None:
                    cfg.check()
                    matrix = load_matrix(cfg)
                report = solve(matrix, cfg)
            except (EquiwideError, OSError) as exc:
                errors.append({"seed": seed, "error": f"{type(exc).__name__}: {exc}"})
                continue
            counts.append(report.n_clusters)
            durations.append(report.duration_s)
            limits_hit += report.exit_code == EXIT_UNPROVEN
        table.append({
            "config": asdict(config),
            "seeds": list(seeds),
            "min_clusters": min(counts) if counts else None,
            "max_clusters": max(counts) if counts else None,
            "mean_duration_s": statistics.fmean(durations) if durations else None,
            "std_duration_s": statistics.pstdev(durations) if durations else None,
            "limit_hits": limits_hit,
            "errors": errors,
        })
    return table


def bench_exit_code(table: Sequence[dict]) -> int:
    if any(row["errors"] for row in table):
        return EXIT_ERROR
    if any(row["limit_hits"] for row in table):
        return EXIT_UNPROVEN
    return EXIT_OK


# ---------------------------------------------------------------- command line


def _add_run_arguments(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", required=True, help="path of the input CSV file")
    p.add_argument("--input-kind", choices=INPUT_KINDS, default="points-csv")
    p.add_argument("--constraint", choices=[k.value for k in ConstraintKind], default="diameter")
    p.add_argument("--threshold", type=float, required=True, help="maximum diameter or radius")
    p.add_argument("--algorithm", choices=ALGORITHMS, default="eqw-exact")
    p.add_argument("--subobjective", choices=[s.value for s in SubObjective], default="none")
    p.add_argument("--time-limit-s", type=float, default=600.0)
    p.add_argument("--seed", type=int, default=None, help="shuffle element order with this seed")
    p.add_argument("--clique-cap", type=int, default=DEFAULT_CLIQUE_CAP)
    p.add_argument("--enum-limit", type=int, default=DEFAULT_ENUM_LIMIT)
    p.add_argument("--dtw-window", type=int, default=4)
    p.add_argument("--label-col", type=int, nargs="?", const=-1, default=None,
                   help="column holding class labels (default when given without value: last)")
    p.add_argument("--no-prune", action="store_true", help="keep dominated radius balls")
    p.add_argument("--labels-out", type=Path, help="write element-index,cluster-id CSV here")
    p.add_argument("--report-out", type=Path, help="write the JSON report here instead of stdout")


def _config_from_args(args: argparse.Namespace) -> RunConfig:
    return RunConfig(
        input=args.input,
        input_kind=args.input_kind,
        constraint=args.constraint,
        threshold=args.threshold,
        algorithm=args.algorithm,
        subobjective=args.subobjective,
        time_limit_s=args.time_limit_s,
        seed=args.seed,
        clique_cap=args.clique_cap,
        enum_limit=args.enum_limit,
        dtw_window=args.dtw_window,
        label_col=args.label_col,
        prune=not args.no_prune,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="equiwide", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_run_arguments(sub.add_parser("run", help="cluster one input"))
    b = sub.add_parser("bench", help="repeat runs over randomized orderings")
    b.add_argument("--configs", type=Path, required=True,
                   help="JSON list of run configs (keys as in the run report's config)")
    b.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3])
    b.add_argument("--report-out", type=Path)
    return parser


def _emit(text: str, path: Optional[Path]) -> None:
    if path is None:
        print(text)
    else:
        path.write_text(text + "\n")


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if args.command == "bench":
        try:
            raw = json.loads(args.configs.read_text())
            configs = [RunConfig.from_dict(d) for d in raw]
        except (OSError, ValueError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_ERROR
        table = bench(configs, args.seeds)
        _emit(json.dumps(table, indent=2), args.report_out)
        return bench_exit_code(table)

    try:
        report = run(_config_from_args(args))
    except InternalError as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (EquiwideError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if args.labels_out is not None:
        with open(args.labels_out, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["element", "cluster"])
            w.writerows(enumerate(report.labels))
    _emit(report.to_json(), args.report_out)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
