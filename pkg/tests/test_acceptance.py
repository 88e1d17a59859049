"""Acceptance suite: one test per criterion, each logging a PASS/FAIL line."""

import json
import math
import time
from pathlib import Path

import numpy as np
import pytest

from equiwide.baselines import clustergraph, hac_complete_link
from equiwide.cli import ALGORITHMS, EQW_ALGORITHMS, RunConfig, bench, bench_exit_code, main, run, solve
from equiwide.cover import exact_min_cover, greedy_bound, greedy_cover, harmonic
from equiwide.graph import ThresholdGraph, build_threshold_graph
from equiwide.homoset import HomogeneousSetCollection, maximal_cliques, radius_balls
from equiwide.model import DissimilarityMatrix, HomogeneousSet, Partition, WidthConstraint, validate_partition
from oracles import (
    diam,
    lexicographic_best_partition,
    line_matrix,
    maximal_homogeneous_sets,
    min_diameter_partition,
    min_dominating_set,
    rad,
    random_instances,
)

DATA = Path(__file__).parent / "data"

# 200 instances, n from 1 to 10, thresholds mostly realized values
INSTANCES = random_instances(200, seed=2024, max_n=10, min_n=1)
SMALL = random_instances(200, seed=2025, max_n=8, min_n=1)

# (file, diameter threshold, optimum under diameter, optimum under radius = threshold / 2)
UCI = [
    ("iris.csv", 2.59, 3, 4),
    ("wine.csv", 458.14, 3, 4),
    ("glass.csv", 4.98, 7, 13),
    ("wdbc.csv", 2377.97, 2, 3),
]


def triangles_complement(m):
    n = 3 * m
    adj = np.ones((n, n), dtype=bool)
    for t in range(m):
        adj[3 * t:3 * t + 3, 3 * t:3 * t + 3] = False
    return ThresholdGraph(adj)


def count(D, algorithm, constraint, T):
    return solve(D, RunConfig(threshold=T, algorithm=algorithm, constraint=constraint, time_limit_s=None)).n_clusters


def test_criterion_01_diameter_oracle(criterion):
    def body():
        start = time.perf_counter()
        bad = []
        for i, (m, T) in enumerate(INSTANCES):
            D = DissimilarityMatrix(m)
            want = min_diameter_partition(m.tolist(), T)
            got = (count(D, "eqw-exact", "diameter", T), count(D, "exact-color", "diameter", T))
            if got != (want, want):
                bad.append((i, got, want))
        took = time.perf_counter() - start
        return not bad and took < 60, f"{len(INSTANCES)} instances, {len(bad)} mismatches, {took:.1f}s (< 60s)"

    criterion(1, body)


def test_criterion_02_radius_oracle(criterion):
    def body():
        start = time.perf_counter()
        bad = []
        for i, (m, T) in enumerate(INSTANCES):
            want = min_dominating_set(m.tolist(), T)
            got = count(DissimilarityMatrix(m), "eqw-exact", "radius", T)
            if got != want:
                bad.append((i, got, want))
        took = time.perf_counter() - start
        return not bad and took < 60, f"{len(INSTANCES)} instances, {len(bad)} mismatches, {took:.1f}s (< 60s)"

    criterion(2, body)


def test_criterion_03_homogeneous_set_families(criterion):
    def body():
        bad_balls = bad_cliques = 0
        for m, T in INSTANCES:
            D = DissimilarityMatrix(m)
            d = m.tolist()
            balls = {frozenset(s.members) for s in radius_balls(D, T)}
            bad_balls += not maximal_homogeneous_sets(d, T, rad) <= balls
            cliques = [frozenset(s.members) for s in maximal_cliques(build_threshold_graph(D, T))]
            bad_cliques += len(cliques) != len(set(cliques)) or set(cliques) != maximal_homogeneous_sets(d, T, diam)
        return bad_balls == bad_cliques == 0, (
            f"{len(INSTANCES)} instances, ball family misses {bad_balls}, clique family differs {bad_cliques}"
        )

    criterion(3, body)


def test_criterion_04_greedy_bound(criterion):
    def body():
        worst = 0.0
        bad = 0
        for m, T in INSTANCES:
            D = DissimilarityMatrix(m)
            n = len(m)
            for coll in (maximal_cliques(build_threshold_graph(D, T)), radius_balls(D, T)):
                opt = len(exact_min_cover(coll))
                g = len(greedy_cover(coll))
                bad += g > math.floor(harmonic(n)) * opt or g > greedy_bound(n, opt)
                worst = max(worst, g / opt)
        # optimum 2 reached by two disjoint halves; greedy is lured by the middle set first
        sets = [(0, 1, 2, 3), (4, 5, 6, 7), (2, 3, 4, 5, 6)]
        worked = HomogeneousSetCollection(tuple(HomogeneousSet(s) for s in sets), None, 8)
        opt, g = len(exact_min_cover(worked)), len(greedy_cover(worked))
        worked_ok = opt == 2 and g <= math.floor(2 * harmonic(2)) == 3
        return bad == 0 and worked_ok, (
            f"{2 * len(INSTANCES)} covers, {bad} over the bound, worst ratio {worst:.2f}; "
            f"worked instance opt {opt} greedy {g} <= 3"
        )

    criterion(4, body)


def test_criterion_05_clique_blow_up(criterion):
    def body():
        start = time.perf_counter()
        counts = {m: len(maximal_cliques(triangles_complement(m))) for m in (3, 4, 5)}
        capped = maximal_cliques(triangles_complement(13), cap=10**6)
        took = time.perf_counter() - start
        ok = all(counts[m] == 3**m for m in counts) and capped.truncated and len(capped) == 10**6 and took < 30
        return ok, f"counts {counts}, m=13 truncated={capped.truncated} at {len(capped)} sets, {took:.1f}s (< 30s)"

    criterion(5, body)


@pytest.mark.parametrize("name,T,opt_diam,opt_rad", UCI)
def test_criterion_06_uci_counts(criterion, name, T, opt_diam, opt_rad):
    def body():
        path = DATA / name
        got = []
        slowest = 0.0
        for constraint, threshold, algorithm in (
            ("diameter", T, "eqw-exact"),
            ("diameter", T, "exact-color"),
            ("radius", T / 2, "eqw-exact"),
        ):
            rep = run(RunConfig(input=str(path), label_col=-1, constraint=constraint,
                                threshold=threshold, algorithm=algorithm))
            got.append((rep.n_clusters, rep.proven_optimal))
            slowest = max(slowest, rep.duration_s)
        want = [(opt_diam, True), (opt_diam, True), (opt_rad, True)]
        return got == want and slowest < 600, (
            f"{name}: diameter {got[0][0]}/{got[1][0]} (want {opt_diam}), radius {got[2][0]} "
            f"(want {opt_rad}), slowest run {slowest:.1f}s"
        )

    criterion(6, body)


def test_criterion_07_homogeneity(criterion):
    def body():
        runs = failures = 0
        inputs = [(DissimilarityMatrix(m), T) for m, T in INSTANCES]
        inputs.append((DissimilarityMatrix(line_matrix()), 2.0))
        for D, T in inputs:
            for algorithm in ALGORITHMS:
                kinds = ("diameter", "radius") if algorithm in EQW_ALGORITHMS else ("diameter",)
                for kind in kinds:
                    for seed in (None, 1):
                        runs += 1
                        try:
                            # solve validates internally; repeat here so the check is explicit
                            cfg = RunConfig(threshold=T, algorithm=algorithm, constraint=kind, seed=seed)
                            rep = solve(D, cfg)
                            centers = tuple(rep.centers) if rep.centers is not None else None
                            validate_partition(Partition(tuple(rep.labels), centers), D, WidthConstraint(kind, T))
                        except Exception:
                            failures += 1
        for name, T, _, _ in UCI:
            for algorithm in ALGORITHMS:
                for kind, threshold in (("diameter", T), ("radius", T / 2)):
                    if kind == "radius" and algorithm not in EQW_ALGORITHMS:
                        continue
                    runs += 1
                    try:
                        run(RunConfig(input=str(DATA / name), label_col=-1, threshold=threshold,
                                      algorithm=algorithm, constraint=kind, seed=0))
                    except Exception:
                        failures += 1
        return failures == 0, f"{runs} runs over all algorithms, {failures} invalid partitions or errors"

    criterion(7, body)


def test_criterion_08_clustergraph(criterion):
    def body():
        start = time.perf_counter()
        bad = 0
        for m, T in SMALL:
            res = clustergraph(DissimilarityMatrix(m), T)
            bad += (res.partition.k, res.achieved_diameter) != lexicographic_best_partition(m.tolist(), T)
        took = time.perf_counter() - start
        return bad == 0 and took < 120, f"{len(SMALL)} instances, {bad} not lexicographically minimal, {took:.1f}s (< 120s)"

    criterion(8, body)


def test_criterion_09_hac(criterion):
    def body():
        bad = 0
        for m, T in INSTANCES:
            D = DissimilarityMatrix(m)
            P = hac_complete_link(D, T)
            validate_partition(P, D, WidthConstraint.diameter(T))
            bad += P.k < min_diameter_partition(m.tolist(), T)
        line = hac_complete_link(DissimilarityMatrix(line_matrix()), 2).k
        return bad == 0 and line == 3, f"{len(INSTANCES)} instances valid, {bad} below optimum; 1-D instance gives {line}"

    criterion(9, body)


def test_criterion_10_bench_smoke(criterion, tmp_path, capsys):
    def body():
        rng = np.random.default_rng(0)
        upper = np.triu(rng.random((80, 80)) < 0.5, 1)
        d = np.where(upper | upper.T, 1.0, 2.0)
        np.fill_diagonal(d, 0.0)
        path = tmp_path / "dense.csv"
        np.savetxt(path, d, delimiter=",", fmt="%g")
        easy = RunConfig(input=str(path), input_kind="matrix-csv", threshold=1.0, algorithm="hac")
        hard = RunConfig(input=str(path), input_kind="matrix-csv", threshold=1.0,
                         algorithm="exact-color", time_limit_s=0.01)
        calm = bench([easy], seeds=[0, 1, 2, 3])
        table = bench([easy, hard], seeds=[0, 1, 2, 3])
        cfg = tmp_path / "configs.json"
        cfg.write_text(json.dumps([{"input": str(path), "input_kind": "matrix-csv", "threshold": 1.0,
                                    "algorithm": "exact-color", "time_limit_s": 0.01}]))
        cli_code = main(["bench", "--configs", str(cfg), "--seeds", "0", "1"])
        capsys.readouterr()
        ok = (bench_exit_code(calm) == 0 and bench_exit_code(table) == 2 and cli_code == 2
              and table[1]["limit_hits"] == 4 and not table[1]["errors"])
        return ok, (
            f"bench completed; exit codes {bench_exit_code(calm)} (no limit) / {bench_exit_code(table)} "
            f"(limit hit {table[1]['limit_hits']}/4) / cli {cli_code}"
        )

    criterion(10, body)
