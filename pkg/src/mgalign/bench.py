"""Scaling comparison: K barycenter solves versus K(K-1)/2 pairwise solves.

Both routes run on the same synthetic K-modal batches; solver invocations
are counted directly (not inferred), and the count identity is asserted
for every cell. Wall times are informational.
"""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from . import barycenter as _bc
from .barycenter import solve_multi, solve_pairwise
from .solvers import HeuristicConfig
from .synthetic import separable_batch


@contextmanager
def _counting_solver():
    """Temporarily count every solver invocation made by the alignment layer."""
    counter = {"calls": 0}
    original = _bc.solve

    def counting(*args, **kwargs):
        counter["calls"] += 1
        return original(*args, **kwargs)

    _bc.solve = counting
    try:
        yield counter
    finally:
        _bc.solve = original


@dataclass(frozen=True)
class BenchRow:
    modalities: int
    batch_size: int
    mode: str
    solves: int
    seconds: float
    accuracy: float

    def as_tuple(self):
        return (
            self.modalities,
            self.batch_size,
            self.mode,
            self.solves,
            self.seconds,
            self.accuracy,
        )


def _identity_fraction_multi(report, size: int) -> float:
    good = np.ones(size, dtype=bool)
    for rep in report.reports.values():
        good &= rep.matching.sigma == np.arange(size)
    return float(good.mean())


def _identity_fraction_pairwise(reports: dict, size: int) -> float:
    good = np.ones(size, dtype=bool)
    for rep in reports.values():
        good &= rep.matching.sigma == np.arange(size)
    return float(good.mean())


def run_bench(
    modality_counts=(3, 4, 5, 6),
    batch_sizes=(8, 16, 32, 64),
    solver: str = "heuristic",
    k: int = 5,
    metric: str = "euclidean",
    seed: int = 0,
    config: HeuristicConfig | None = None,
) -> list:
    """Benchmark rows for every (K, B) cell in both alignment modes.

    Raises if a cell's observed solver-invocation count differs from the
    structural K (barycenter) or K(K-1)/2 (pairwise).
    """
    config = config or HeuristicConfig(restarts=1)
    rows = []
    for kcount in modality_counts:
        names = tuple(f"m{i}" for i in range(kcount))
        for size in batch_sizes:
            batch = separable_batch(
                size, dim=4, seed=seed + 31 * kcount + size, modalities=names
            )
            keff = min(k, size - 1)
            with _counting_solver() as counter:
                start = time.perf_counter()
                multi = solve_multi(batch, k=keff, solver=solver, metric=metric, config=config)
                bary_seconds = time.perf_counter() - start
                bary_solves = counter["calls"]
            if bary_solves != kcount:
                raise AssertionError(
                    f"expected {kcount} barycenter solves, counted {bary_solves}"
                )
            rows.append(
                BenchRow(
                    kcount, size, "barycenter", bary_solves, bary_seconds,
                    _identity_fraction_multi(multi, size),
                )
            )
            expected_pairs = kcount * (kcount - 1) // 2
            with _counting_solver() as counter:
                start = time.perf_counter()
                pairwise = solve_pairwise(batch, k=keff, solver=solver, metric=metric, config=config)
                pair_seconds = time.perf_counter() - start
                pair_solves = counter["calls"]
            if pair_solves != expected_pairs:
                raise AssertionError(
                    f"expected {expected_pairs} pairwise solves, counted {pair_solves}"
                )
            rows.append(
                BenchRow(
                    kcount, size, "pairwise", pair_solves, pair_seconds,
                    _identity_fraction_pairwise(pairwise, size),
                )
            )
    return rows


def save_bench_csv(path, rows, manifest_name: str | None = None) -> None:
    import csv

    with open(path, "w", newline="") as handle:
        if manifest_name:
            handle.write(f"# manifest: {manifest_name}\n")
        writer = csv.writer(handle)
        writer.writerow(["modalities", "batch_size", "mode", "solves", "seconds", "accuracy"])
        for row in rows:
            writer.writerow(list(row.as_tuple()))
