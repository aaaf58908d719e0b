"""Multi-graph alignment through a barycenter graph.

A batch of aligned records, one embedding per modality, is turned into one
graph per modality plus a barycenter graph whose node k averages the
modality features of record k. Aligning K graphs then reduces to K
independent pairwise solves against the barycenter; ground truth is the
identity matching because barycenter node k is built from record k.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .graphs import DEFAULT_K, StructuredGraph, affinity_pair, build_knn_graph
from .parallel import parallel_map
from .solvers import HeuristicConfig, Matching, SolveReport, solve
from .validation import check_features

#: Default modality order: visual, answer, extended answer.
MODALITIES = ("v", "a", "ae")


@dataclass(frozen=True)
class TripletBatch:
    """Aligned per-modality embedding matrices; record k refers to the same
    sample in every modality."""

    views: dict

    def __post_init__(self):
        if len(self.views) < 2:
            raise ShapeError("need at least two modalities")
        views = {}
        shape = None
        for name, mat in self.views.items():
            arr = check_features(mat, name=f"view {name!r}")
            if shape is None:
                shape = arr.shape
            elif arr.shape != shape:
                raise ShapeError(
                    f"view {name!r} has shape {arr.shape}, expected {shape}"
                )
            arr = arr.copy()
            arr.flags.writeable = False
            views[str(name)] = arr
        object.__setattr__(self, "views", views)

    @classmethod
    def from_arrays(cls, v, a, ae) -> "TripletBatch":
        return cls({"v": v, "a": a, "ae": ae})

    @property
    def modalities(self) -> tuple:
        return tuple(self.views)

    @property
    def size(self) -> int:
        return next(iter(self.views.values())).shape[0]

    @property
    def dim(self) -> int:
        return next(iter(self.views.values())).shape[1]

    def permuted(self, order) -> "TripletBatch":
        """Same batch with records reordered identically in every modality."""
        order = np.asarray(order, dtype=int)
        return TripletBatch({s: m[order] for s, m in self.views.items()})


def barycenter_features(batch: TripletBatch) -> np.ndarray:
    """Per-record mean of the modality features."""
    return np.mean(list(batch.views.values()), axis=0)


def _graph(features: np.ndarray, k: int, metric: str) -> StructuredGraph:
    if features.shape[0] == 1:
        return StructuredGraph(features, frozenset())
    return build_knn_graph(features, k=k, metric=metric)


def build_barycenter(batch: TripletBatch, k: int = DEFAULT_K, metric: str = "cosine") -> StructuredGraph:
    """Barycenter graph: averaged features with k-NN edges (none when B=1)."""
    return _graph(barycenter_features(batch), k, metric)


def modality_graphs(batch: TripletBatch, k: int = DEFAULT_K, metric: str = "cosine") -> dict:
    return {s: _graph(m, k, metric) for s, m in batch.views.items()}


@dataclass(frozen=True)
class MultiMatching:
    """One matching per modality, mapping that modality's graph to the
    barycenter."""

    matchings: dict

    def __post_init__(self):
        if not self.matchings:
            raise ShapeError("no matchings")
        sizes = {m.n for m in self.matchings.values()}
        if len(sizes) != 1:
            raise ShapeError(f"matching sizes disagree: {sorted(sizes)}")
        object.__setattr__(self, "matchings", dict(self.matchings))

    @property
    def size(self) -> int:
        return next(iter(self.matchings.values())).n

    @property
    def modalities(self) -> tuple:
        return tuple(self.matchings)

    def __getitem__(self, modality: str) -> Matching:
        return self.matchings[modality]

    def triplet_correspondence(self) -> list:
        """Record tuples grouped by barycenter node: entry j lists, per
        modality, the node matched to barycenter node j."""
        inverses = {s: np.argsort(m.sigma) for s, m in self.matchings.items()}
        return [
            tuple(int(inverses[s][j]) for s in self.matchings)
            for j in range(self.size)
        ]


@dataclass(frozen=True)
class MultiSolveReport:
    """Per-modality solve reports against the shared barycenter."""

    reports: dict
    total_objective: float

    @property
    def matchings(self) -> MultiMatching:
        return MultiMatching({s: r.matching for s, r in self.reports.items()})

    def to_dict(self) -> dict:
        return {
            "total_objective": float(self.total_objective),
            "matchings": {s: r.to_dict() for s, r in self.reports.items()},
        }


def ground_truth(batch: TripletBatch) -> MultiMatching:
    """Identity matching per modality (record k built barycenter node k)."""
    n = batch.size
    return MultiMatching({s: Matching.identity(n) for s in batch.modalities})


def matching_hamming(predicted: Matching, truth: Matching) -> float:
    """Hamming loss between two assignment matrices,
    <Vhat, 1-Vstar> + <Vstar, 1-Vhat>; equals twice the number of
    disagreeing assignments."""
    if predicted.n != truth.n:
        raise ShapeError(f"matching sizes disagree: {predicted.n} vs {truth.n}")
    return 2.0 * float(np.sum(predicted.sigma != truth.sigma))


def hamming_loss(predicted: MultiMatching, truth: MultiMatching) -> float:
    """Total Hamming loss summed over modalities."""
    if predicted.modalities != truth.modalities:
        raise ShapeError("modality sets disagree")
    return float(
        sum(matching_hamming(predicted[s], truth[s]) for s in predicted.modalities)
    )


def solve_multi(
    batch: TripletBatch,
    k: int = DEFAULT_K,
    solver: str = "exact",
    metric: str = "cosine",
    config: HeuristicConfig | None = None,
    workers: int | None = None,
) -> MultiSolveReport:
    """Align every modality graph to the shared barycenter graph.

    The K-way problem is separable: each modality is solved independently
    and the total objective is the sum over modalities.
    """
    bary = build_barycenter(batch, k, metric)
    graphs = modality_graphs(batch, k, metric)

    def solve_one(modality: str) -> SolveReport:
        aff = affinity_pair(graphs[modality], bary, metric)
        return solve(aff, solver, config)

    results = parallel_map(solve_one, batch.modalities, workers)
    reports = dict(zip(batch.modalities, results))
    total = float(sum(r.objective for r in reports.values()))
    return MultiSolveReport(reports, total)


def solve_pairwise(
    batch: TripletBatch,
    k: int = DEFAULT_K,
    solver: str = "exact",
    metric: str = "cosine",
    config: HeuristicConfig | None = None,
    workers: int | None = None,
) -> dict:
    """Ablation mode: align every unordered modality pair directly.

    Returns ``{(s1, s2): SolveReport}`` for all pairs in modality order.
    Solve count scales as K(K-1)/2 versus K for the barycenter route.
    """
    graphs = modality_graphs(batch, k, metric)
    names = batch.modalities
    pairs = [(names[i], names[j]) for i in range(len(names)) for j in range(i + 1, len(names))]

    def solve_one(pair) -> SolveReport:
        s1, s2 = pair
        return solve(affinity_pair(graphs[s1], graphs[s2], metric), solver, config)

    results = parallel_map(solve_one, pairs, workers)
    return dict(zip(pairs, results))


def pairwise_triplet_correspondence(pairwise_reports: dict) -> list:
    """Record tuples induced by pairwise matchings, anchored on the first
    modality: entry i follows i through each matching that starts at the
    anchor."""
    anchor = next(iter(pairwise_reports))[0]
    chains = {s2: r.matching.sigma for (s1, s2), r in pairwise_reports.items() if s1 == anchor}
    n = next(iter(chains.values())).shape[0]
    order = [anchor] + list(chains)
    out = []
    for i in range(n):
        entry = {anchor: i}
        for s2, sigma in chains.items():
            entry[s2] = int(sigma[i])
        out.append(tuple(entry[s] for s in order))
    return out
