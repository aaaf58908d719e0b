"""Graph distance from optimal alignment, with executable verification.

The optimal value of the alignment objective defines a metric between
equal-size structured graphs; it is zero exactly when a bijection matches
weights, features, and pairwise structure distances. Between two graphs,
interpolating matched features along the optimal coupling (and blending
the two structure spaces) yields a constant-speed geodesic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidParameter, SizeMismatch
from .graphs import AffinityPair, StructuredGraph, build_knn_graph, edge_affinity, vertex_affinity
from .solvers import solve_exact
from .validation import readonly

#: Absolute slack for the metric axioms (symmetry, triangle inequality).
AXIOM_TOL = 1e-9
#: Relative tolerance for the constant-speed geodesic identity.
SPEED_RTOL = 1e-6


def d_sga(g1, g2, metric: str = "euclidean", return_matching: bool = False):
    """Alignment distance: minimal objective over all one-to-one matchings.

    Requires equal node counts; solved exactly, so sizes are bounded by the
    enumeration limit. Any objects exposing ``features`` and ``structure``
    arrays may be compared (structured graphs, geodesic points).
    """
    n1 = g1.features.shape[0]
    n2 = g2.features.shape[0]
    if n1 != n2:
        raise SizeMismatch(f"graph sizes differ: {n1} vs {n2}")
    aff = AffinityPair(vertex_affinity(g1, g2, metric), edge_affinity(g1, g2))
    report = solve_exact(aff)
    if return_matching:
        return report.objective, report.matching
    return report.objective


def isomorphism_witness(g1, g2, metric: str = "euclidean", tol: float = AXIOM_TOL):
    """Bijection matching weights exactly and features/structure within
    ``tol``, or None when the graphs are not isomorphic.

    The candidate is the optimal matching; it is validated directly against
    the three isomorphism conditions rather than against the distance value.
    """
    _, matching = d_sga(g1, g2, metric, return_matching=True)
    sigma = matching.sigma
    if not np.array_equal(g1.weights, g2.weights[sigma]):
        return None
    if np.max(np.abs(g1.features - g2.features[sigma])) > tol:
        return None
    if np.max(np.abs(g1.structure - g2.structure[np.ix_(sigma, sigma)])) > tol:
        return None
    return sigma.copy()


@dataclass(frozen=True)
class MetricReport:
    """Outcome of randomized axiom verification; empty violations = pass."""

    trials: int
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"trials": self.trials, "violations": self.violations}


def random_graph_sampler(n: int, dim: int = 3, k: int = 2, metric: str = "euclidean"):
    """Sampler of random k-NN graphs over gaussian features, for verification."""

    def sample(rng) -> StructuredGraph:
        return build_knn_graph(rng.normal(size=(n, dim)), k=k, metric=metric)

    return sample


def _graph_snapshot(g) -> dict:
    return {
        "features": np.asarray(g.features).tolist(),
        "edges": sorted([int(i), int(j)] for i, j in getattr(g, "edges", frozenset())),
    }


def verify_metric_axioms(
    sampler,
    trials: int,
    seed: int = 0,
    metric: str = "euclidean",
    tol: float = AXIOM_TOL,
    distance=None,
) -> MetricReport:
    """Check symmetry, the triangle inequality, constructed positivity, and
    the isomorphism equality relation over random triples.

    Violations are report content (with the witnessing instances), never
    exceptions. ``distance`` substitutes the evaluated distance (used by the
    harness self-test to prove that a broken metric is flagged).
    """
    dist = distance if distance is not None else d_sga
    rng = np.random.default_rng(seed)
    violations = []

    def record(kind, trial, lhs, rhs, graphs):
        violations.append(
            {
                "kind": kind,
                "trial": trial,
                "lhs": float(lhs),
                "rhs": float(rhs),
                "instances": [_graph_snapshot(g) for g in graphs],
            }
        )

    for trial in range(trials):
        a, b, c = sampler(rng), sampler(rng), sampler(rng)
        d_ab = dist(a, b, metric)
        d_ba = dist(b, a, metric)
        if abs(d_ab - d_ba) > tol:
            record("symmetry", trial, d_ab, d_ba, (a, b))
        d_ac = dist(a, c, metric)
        d_bc = dist(b, c, metric)
        if d_ac > d_ab + d_bc + tol:
            record("triangle", trial, d_ac, d_ab + d_bc, (a, b, c))
        # positivity, tested constructively: one perturbed feature
        bumped = a.features.copy()
        bumped[trial % a.n_nodes, 0] += 0.1
        a_bumped = StructuredGraph(bumped, a.edges, a.weights, a.structure)
        d_pos = dist(a, a_bumped, metric)
        if not d_pos > 0.0:
            record("positivity", trial, d_pos, 0.0, (a, a_bumped))
        # equality relation: a relabeled copy must sit at distance zero
        # with a verifiable witness
        relabeled = a.relabel(rng.permutation(a.n_nodes))
        d_iso = dist(a, relabeled, metric)
        if d_iso > tol or isomorphism_witness(a, relabeled, metric) is None:
            record("identity", trial, d_iso, 0.0, (a, relabeled))
    return MetricReport(trials, violations)


@dataclass(frozen=True)
class GeodesicPoint:
    """Point on the interpolation path between two matched graphs.

    One atom per matched pair ``(i, sigma(i))``: its feature is the convex
    blend of the endpoints' features; distances between atoms blend the two
    endpoint structure spaces with the same weight. Exposes the same array
    surface as a structured graph so it can be fed back to ``d_sga``.
    """

    t: float
    features: np.ndarray
    weights: np.ndarray
    source_index: np.ndarray
    target_index: np.ndarray
    structure: np.ndarray

    def __post_init__(self):
        for name in ("features", "weights", "source_index", "target_index", "structure"):
            object.__setattr__(self, name, readonly(np.asarray(getattr(self, name)).copy()))

    @property
    def n_nodes(self) -> int:
        return self.features.shape[0]

    def to_dict(self) -> dict:
        return {
            "t": float(self.t),
            "atoms": [
                {
                    "feature": self.features[p].tolist(),
                    "source": int(self.source_index[p]),
                    "target": int(self.target_index[p]),
                    "weight": float(self.weights[p]),
                }
                for p in range(self.n_nodes)
            ],
            "structure": self.structure.tolist(),
        }


def geodesic_interpolate(g1, g2, t: float, metric: str = "euclidean") -> GeodesicPoint:
    """Point at parameter ``t`` on the constant-speed path from g1 to g2.

    Only the Euclidean feature metric is supported: the interpolation is a
    straight line in feature space, and its constant-speed property relies
    on norm homogeneity, which angular distances do not provide.
    """
    if metric != "euclidean":
        raise InvalidParameter(
            "geodesic interpolation requires the euclidean feature metric; "
            f"got {metric!r}"
        )
    if not 0.0 <= t <= 1.0:
        raise InvalidParameter(f"t must lie in [0, 1], got {t}")
    _, matching = d_sga(g1, g2, metric, return_matching=True)
    sigma = matching.sigma
    n = sigma.shape[0]
    feats = (1.0 - t) * g1.features + t * g2.features[sigma]
    d0 = g1.structure
    d1 = g2.structure[np.ix_(sigma, sigma)]
    structure = (1.0 - t) * d0 + t * d1
    return GeodesicPoint(
        t=float(t),
        features=feats,
        weights=np.ones(n),
        source_index=np.arange(n),
        target_index=sigma,
        structure=structure,
    )


def verify_constant_speed(
    g1,
    g2,
    grid=(0.0, 0.25, 0.5, 0.75, 1.0),
    rtol: float = SPEED_RTOL,
) -> list:
    """Deviations from ``d(mu_u, mu_t) = |t-u| * d(mu_0, mu_1)`` on a grid.

    Returns one record per violating ``(u, t)`` pair; an empty list means
    the constant-speed identity held everywhere on the grid.
    """
    base = d_sga(geodesic_interpolate(g1, g2, 0.0), geodesic_interpolate(g1, g2, 1.0))
    violations = []
    for u in grid:
        for t in grid:
            actual = d_sga(geodesic_interpolate(g1, g2, u), geodesic_interpolate(g1, g2, t))
            expected = abs(t - u) * base
            tol = rtol * max(expected, base, 1e-12)
            if abs(actual - expected) > tol:
                violations.append(
                    {"kind": "constant_speed", "u": u, "t": t, "lhs": actual, "rhs": expected}
                )
    return violations
