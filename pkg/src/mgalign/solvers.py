"""Solvers for the second-order graph alignment (quadratic assignment) problem.

The objective over a permutation matrix V is

    sum_ij  Av[i,j] V[i,j]  +  sum_ijkl  Ae[i,j,k,l] V[i,j] V[k,l]

minimized over all one-to-one matchings. ``solve_exact`` enumerates
permutations (bounded instance size); ``solve_heuristic`` seeds a linear
assignment and refines it with 2-swap local search.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ShapeError, TooLarge
from .graphs import AffinityPair
from .validation import check_permutation, readonly

#: Largest instance solved by exhaustive enumeration (9! = 362,880 candidates).
EXACT_LIMIT = 9


@dataclass(frozen=True)
class Matching:
    """Bijective node assignment; ``sigma[i] = j`` matches i in g1 to j in g2."""

    sigma: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "sigma", readonly(check_permutation(self.sigma).copy()))

    @property
    def n(self) -> int:
        return self.sigma.shape[0]

    def to_matrix(self) -> np.ndarray:
        """Dense 0/1 assignment matrix with exactly one 1 per row and column."""
        m = np.zeros((self.n, self.n))
        m[np.arange(self.n), self.sigma] = 1.0
        return m

    def edge_match_tensor(self) -> np.ndarray:
        """Induced pairwise tensor E with E[i,j,k,l] = V[i,j] * V[k,l]."""
        v = self.to_matrix()
        return np.einsum("ij,kl->ijkl", v, v)

    @classmethod
    def identity(cls, n: int) -> "Matching":
        return cls(np.arange(n))


@dataclass(frozen=True)
class SolveReport:
    """Solver output: optimal-or-best matching plus bookkeeping.

    ``trace`` holds the objective after the initial assignment and after each
    accepted local-search move (length 1 for the exact solver).
    """

    matching: Matching
    objective: float
    method: str
    iterations: int
    trace: tuple = field(default=())

    def to_dict(self) -> dict:
        return {
            "n": self.matching.n,
            "sigma": [int(x) for x in self.matching.sigma],
            "objective": float(self.objective),
            "method": self.method,
        }


def _check_square_instance(aff: AffinityPair) -> int:
    m, n = aff.vertex.shape
    if m != n:
        raise ShapeError(f"solver requires a square instance, got {m}x{n}")
    return n


def objective_value(aff: AffinityPair, matching: Matching) -> float:
    """Evaluate the alignment objective at a given matching."""
    n = _check_square_instance(aff)
    if matching.n != n:
        raise ShapeError(f"matching size {matching.n} != instance size {n}")
    sigma = matching.sigma
    idx = np.arange(n)
    linear = aff.vertex[idx, sigma].sum()
    quad = aff.edge[idx[:, None], sigma[:, None], idx[None, :], sigma[None, :]].sum()
    return float(linear + quad)


def _all_permutation_costs(aff: AffinityPair) -> tuple[np.ndarray, np.ndarray]:
    """Costs of every permutation, enumerated in lexicographic order."""
    n = aff.vertex.shape[0]
    perms = np.array(list(itertools.permutations(range(n))), dtype=np.intp)
    idx = np.arange(n)
    costs = aff.vertex[idx, perms].sum(axis=1)
    for i in range(n):
        for k in range(n):
            costs += aff.edge[i, perms[:, i], k, perms[:, k]]
    return perms, costs


def solve_exact(aff: AffinityPair) -> SolveReport:
    """Global minimizer by exhaustive enumeration; ties take the
    lexicographically smallest permutation."""
    n = _check_square_instance(aff)
    if n > EXACT_LIMIT:
        raise TooLarge(f"exact solver bounded at n={EXACT_LIMIT}, got n={n}")
    perms, costs = _all_permutation_costs(aff)
    best = int(np.argmin(costs))  # first occurrence = lexicographically smallest
    matching = Matching(perms[best])
    obj = objective_value(aff, matching)
    return SolveReport(matching, obj, "exact", iterations=len(costs), trace=(obj,))


@dataclass(frozen=True)
class HeuristicConfig:
    """Settings for the local-search solver.

    ``max_swaps_per_node`` caps accepted swaps at ``max_swaps_per_node * n``
    per search. ``restarts`` adds that many seeded random starting
    permutations on top of the deterministic ones; the whole procedure is
    deterministic given ``seed``.
    """

    max_swaps_per_node: int = 50
    restarts: int = 6
    seed: int = 0


def _swap_delta(aff: AffinityPair, sigma: np.ndarray, p: int, q: int) -> float:
    """Objective change from swapping sigma[p] and sigma[q].

    Makes no symmetry assumption on the edge tensor, so it stays correct for
    noise-perturbed instances.
    """
    n = sigma.shape[0]
    a, b = sigma[p], sigma[q]
    av, ae = aff.vertex, aff.edge
    delta = av[p, b] + av[q, a] - av[p, a] - av[q, b]
    idx = np.arange(n)
    ks = idx[(idx != p) & (idx != q)]
    sk = sigma[ks]
    # changed rows (i in {p,q}) against unchanged columns, and vice versa
    delta += (
        ae[p, b, ks, sk].sum() + ae[q, a, ks, sk].sum()
        - ae[p, a, ks, sk].sum() - ae[q, b, ks, sk].sum()
    )
    delta += (
        ae[ks, sk, p, b].sum() + ae[ks, sk, q, a].sum()
        - ae[ks, sk, p, a].sum() - ae[ks, sk, q, b].sum()
    )
    # terms with both indices in {p,q}
    delta += (
        ae[p, b, p, b] + ae[q, a, q, a] + ae[p, b, q, a] + ae[q, a, p, b]
        - ae[p, a, p, a] - ae[q, b, q, b] - ae[p, a, q, b] - ae[q, b, p, a]
    )
    return float(delta)


def _linear_phase(aff: AffinityPair) -> list[np.ndarray]:
    """Candidate starts: assignment on Av alone and on Av plus a row-wise
    aggregated edge potential (mean over l, summed over k)."""
    av = aff.vertex
    potential = aff.edge.mean(axis=3).sum(axis=2)
    starts = []
    for cost in (av, av + potential):
        rows, cols = linear_sum_assignment(cost)
        sigma = np.empty_like(cols)
        sigma[rows] = cols
        starts.append(sigma)
    return starts


def _all_swap_deltas(aff: AffinityPair, sigma: np.ndarray, pairs: tuple) -> np.ndarray:
    """Objective changes for every 2-swap, computed in one vectorized pass.

    Uses the row context ``R[i,j] = sum_k E[i,j,k,sigma_k]`` and column
    context ``C[i,j] = sum_k E[k,sigma_k,i,j]``, then corrects the entries
    whose partner assignment also changes. No symmetry assumption on E.
    """
    p, q = pairs
    lin, e = aff.vertex, aff.edge
    n = sigma.shape[0]
    idx = np.arange(n)
    r = e[:, :, idx, sigma].sum(axis=2)
    c = e[idx, sigma, :, :].sum(axis=0)
    a = sigma[p]
    b = sigma[q]
    delta = lin[p, b] + lin[q, a] - lin[p, a] - lin[q, b]
    delta += (
        r[p, b] - e[p, b, p, a] - e[p, b, q, b] + e[p, b, p, b] + e[p, b, q, a] - r[p, a]
        + r[q, a] - e[q, a, p, a] - e[q, a, q, b] + e[q, a, p, b] + e[q, a, q, a] - r[q, b]
    )
    delta += (
        c[p, b] - e[p, a, p, b] - e[q, b, p, b] - c[p, a] + e[p, a, p, a] + e[q, b, p, a]
        + c[q, a] - e[p, a, q, a] - e[q, b, q, a] - c[q, b] + e[p, a, q, b] + e[q, b, q, b]
    )
    return delta


def _local_search(aff: AffinityPair, sigma: np.ndarray, max_swaps: int) -> tuple[np.ndarray, list[float], int]:
    """Best-improvement 2-swap descent until no improving swap remains."""
    sigma = np.asarray(sigma, dtype=np.intp).copy()
    n = sigma.shape[0]
    trace = [objective_value(aff, Matching(sigma))]
    swaps = 0
    if n < 2:
        return sigma, trace, swaps
    pairs = np.triu_indices(n, k=1)
    # accept threshold guards against float-noise oscillation
    while swaps < max_swaps:
        deltas = _all_swap_deltas(aff, sigma, pairs)
        best = int(np.argmin(deltas))
        if deltas[best] >= -1e-12:
            break
        p, q = pairs[0][best], pairs[1][best]
        sigma[p], sigma[q] = sigma[q], sigma[p]
        swaps += 1
        trace.append(objective_value(aff, Matching(sigma)))
    return sigma, trace, swaps


def solve_heuristic(aff: AffinityPair, config: HeuristicConfig | None = None) -> SolveReport:
    """Linear-assignment seeds plus 2-swap local search with seeded restarts.

    Starts from the plain linear-term assignment, the potential-augmented
    assignment, the identity, and ``config.restarts`` seeded random
    permutations; each start descends by best-improvement 2-swaps. The
    returned objective never exceeds the full objective of the plain
    linear-term assignment, because that assignment is among the starts and
    every accepted swap strictly improves.
    """
    config = config or HeuristicConfig()
    n = _check_square_instance(aff)
    starts = _linear_phase(aff) + [np.arange(n)]
    rng = np.random.default_rng(config.seed)
    for _ in range(config.restarts):
        starts.append(rng.permutation(n))
    max_swaps = config.max_swaps_per_node * n
    best_sigma, best_obj, best_trace = None, np.inf, ()
    total_swaps = 0
    for start in starts:
        sigma, trace, swaps = _local_search(aff, start, max_swaps)
        total_swaps += swaps
        obj = trace[-1]
        better = obj < best_obj - 1e-12
        tied = abs(obj - best_obj) <= 1e-12 and tuple(sigma) < tuple(best_sigma)
        if better or tied:
            best_sigma, best_obj, best_trace = sigma, obj, trace
    matching = Matching(best_sigma)
    return SolveReport(
        matching, objective_value(aff, matching), "heuristic", total_swaps, tuple(best_trace)
    )


def solve(aff: AffinityPair, method: str = "exact", config: HeuristicConfig | None = None) -> SolveReport:
    """Dispatch to a solver by name (``exact`` or ``heuristic``)."""
    if method == "exact":
        return solve_exact(aff)
    if method == "heuristic":
        return solve_heuristic(aff, config)
    raise ValueError(f"unknown solver {method!r}")
