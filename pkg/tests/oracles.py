"""Independent reference implementations used to cross-check the package.

Everything here is deliberately written with plain Python loops and basic
arithmetic, sharing no code path with the library under test.
"""

import itertools
import math


def column_mean(rows):
    dim = len(rows[0])
    return [sum(r[c] for r in rows) / len(rows) for c in range(dim)]


def euclidean(u, v):
    return math.sqrt(sum((a - b) ** 2 for a, b in zip(u, v)))


def cosine_distance(u, v):
    dot = sum(a * b for a, b in zip(u, v))
    nu = math.sqrt(sum(a * a for a in u))
    nv = math.sqrt(sum(b * b for b in v))
    d = 1.0 - dot / (nu * nv)
    return min(max(d, 0.0), 2.0)


def knn_edge_union(points, k, dist):
    """Union of each node's k nearest others, ties toward the smaller index."""
    n = len(points)
    edges = set()
    for i in range(n):
        order = sorted((j for j in range(n) if j != i), key=lambda j: (dist(points[i], points[j]), j))
        for j in order[:k]:
            edges.add((min(i, j), max(i, j)))
    return edges


def floyd_warshall_hops(edges, n):
    """All-pairs hop counts; disconnected pairs clamped to the sentinel n."""
    inf = float("inf")
    d = [[0.0 if i == j else inf for j in range(n)] for i in range(n)]
    for i, j in edges:
        d[i][j] = 1.0
        d[j][i] = 1.0
    for m in range(n):
        for i in range(n):
            for j in range(n):
                if d[i][m] + d[m][j] < d[i][j]:
                    d[i][j] = d[i][m] + d[m][j]
    return [[float(n) if x == inf else x for x in row] for row in d]


def sga_objective(av, ae, sigma):
    """Double-loop evaluation of the alignment objective at a permutation."""
    n = len(sigma)
    total = 0.0
    for i in range(n):
        total += av[i][sigma[i]]
    for i in range(n):
        for k in range(n):
            total += ae[i][sigma[i]][k][sigma[k]]
    return total


def sga_bruteforce(av, ae):
    """Exhaustive minimum of the alignment objective over all permutations.

    Returns (best objective, lexicographically smallest optimal permutation).
    Inputs are nested Python lists; ae is indexed [i][j][k][l] with i, k in
    the first graph and j, l in the second.
    """
    n = len(av)
    best_cost, best_perm = None, None
    for perm in itertools.permutations(range(n)):
        cost = sga_objective(av, ae, perm)
        if best_cost is None or cost < best_cost:
            best_cost, best_perm = cost, perm
    return best_cost, list(best_perm)


def linear_assignment_bruteforce(av):
    """Minimum linear-assignment value by enumeration."""
    n = len(av)
    return min(sum(av[i][p[i]] for i in range(n)) for p in itertools.permutations(range(n)))


def hamming_matrices(sigma_hat, sigma_star):
    """Expand two permutations to 0/1 matrices and evaluate
    <Vhat, 1-Vstar> + <Vstar, 1-Vhat> entry by entry."""
    n = len(sigma_hat)
    vh = [[1.0 if sigma_hat[i] == j else 0.0 for j in range(n)] for i in range(n)]
    vs = [[1.0 if sigma_star[i] == j else 0.0 for j in range(n)] for i in range(n)]
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += vh[i][j] * (1.0 - vs[i][j]) + vs[i][j] * (1.0 - vh[i][j])
    return total


def tensor_abs_difference(d1, d2):
    """Edge affinity tensor [i][j][k][l] = |d1[i][k] - d2[j][l]| by quadruple loop."""
    m, n = len(d1), len(d2)
    return [
        [
            [[abs(d1[i][k] - d2[j][l]) for l in range(n)] for k in range(m)]
            for j in range(n)
        ]
        for i in range(m)
    ]
