import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from mgalign import StructuredGraph, build_knn_graph


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_graph(rng, n=4, dim=3, k=2, metric="euclidean"):
    """Random k-NN graph over gaussian features."""
    feats = rng.normal(size=(n, dim))
    return build_knn_graph(feats, k=min(k, n - 1), metric=metric)


def graph_from_edges(feats, edges):
    return StructuredGraph(np.asarray(feats, dtype=float), frozenset(edges))
