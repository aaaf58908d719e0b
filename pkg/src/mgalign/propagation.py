"""Parameter-free feature smoothing over graph neighborhoods.

Each layer blends a node's feature with the mean over its closed
neighborhood; weightless by default so alignment stays deterministic, with
an optional linear map per layer for the training demo.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameter
from .graphs import StructuredGraph


@dataclass(frozen=True)
class PropagationConfig:
    layers: int = 2
    include_self: bool = True
    mix: float = 0.5

    def __post_init__(self):
        if self.layers < 0:
            raise InvalidParameter(f"layers must be >= 0, got {self.layers}")
        if not 0.0 <= self.mix <= 1.0:
            raise InvalidParameter(f"mix must lie in [0, 1], got {self.mix}")


def propagation_operator(g: StructuredGraph, cfg: PropagationConfig | None = None) -> np.ndarray:
    """Linear operator equal to applying all smoothing layers.

    Row i averages the closed neighborhood of node i (falling back to the
    node itself when the neighborhood is empty), blended with identity by
    ``mix``; the full operator is that layer matrix raised to ``layers``.
    """
    cfg = cfg or PropagationConfig()
    n = g.n_nodes
    neighbors = [[] for _ in range(n)]
    for i, j in g.edges:
        neighbors[i].append(j)
        neighbors[j].append(i)
    layer = np.zeros((n, n))
    for i in range(n):
        group = sorted(neighbors[i] + [i]) if cfg.include_self else sorted(neighbors[i])
        if not group:
            group = [i]
        share = cfg.mix / len(group)
        for j in group:
            layer[i, j] += share
        layer[i, i] += 1.0 - cfg.mix
    return np.linalg.matrix_power(layer, cfg.layers)


def propagate(
    g: StructuredGraph,
    cfg: PropagationConfig | None = None,
    layer_weights=None,
) -> np.ndarray:
    """Smoothed node features; identity when ``layers`` is zero.

    ``layer_weights`` optionally applies one (d_out, d_in) matrix after each
    smoothing layer (training-demo hook; default path has no parameters).
    """
    cfg = cfg or PropagationConfig()
    if layer_weights is not None and len(layer_weights) != cfg.layers:
        raise InvalidParameter(
            f"need one weight matrix per layer ({cfg.layers}), got {len(layer_weights)}"
        )
    if layer_weights is None:
        return propagation_operator(g, cfg) @ g.features
    single = propagation_operator(g, PropagationConfig(1, cfg.include_self, cfg.mix))
    feats = g.features.copy()
    for w in layer_weights:
        feats = (single @ feats) @ np.asarray(w, dtype=float).T
    return feats
