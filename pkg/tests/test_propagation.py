import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from mgalign import InvalidParameter, StructuredGraph
from mgalign.propagation import PropagationConfig, propagate, propagation_operator

from conftest import graph_from_edges, random_graph


class TestPropagate:
    def test_empty_edges_identity(self, rng):
        feats = rng.normal(size=(4, 3))
        g = graph_from_edges(feats, [])
        out = propagate(g, PropagationConfig(layers=3, mix=0.5))
        assert np.allclose(out, feats)

    def test_complete_graph_identical_features_unchanged(self):
        feats = np.tile([2.0, -1.0], (4, 1))
        g = graph_from_edges(feats, [(i, j) for i in range(4) for j in range(i + 1, 4)])
        out = propagate(g, PropagationConfig(layers=2, mix=0.5))
        assert np.allclose(out, feats)

    def test_three_node_path_hand_computed(self):
        # path 0-1-2, one layer, mix 0.5:
        #   node 0: 0.5*f0 + 0.5*mean(f0, f1)
        #   node 1: 0.5*f1 + 0.5*mean(f0, f1, f2)
        #   node 2: 0.5*f2 + 0.5*mean(f1, f2)
        feats = np.array([[0.0], [6.0], [12.0]])
        g = graph_from_edges(feats, [(0, 1), (1, 2)])
        out = propagate(g, PropagationConfig(layers=1, mix=0.5))
        assert np.allclose(out.ravel(), [0.5 * 0 + 0.5 * 3, 0.5 * 6 + 0.5 * 6, 0.5 * 12 + 0.5 * 9])

    def test_zero_layers_is_identity(self, rng):
        g = random_graph(rng, n=5)
        assert np.array_equal(propagate(g, PropagationConfig(layers=0)), g.features)

    def test_default_two_layers(self):
        assert PropagationConfig().layers == 2

    @given(st.integers(0, 3), st.floats(0.0, 1.0))
    def test_permutation_equivariance(self, layers, mix):
        rng = np.random.default_rng(17)
        g = random_graph(rng, n=5)
        perm = rng.permutation(5)
        cfg = PropagationConfig(layers=layers, mix=mix)
        base = propagate(g, cfg)
        moved = propagate(g.relabel(perm), cfg)
        assert np.allclose(moved[perm], base)

    def test_linearity_in_features(self, rng):
        g = random_graph(rng, n=6)
        cfg = PropagationConfig(layers=2, mix=0.7)
        other = rng.normal(size=g.features.shape)
        h = StructuredGraph(other, g.edges)
        combined = StructuredGraph(2.0 * g.features + 3.0 * other, g.edges)
        assert np.allclose(
            propagate(combined, cfg), 2.0 * propagate(g, cfg) + 3.0 * propagate(h, cfg)
        )

    def test_convex_neighborhood_containment(self, rng):
        g = random_graph(rng, n=6)
        cfg = PropagationConfig(layers=1, mix=0.5)
        out = propagate(g, cfg)
        neighbors = {i: {i} for i in range(6)}
        for i, j in g.edges:
            neighbors[i].add(j)
            neighbors[j].add(i)
        for i in range(6):
            group = sorted(neighbors[i])
            lo = g.features[group].min(axis=0)
            hi = g.features[group].max(axis=0)
            assert np.all(out[i] >= lo - 1e-12) and np.all(out[i] <= hi + 1e-12)

    def test_matches_operator(self, rng):
        g = random_graph(rng, n=6)
        cfg = PropagationConfig(layers=2, mix=0.4)
        assert np.allclose(propagate(g, cfg), propagation_operator(g, cfg) @ g.features)

    def test_exclude_self(self):
        feats = np.array([[0.0], [4.0]])
        g = graph_from_edges(feats, [(0, 1)])
        out = propagate(g, PropagationConfig(layers=1, include_self=False, mix=1.0))
        assert np.allclose(out.ravel(), [4.0, 0.0])

    def test_layer_weights_hook(self, rng):
        g = random_graph(rng, n=4, dim=3)
        w = [np.eye(3), 2.0 * np.eye(3)]
        cfg = PropagationConfig(layers=2, mix=0.5)
        assert np.allclose(propagate(g, cfg, layer_weights=w), 2.0 * propagate(g, cfg))
        with pytest.raises(InvalidParameter):
            propagate(g, cfg, layer_weights=[np.eye(3)])


class TestPropagationConfig:
    def test_validation(self):
        with pytest.raises(InvalidParameter):
            PropagationConfig(layers=-1)
        with pytest.raises(InvalidParameter):
            PropagationConfig(mix=1.5)
