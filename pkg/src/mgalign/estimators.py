"""Scikit-learn style wrappers over the functional core.

These follow the estimator conventions (``get_params``/``set_params``,
``fit`` returning self, trailing-underscore fitted attributes) so the
alignment machinery drops into pipelines and model-selection tooling.
Distance and verification utilities stay plain functions, mirroring how
metrics live in the wider ecosystem.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.exceptions import NotFittedError

from .barycenter import TripletBatch, ground_truth, hamming_loss, solve_multi
from .graphs import DEFAULT_K, StructuredGraph, build_knn_graph
from .propagation import PropagationConfig, propagate
from .solvers import HeuristicConfig
from .training import EncoderSet, TrainConfig, adversarial_init, evaluate_matching, train
from .validation import check_features


class KnnGraphBuilder(BaseEstimator, TransformerMixin):
    """Turns an embedding matrix into a structured graph."""

    def __init__(self, k: int = DEFAULT_K, metric: str = "cosine"):
        self.k = k
        self.metric = metric

    def fit(self, X, y=None):
        check_features(X)
        return self

    def transform(self, X) -> StructuredGraph:
        return build_knn_graph(X, k=self.k, metric=self.metric)


class FeatureSmoother(BaseEstimator, TransformerMixin):
    """Neighborhood-mean smoothing of embeddings; arrays in, arrays out."""

    def __init__(
        self,
        k: int = DEFAULT_K,
        metric: str = "cosine",
        layers: int = 2,
        include_self: bool = True,
        mix: float = 0.5,
    ):
        self.k = k
        self.metric = metric
        self.layers = layers
        self.include_self = include_self
        self.mix = mix

    def fit(self, X, y=None):
        check_features(X)
        return self

    def transform(self, X) -> np.ndarray:
        graph = build_knn_graph(X, k=self.k, metric=self.metric)
        cfg = PropagationConfig(self.layers, self.include_self, self.mix)
        return propagate(graph, cfg)


def _as_batch(X) -> TripletBatch:
    if isinstance(X, TripletBatch):
        return X
    if isinstance(X, dict):
        return TripletBatch(X)
    arrays = list(X)
    if len(arrays) == 3:
        return TripletBatch.from_arrays(*arrays)
    return TripletBatch({f"m{i}": m for i, m in enumerate(arrays)})


class TripletAligner(BaseEstimator):
    """Solves the barycenter multi-alignment of a batch of modalities.

    ``fit`` solves; the matchings, per-modality reports, and total objective
    land in trailing-underscore attributes. ``predict`` returns the stacked
    assignment permutations and ``score`` the fraction of records matched
    correctly in every modality.
    """

    def __init__(
        self,
        k: int = DEFAULT_K,
        metric: str = "cosine",
        solver: str = "exact",
        restarts: int = 6,
        seed: int = 0,
    ):
        self.k = k
        self.metric = metric
        self.solver = solver
        self.restarts = restarts
        self.seed = seed

    def _solve(self, X):
        batch = _as_batch(X)
        keff = min(self.k, max(1, batch.size - 1))
        return batch, solve_multi(
            batch,
            k=keff,
            solver=self.solver,
            metric=self.metric,
            config=HeuristicConfig(restarts=self.restarts, seed=self.seed),
        )

    def fit(self, X, y=None):
        batch, result = self._solve(X)
        self.modalities_ = batch.modalities
        self.reports_ = result.reports
        self.matchings_ = result.matchings
        self.objective_ = result.total_objective
        self.hamming_ = hamming_loss(result.matchings, ground_truth(batch))
        return self

    def predict(self, X=None) -> np.ndarray:
        if X is None:
            if not hasattr(self, "matchings_"):
                raise NotFittedError("call fit first or pass a batch")
            matchings = self.matchings_
        else:
            matchings = self._solve(X)[1].matchings
        return np.stack([matchings[s].sigma for s in matchings.modalities])

    def score(self, X, y=None) -> float:
        batch, result = self._solve(X)
        good = np.ones(batch.size, dtype=bool)
        for s in batch.modalities:
            good &= result.reports[s].matching.sigma == np.arange(batch.size)
        return float(good.mean())


class AlignmentTrainer(BaseEstimator):
    """Fits per-modality linear encoders with solver-based gradients.

    ``fit`` consumes a dict of raw modality views and exposes the trained
    ``encoders_`` plus the per-epoch ``trace_``; ``score`` evaluates matching
    accuracy of the trained encoders on (held-out) views.
    """

    def __init__(
        self,
        embed_dim: int = 4,
        epochs: int = 50,
        learning_rate: float = 2.0,
        alpha: float = 1.0,
        surrogate_weight: float = 0.5,
        noise_scale: float = 5.0,
        step_size: float = 10.0,
        samples: int = 3,
        k: int = DEFAULT_K,
        metric: str = "euclidean",
        solver: str = "heuristic",
        init: str = "adversarial",
        seed: int = 0,
    ):
        self.embed_dim = embed_dim
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.alpha = alpha
        self.surrogate_weight = surrogate_weight
        self.noise_scale = noise_scale
        self.step_size = step_size
        self.samples = samples
        self.k = k
        self.metric = metric
        self.solver = solver
        self.init = init
        self.seed = seed

    def _config(self) -> TrainConfig:
        from .imle import ImleConfig

        return TrainConfig(
            alpha=self.alpha,
            surrogate_weight=self.surrogate_weight,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            imle=ImleConfig(
                step_size=self.step_size,
                noise_scale=self.noise_scale,
                samples=self.samples,
                seed=self.seed,
            ),
            k=self.k,
            metric=self.metric,
            solver=self.solver,
            heuristic=HeuristicConfig(restarts=1, seed=self.seed),
            seed=self.seed,
        )

    def fit(self, X: dict, y=None):
        raw_dim = next(iter(X.values())).shape[1]
        if self.init == "adversarial":
            encoders = adversarial_init(
                X, raw_dim, self.embed_dim, k=self.k, metric=self.metric,
                solver=self.solver, base_seed=self.seed,
            )
        else:
            encoders = EncoderSet.random(
                tuple(X), raw_dim, self.embed_dim, seed=self.seed
            )
        result = train(X, encoders, self._config())
        self.encoders_ = result.encoders
        self.decoders_ = result.decoders
        self.trace_ = result.trace
        return self

    def score(self, X: dict, y=None) -> float:
        if not hasattr(self, "encoders_"):
            raise NotFittedError("call fit first")
        return evaluate_matching(
            X, self.encoders_, k=self.k, solver=self.solver, metric=self.metric,
            heuristic=HeuristicConfig(restarts=2, seed=self.seed),
        )
