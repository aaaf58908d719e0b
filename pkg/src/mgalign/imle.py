"""Black-box gradients through the alignment solver.

The solver's output is piecewise constant in the affinities, so gradients
of the Hamming supervision loss are estimated by a coupled difference of
two solves: one on a Gumbel-perturbed instance, and one on the same
perturbed instance shifted along the loss gradient so that supervised
assignments become cheaper. Both solves of a sample share one noise draw.

The loss gradient with respect to the predicted assignment matrix is the
constant matrix ``1 - 2 V*``; it is applied to the vertex matrix directly
and lifted to the edge tensor through the induced pairwise tensor
``E*[i,j,k,l] = V*[i,j] V*[k,l]``. Because this solver minimizes costs
(the perturb-and-map literature phrases the estimator for maximizers),
the target shift is ``+ step_size * (1 - 2 V*)``, which lowers the cost
of supervised entries, and the per-sample gradient is
``solution(target) - solution(noisy)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InvalidParameter, InvalidScale
from .graphs import AffinityPair
from .parallel import parallel_map
from .solvers import HeuristicConfig, Matching, solve
from .validation import readonly


@dataclass(frozen=True)
class ImleConfig:
    """Estimator settings: target step size, Gumbel scale, sample count, seed.

    ``step_size`` of zero is allowed (it makes both solves identical and the
    estimate exactly zero), which is useful as a self-test.
    """

    step_size: float = 10.0
    noise_scale: float = 1.0
    samples: int = 1
    seed: int = 0

    def __post_init__(self):
        if self.step_size < 0:
            raise InvalidParameter(f"step_size must be >= 0, got {self.step_size}")
        if self.noise_scale <= 0:
            raise InvalidScale(f"noise_scale must be > 0, got {self.noise_scale}")
        if self.samples < 1:
            raise InvalidParameter(f"samples must be >= 1, got {self.samples}")

    def to_dict(self) -> dict:
        return {
            "lambda": self.step_size,
            "noise_scale": self.noise_scale,
            "samples": self.samples,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ImleConfig":
        return cls(
            step_size=float(data.get("lambda", 10.0)),
            noise_scale=float(data.get("noise_scale", 1.0)),
            samples=int(data.get("samples", 1)),
            seed=int(data.get("seed", 0)),
        )

    @classmethod
    def load(cls, path) -> "ImleConfig":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True))


def sample_gumbel(shape, scale: float = 1.0, seed=0) -> np.ndarray:
    """I.i.d. Gumbel(0, scale) samples via ``-scale * ln(-ln U)``.

    ``seed`` may be an integer or a ``numpy.random.Generator``; an integer
    gives a fresh deterministic stream.
    """
    if scale <= 0:
        raise InvalidScale(f"scale must be > 0, got {scale}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    u = rng.random(shape)
    u = np.clip(u, 1e-300, 1.0 - 1e-16)  # keep both logs finite
    return -scale * np.log(-np.log(u))


@dataclass(frozen=True)
class GradEstimate:
    """Estimated loss gradients w.r.t. the vertex matrix and edge tensor."""

    d_vertex: np.ndarray
    d_edge: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "d_vertex", readonly(np.asarray(self.d_vertex, dtype=float).copy()))
        object.__setattr__(self, "d_edge", readonly(np.asarray(self.d_edge, dtype=float).copy()))


def estimate_gradients(
    aff: AffinityPair,
    truth: Matching,
    cfg: ImleConfig,
    solver: str = "exact",
    heuristic_config: HeuristicConfig | None = None,
    workers: int | None = None,
) -> GradEstimate:
    """Coupled-difference gradient estimate, averaged over ``cfg.samples``.

    Each sample draws one noise pair (vertex matrix and edge tensor), solves
    the noisy instance, then re-solves the same instance with supervised
    entries made cheaper by ``cfg.step_size``; the difference of the two
    assignment matrices (and their induced edge tensors) is the per-sample
    gradient. Sample ``i`` uses the RNG stream ``cfg.seed ^ i`` so serial and
    parallel execution agree.
    """
    n = aff.vertex.shape[0]
    if aff.vertex.shape[0] != aff.vertex.shape[1]:
        raise InvalidParameter("gradient estimation requires a square instance")
    if truth.n != n:
        raise InvalidParameter(f"truth size {truth.n} != instance size {n}")
    v_star = truth.to_matrix()
    shift_v = cfg.step_size * (1.0 - 2.0 * v_star)
    shift_e = cfg.step_size * (1.0 - 2.0 * truth.edge_match_tensor())

    def one_sample(index: int) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(cfg.seed ^ index)
        noise_v = sample_gumbel(aff.vertex.shape, cfg.noise_scale, rng)
        noise_e = sample_gumbel(aff.edge.shape, cfg.noise_scale, rng)
        noisy_v = aff.vertex + noise_v
        noisy_e = aff.edge + noise_e
        tilde = solve(AffinityPair(noisy_v, noisy_e), solver, heuristic_config).matching
        target = solve(
            AffinityPair(noisy_v + shift_v, noisy_e + shift_e), solver, heuristic_config
        ).matching
        dv = target.to_matrix() - tilde.to_matrix()
        de = target.edge_match_tensor() - tilde.edge_match_tensor()
        return dv, de

    results = parallel_map(one_sample, range(cfg.samples), workers)
    d_vertex = np.mean([dv for dv, _ in results], axis=0)
    d_edge = np.mean([de for _, de in results], axis=0)
    return GradEstimate(d_vertex, d_edge)
