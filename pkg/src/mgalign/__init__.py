"""Multi-graph alignment: solvers, barycenter alignment, IMLE gradients,
graph metrics and geodesics, plus a synthetic training demo."""

from ._version import __version__
from .errors import (
    DegenerateVector,
    EmptyInput,
    FormatError,
    GenerationError,
    InvalidK,
    InvalidParameter,
    InvalidScale,
    MgalignError,
    ShapeError,
    SizeMismatch,
    TooLarge,
    TrainingDiverged,
)
from .graphs import (
    DEFAULT_K,
    AffinityPair,
    StructuredGraph,
    affinity_pair,
    build_knn_graph,
    edge_affinity,
    knn_edges,
    pairwise_distances,
    pool_embeddings,
    shortest_path_matrix,
    vertex_affinity,
)
from .solvers import (
    EXACT_LIMIT,
    HeuristicConfig,
    Matching,
    SolveReport,
    objective_value,
    solve,
    solve_exact,
    solve_heuristic,
)
from .barycenter import (
    MODALITIES,
    MultiMatching,
    MultiSolveReport,
    TripletBatch,
    build_barycenter,
    ground_truth,
    hamming_loss,
    matching_hamming,
    modality_graphs,
    solve_multi,
    solve_pairwise,
)
from .imle import GradEstimate, ImleConfig, estimate_gradients, sample_gumbel
from .metric import (
    GeodesicPoint,
    MetricReport,
    d_sga,
    geodesic_interpolate,
    isomorphism_witness,
    verify_constant_speed,
    verify_metric_axioms,
)
from .propagation import PropagationConfig, propagate, propagation_operator
from .synthetic import SyntheticSpec, TripletDataset, generate_synthetic_triplets, separable_batch
from .training import (
    DecoderSet,
    EncoderSet,
    TrainConfig,
    TrainResult,
    adversarial_init,
    evaluate_matching,
    train,
    vertex_affinity_parameter_grads,
)
from .estimators import AlignmentTrainer, FeatureSmoother, KnnGraphBuilder, TripletAligner

__all__ = [
    "__version__",
    "MgalignError",
    "EmptyInput",
    "ShapeError",
    "InvalidK",
    "DegenerateVector",
    "TooLarge",
    "SizeMismatch",
    "InvalidScale",
    "InvalidParameter",
    "GenerationError",
    "TrainingDiverged",
    "FormatError",
    "DEFAULT_K",
    "EXACT_LIMIT",
    "StructuredGraph",
    "AffinityPair",
    "pool_embeddings",
    "pairwise_distances",
    "build_knn_graph",
    "knn_edges",
    "shortest_path_matrix",
    "vertex_affinity",
    "edge_affinity",
    "affinity_pair",
    "Matching",
    "SolveReport",
    "HeuristicConfig",
    "objective_value",
    "solve",
    "solve_exact",
    "solve_heuristic",
    "MODALITIES",
    "TripletBatch",
    "MultiMatching",
    "MultiSolveReport",
    "build_barycenter",
    "modality_graphs",
    "ground_truth",
    "hamming_loss",
    "matching_hamming",
    "solve_multi",
    "solve_pairwise",
    "ImleConfig",
    "GradEstimate",
    "sample_gumbel",
    "estimate_gradients",
    "MetricReport",
    "GeodesicPoint",
    "d_sga",
    "isomorphism_witness",
    "verify_metric_axioms",
    "geodesic_interpolate",
    "verify_constant_speed",
    "PropagationConfig",
    "propagate",
    "propagation_operator",
    "SyntheticSpec",
    "TripletDataset",
    "generate_synthetic_triplets",
    "separable_batch",
    "EncoderSet",
    "DecoderSet",
    "TrainConfig",
    "TrainResult",
    "train",
    "evaluate_matching",
    "adversarial_init",
    "vertex_affinity_parameter_grads",
    "KnnGraphBuilder",
    "FeatureSmoother",
    "TripletAligner",
    "AlignmentTrainer",
]
