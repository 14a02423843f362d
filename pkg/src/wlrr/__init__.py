"""Subspace clustering via low-rank self-representation.

The pipeline: solve for a representation Z with one of the solvers in
:mod:`wlrr.solvers`, turn Z into a symmetric affinity, spectrally embed,
run deterministic k-means, and score against ground truth.  Synthetic
union-of-subspaces data and a few on-disk formats live in
:mod:`wlrr.data`; the ``wlrr`` command line wires the stages together.
"""

from .prox import (
    SingularTriplet,
    WeightVector,
    compute_weights,
    l21_prox,
    partial_svt,
    soft_threshold,
    svt,
    truncated_svd,
    weighted_svt,
)
from .solvers import (
    LrrProblem,
    NumericalError,
    SolverConfig,
    SolverSolution,
    SolverVariant,
    default_lambda,
    solve_lrr,
    solve_pssv_lrr,
    solve_wnnm_lrr_admm,
    solve_wnnm_lrr_ladmm,
)
from .spectral import (
    AffinityMode,
    ClusterLabels,
    affinity_from_representation,
    cluster_from_representation,
    kmeans_deterministic,
    normalized_laplacian,
    spectral_embed,
)
from .eval import (
    SweepRecord,
    clustering_accuracy,
    rank_accuracy_sweep,
    representation_rank,
    write_sweep_csv,
)
from .data import (
    DataFormatError,
    LabeledDataset,
    SubspaceGenSpec,
    generate_union_of_subspaces,
    load_csv_matrix,
    load_idx,
    read_native,
    save_csv_matrix,
    subsample_per_class,
    write_native,
)

__version__ = "0.1.0"

__all__ = [
    "SingularTriplet",
    "WeightVector",
    "compute_weights",
    "l21_prox",
    "partial_svt",
    "soft_threshold",
    "svt",
    "truncated_svd",
    "weighted_svt",
    "LrrProblem",
    "NumericalError",
    "SolverConfig",
    "SolverSolution",
    "SolverVariant",
    "default_lambda",
    "solve_lrr",
    "solve_pssv_lrr",
    "solve_wnnm_lrr_admm",
    "solve_wnnm_lrr_ladmm",
    "AffinityMode",
    "ClusterLabels",
    "affinity_from_representation",
    "cluster_from_representation",
    "kmeans_deterministic",
    "normalized_laplacian",
    "spectral_embed",
    "SweepRecord",
    "clustering_accuracy",
    "rank_accuracy_sweep",
    "representation_rank",
    "write_sweep_csv",
    "DataFormatError",
    "LabeledDataset",
    "SubspaceGenSpec",
    "generate_union_of_subspaces",
    "load_csv_matrix",
    "load_idx",
    "read_native",
    "save_csv_matrix",
    "subsample_per_class",
    "write_native",
    "__version__",
]
