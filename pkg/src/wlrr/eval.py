"""Clustering accuracy, numerical rank, and the rank-vs-accuracy sweep."""

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .data import LabeledDataset
from .solvers import SolverConfig, solve_pssv_lrr
from .spectral import AffinityMode, ClusterLabels, cluster_from_representation

__all__ = [
    "SweepRecord",
    "clustering_accuracy",
    "representation_rank",
    "rank_accuracy_sweep",
    "write_sweep_csv",
]


@dataclass(frozen=True)
class SweepRecord:
    N: int
    z_rank: int
    accuracy_pct: float

    def __post_init__(self):
        if not 0.0 <= self.accuracy_pct <= 100.0:
            raise ValueError("accuracy_pct must lie in [0, 100]")
        if self.z_rank < 0 or self.N < 0:
            raise ValueError("N and z_rank must be non-negative")


def _as_label_array(labels) -> np.ndarray:
    if isinstance(labels, ClusterLabels):
        return labels.labels
    out = np.asarray(labels, dtype=int)
    if out.ndim != 1:
        raise ValueError("labels must be a 1-D integer vector")
    return out


def clustering_accuracy(pred, truth) -> float:
    """Best-permutation match percentage via optimal assignment.

    Builds the k x k confusion matrix (k = larger of the two distinct-label
    counts) and maximizes the matched count over one-to-one label maps.
    """
    pred = _as_label_array(pred)
    truth = _as_label_array(truth)
    if pred.shape != truth.shape:
        raise ValueError(
            f"label length mismatch: {pred.size} predicted vs {truth.size} true"
        )
    if pred.size == 0:
        raise ValueError("empty labelings")
    _, pi = np.unique(pred, return_inverse=True)
    _, ti = np.unique(truth, return_inverse=True)
    k = max(pi.max(), ti.max()) + 1
    confusion = np.zeros((k, k), dtype=int)
    np.add.at(confusion, (pi, ti), 1)
    rows, cols = linear_sum_assignment(-confusion)
    return float(100.0 * confusion[rows, cols].sum() / pred.size)


def representation_rank(Z: np.ndarray, rel_tol: float = 1e-4) -> int:
    """Count of singular values above ``rel_tol`` times the largest."""
    if not 0 < rel_tol < 1:
        raise ValueError("rel_tol must lie in (0, 1)")
    Z = np.asarray(Z, dtype=float)
    if not np.any(Z):
        return 0
    s = np.linalg.svd(Z, compute_uv=False)
    return int(np.sum(s > rel_tol * s[0]))


_WORKER_LIMIT = None


def _pin_worker_threads():
    # keep the controller alive for the worker's lifetime so the limit holds
    global _WORKER_LIMIT
    try:
        from threadpoolctl import threadpool_limits
    except ImportError:
        return
    _WORKER_LIMIT = threadpool_limits(limits=1)


def _sweep_one(args):
    X, truth, N, cfg, k, mode, power, rank_tol = args
    sol = solve_pssv_lrr(X, N=N, cfg=cfg)
    pred = cluster_from_representation(sol.Z, k, mode, power)
    return SweepRecord(
        N=N,
        z_rank=representation_rank(sol.Z, rank_tol),
        accuracy_pct=clustering_accuracy(pred, truth),
    )


def rank_accuracy_sweep(
    ds: LabeledDataset,
    N_values,
    cfg: SolverConfig | None = None,
    k: int | None = None,
    mode: AffinityMode = AffinityMode.SVD_BASED,
    power: int = 4,
    rank_tol: float = 1e-4,
    jobs: int = 1,
    pin_threads: bool = False,
) -> list[SweepRecord]:
    """Run the rank-controlled solver for each N and score the clustering.

    Records come back in input order regardless of completion order; with
    ``jobs > 1`` the N values run in separate processes.  ``pin_threads``
    restricts each worker's linear algebra to one thread so parallel runs
    reproduce serial single-threaded results bit for bit.
    """
    if ds.labels is None:
        raise ValueError("sweep requires ground-truth labels")
    N_values = [int(N) for N in N_values]
    if k is None:
        k = int(np.unique(ds.labels).size)
    tasks = [
        (ds.X, ds.labels, N, cfg, k, mode, power, rank_tol) for N in N_values
    ]
    if jobs > 1 and len(tasks) > 1:
        init = _pin_worker_threads if pin_threads else None
        with ProcessPoolExecutor(max_workers=jobs, initializer=init) as pool:
            return list(pool.map(_sweep_one, tasks))
    return [_sweep_one(t) for t in tasks]


def write_sweep_csv(path, records) -> None:
    """``N,rank,accuracy_pct`` rows, UTF-8, LF line endings."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write("N,rank,accuracy_pct\n")
        for r in records:
            f.write(f"{r.N},{r.z_rank},{r.accuracy_pct}\n")
