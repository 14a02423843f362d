import numpy as np
import pytest

from oracles import accuracy_bruteforce
from wlrr.data import SubspaceGenSpec, generate_union_of_subspaces
from wlrr.eval import (
    SweepRecord,
    clustering_accuracy,
    rank_accuracy_sweep,
    representation_rank,
    write_sweep_csv,
)
from wlrr.solvers import SolverConfig, solve_lrr
from wlrr.spectral import cluster_from_representation


def test_accuracy_permutation_invariance_example():
    assert clustering_accuracy([0, 0, 1, 1], [1, 1, 0, 0]) == 100.0


def test_accuracy_partial_match_example():
    assert clustering_accuracy([0, 1, 1, 1], [0, 0, 1, 1]) == 75.0


def test_accuracy_matches_bruteforce():
    rng = np.random.default_rng(0)
    for _ in range(100):
        k = rng.integers(2, 5)
        n = rng.integers(2, 11)
        pred = rng.integers(0, k, n)
        truth = rng.integers(0, k, n)
        assert clustering_accuracy(pred, truth) == accuracy_bruteforce(pred, truth)


def test_accuracy_relabeling_invariance():
    rng = np.random.default_rng(1)
    pred = rng.integers(0, 3, 20)
    truth = rng.integers(0, 3, 20)
    base = clustering_accuracy(pred, truth)
    perm = np.array([2, 0, 1])
    assert clustering_accuracy(perm[pred], truth) == base
    assert clustering_accuracy(pred, perm[truth]) == base


def test_accuracy_self_is_perfect():
    rng = np.random.default_rng(2)
    x = rng.integers(0, 4, 15)
    assert clustering_accuracy(x, x) == 100.0


def test_accuracy_length_mismatch():
    with pytest.raises(ValueError):
        clustering_accuracy([0, 1], [0, 1, 1])


def test_representation_rank_examples():
    assert representation_rank(np.zeros((4, 4))) == 0
    assert representation_rank(np.diag([1.0, 1e-2, 1e-9]), 1e-4) == 2
    rng = np.random.default_rng(3)
    Z = rng.standard_normal((8, 3)) @ rng.standard_normal((3, 8))
    assert representation_rank(Z) == 3


def test_representation_rank_scale_invariant():
    rng = np.random.default_rng(4)
    Z = rng.standard_normal((6, 6))
    assert representation_rank(Z) == representation_rank(123.456 * Z)


def test_representation_rank_tol_validation():
    with pytest.raises(ValueError):
        representation_rank(np.eye(2), rel_tol=0.0)
    with pytest.raises(ValueError):
        representation_rank(np.eye(2), rel_tol=1.0)


def test_sweep_record_validation():
    with pytest.raises(ValueError):
        SweepRecord(N=0, z_rank=1, accuracy_pct=101.0)
    with pytest.raises(ValueError):
        SweepRecord(N=-1, z_rank=1, accuracy_pct=50.0)


def make_ds(seed=0, sigma=0.0):
    return generate_union_of_subspaces(
        SubspaceGenSpec(
            ambient_dim=30,
            num_subspaces=3,
            subspace_dim=3,
            points_per_subspace=12,
            noise_sigma=sigma,
            seed=seed,
        )
    )


def test_sweep_n0_matches_plain_pipeline():
    ds = make_ds()
    recs = rank_accuracy_sweep(ds, [0])
    assert len(recs) == 1 and recs[0].N == 0
    sol = solve_lrr(ds.X)
    pred = cluster_from_representation(sol.Z, 3)
    want = clustering_accuracy(pred, ds.labels)
    assert recs[0].accuracy_pct == want
    assert recs[0].z_rank == representation_rank(sol.Z)


def test_sweep_input_order_and_determinism():
    ds = make_ds(seed=1, sigma=0.02)
    ns = [8, 0, 4]
    a = rank_accuracy_sweep(ds, ns)
    b = rank_accuracy_sweep(ds, ns)
    assert [r.N for r in a] == ns
    assert a == b


def test_sweep_ideal_case_is_perfect():
    ds = make_ds(seed=2)
    recs = rank_accuracy_sweep(ds, [0, 9])
    assert recs[0].accuracy_pct == 100.0


def test_sweep_parallel_matches_serial():
    ds = make_ds(seed=3, sigma=0.02)
    ns = [0, 6]
    assert rank_accuracy_sweep(ds, ns, jobs=2) == rank_accuracy_sweep(ds, ns)


def test_sweep_requires_labels():
    ds = make_ds()
    ds.labels = None
    with pytest.raises(ValueError):
        rank_accuracy_sweep(ds, [0])


def test_sweep_csv_format(tmp_path):
    path = tmp_path / "sweep.csv"
    write_sweep_csv(
        path,
        [SweepRecord(0, 9, 100.0), SweepRecord(10, 12, 87.5)],
    )
    raw = path.read_bytes()
    assert b"\r" not in raw
    lines = raw.decode("utf-8").splitlines()
    assert lines[0] == "N,rank,accuracy_pct"
    assert lines[1] == "0,9,100.0"
    assert lines[2] == "10,12,87.5"
