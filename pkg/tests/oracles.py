"""Independent reference implementations used only by tests.

Nothing here shares code with the package: the brute-force routines solve
the same problems by enumeration or exhaustive search so the production
fast paths have something honest to be checked against.
"""

import itertools

import numpy as np


def weighted_shrink_objective(Y, X, w, mu):
    """``sum_i w_i sigma_i(X) + (mu/2) ||Y - X||_F^2`` with sigma sorted."""
    s = np.linalg.svd(X, compute_uv=False)
    return float(np.dot(w[: s.size], s) + 0.5 * mu * np.linalg.norm(Y - X) ** 2)


def chain_qp_bruteforce(sigma, w, mu):
    """Exact minimizer of sum w_i d_i + (mu/2) sum (d_i - sigma_i)^2
    over d_1 >= d_2 >= ... >= d_r >= 0, by candidate enumeration.

    Any KKT point is constant on contiguous blocks, each block at the mean
    of (sigma_i - w_i/mu) over the block, followed by a suffix pinned at 0.
    Enumerating every (block partition, suffix length) pair and keeping the
    feasible candidate of least objective therefore finds the optimum.
    Exponential in r; fine for the r <= 5 sizes the tests use.
    """
    sigma = np.asarray(sigma, dtype=float)
    w = np.asarray(w, dtype=float)
    r = sigma.size
    targets = sigma - w / mu

    def objective(d):
        return float(np.dot(w, d) + 0.5 * mu * np.sum((d - sigma) ** 2))

    best_val = objective(np.zeros(r))
    best = np.zeros(r)
    for z in range(1, r + 1):
        # cut positions between consecutive indices of the free prefix 0..z-1
        for cuts in itertools.product([False, True], repeat=z - 1):
            bounds = [0] + [i + 1 for i, c in enumerate(cuts) if c] + [z]
            d = np.zeros(r)
            ok = True
            prev = np.inf
            for a, b in zip(bounds[:-1], bounds[1:]):
                t = float(np.mean(targets[a:b]))
                if t < -1e-12 or t > prev + 1e-12:
                    ok = False
                    break
                d[a:b] = t
                prev = t
            if not ok or (z < r and d[z - 1] < -1e-12):
                continue
            d = np.maximum(d, 0.0)
            val = objective(d)
            if val < best_val:
                best_val = val
                best = d
    return best, best_val


def random_feasible_spectra(d_star, count, rng):
    """Random non-increasing non-negative vectors near ``d_star``."""
    r = d_star.size
    scales = 10.0 ** rng.uniform(-4, 0, size=(count, 1))
    pert = d_star[None, :] + scales * rng.standard_normal((count, r))
    pert = np.maximum(pert, 0.0)
    return -np.sort(-pert, axis=1)


def accuracy_bruteforce(pred, truth):
    """Best-permutation accuracy by exhaustive search over label maps."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    pred_ids = np.unique(pred)
    truth_ids = np.unique(truth)
    k = max(pred_ids.size, truth_ids.size)
    best = 0
    # pad the shorter side with dummy ids so the permutation is total
    pl = list(pred_ids) + [f"p{i}" for i in range(k - pred_ids.size)]
    tl = list(truth_ids) + [f"t{i}" for i in range(k - truth_ids.size)]
    for perm in itertools.permutations(range(k)):
        hits = 0
        for p, t in zip(pred, truth):
            if tl[perm[pl.index(p)]] == t:
                hits += 1
        best = max(best, hits)
    return 100.0 * best / pred.size
