"""Scalar and spectral proximal operators used by the low-rank solvers.

Every operator here is a pure function of its inputs.  The spectral
operators (``svt``, ``weighted_svt``, ``partial_svt``, ``truncated_svd``)
share one SVD helper and one reconstruction helper so that reductions
between them (constant weights, zero protected rank) are exact, not just
close.
"""

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SingularTriplet",
    "WeightVector",
    "soft_threshold",
    "truncated_svd",
    "svt",
    "weighted_svt",
    "partial_svt",
    "l21_prox",
    "compute_weights",
]

# Singular values below RANK_EPS * sigma_1 are treated as zero when
# forming penalty weights.
RANK_EPS = 1e-12


@dataclass(frozen=True)
class SingularTriplet:
    """Thin SVD of a matrix: ``left @ diag(values) @ right_t``.

    ``values`` is non-negative and sorted non-increasing; ``left`` and the
    transpose of ``right_t`` have orthonormal columns.
    """

    left: np.ndarray
    values: np.ndarray
    right_t: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return _rebuild(self.left, self.values, self.right_t)


@dataclass(frozen=True)
class WeightVector:
    """Non-negative, non-ascending per-singular-value penalty weights.

    The non-ascending arrangement is what keeps the weighted-norm
    proximal problem convex; construction rejects anything else.
    """

    weights: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if w.ndim != 1:
            raise ValueError("weights must be a 1-D vector")
        if not np.all(np.isfinite(w)):
            raise ValueError("weights must be finite")
        if np.any(w < 0):
            raise ValueError("weights must be non-negative")
        if np.any(np.diff(w) > 0):
            raise ValueError(
                "weights must be non-ascending (ascending weights make the "
                "shrinkage problem non-convex and are unsupported)"
            )
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return self.weights.size


def decompose(D: np.ndarray) -> SingularTriplet:
    """Thin SVD of ``D`` as a :class:`SingularTriplet`."""
    U, s, Vt = np.linalg.svd(np.asarray(D, dtype=float), full_matrices=False)
    return SingularTriplet(U, s, Vt)


def _rebuild(U, s, Vt):
    return (U * s) @ Vt


def soft_threshold(x, eps):
    """Shrink ``x`` toward zero by ``eps``, with a dead zone at ``[-eps, eps]``.

    Works elementwise on arrays.
    """
    if np.any(np.asarray(eps) < 0):
        raise ValueError("threshold must be non-negative")
    return np.sign(x) * np.maximum(np.abs(x) - eps, 0.0)


def truncated_svd(D: np.ndarray, r: int) -> np.ndarray:
    """Best rank-``r`` approximation of ``D`` in Frobenius norm.

    Keeps the top ``r`` singular triplets and zeroes the rest.
    """
    D = np.asarray(D, dtype=float)
    if not 0 <= r <= min(D.shape):
        raise ValueError(f"rank {r} out of range for {D.shape} matrix")
    t = decompose(D)
    s = t.values.copy()
    s[r:] = 0.0
    return _rebuild(t.left, s, t.right_t)


def svt(Y: np.ndarray, tau: float) -> np.ndarray:
    """Singular value thresholding: the nuclear-norm proximal operator.

    Returns the minimizer of ``||A||_* + 1/(2*tau) ||Y - A||_F^2``, i.e.
    ``Y``'s SVD with every singular value soft-thresholded by ``tau``.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    t = decompose(Y)
    return _rebuild(t.left, np.maximum(t.values - tau, 0.0), t.right_t)


def _pav_non_increasing(v: np.ndarray) -> np.ndarray:
    """Project ``v`` onto the cone of non-increasing sequences.

    Pool-adjacent-violators: scan left to right, merging a block with its
    predecessor whenever its mean rises above the predecessor's mean.
    Entries of an already non-increasing ``v`` pass through untouched.
    """
    n = v.size
    # (sum, count) per block; means must end up non-increasing
    sums = np.empty(n)
    counts = np.empty(n, dtype=np.intp)
    top = 0
    for x in v:
        sums[top] = x
        counts[top] = 1
        top += 1
        while top > 1 and sums[top - 2] * counts[top - 1] < sums[top - 1] * counts[top - 2]:
            sums[top - 2] += sums[top - 1]
            counts[top - 2] += counts[top - 1]
            top -= 1
    out = np.empty(n)
    pos = 0
    for b in range(top):
        c = counts[b]
        if c == 1:
            out[pos] = sums[b]  # singleton blocks keep their value exactly
        else:
            out[pos : pos + c] = sums[b] / c
        pos += c
    return out


def weighted_svt(Y: np.ndarray, w, mu: float) -> np.ndarray:
    """Proximal operator of the weighted nuclear norm, non-ascending weights.

    Returns the global minimizer of

        ``||X||_{w,*} + (mu/2) ||Y - X||_F^2``

    The minimizer keeps ``Y``'s singular vectors; its singular values solve
    the chain-constrained quadratic over d_1 >= d_2 >= ... >= d_r >= 0.
    The per-index shrink ``sigma_i - w_i/mu`` solves it when the result is
    already sorted; otherwise the exact solution pools adjacent violators
    and then clips at zero.
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    if not isinstance(w, WeightVector):
        w = WeightVector(np.asarray(w, dtype=float))
    t = decompose(Y)
    r = t.values.size
    if len(w) < r:
        raise ValueError(f"need at least {r} weights, got {len(w)}")
    shrunk = t.values - w.weights[:r] / mu
    if np.any(np.diff(shrunk) > 0):
        shrunk = _pav_non_increasing(shrunk)
    return _rebuild(t.left, np.maximum(shrunk, 0.0), t.right_t)


def partial_svt(Y: np.ndarray, N: int, tau: float) -> np.ndarray:
    """Shrinkage that protects the top ``N`` singular values.

    Proximal step of the tail sum of singular values: values at index < N
    pass through unchanged, the rest are soft-thresholded by ``tau``.
    With ``N = 0`` this is plain ``svt``; with ``N = min(m, n)`` it is the
    identity (up to SVD round-trip error).
    """
    Y = np.asarray(Y, dtype=float)
    if not 0 <= N <= min(Y.shape):
        raise ValueError(f"protected rank {N} out of range for {Y.shape} matrix")
    if tau < 0:
        raise ValueError("tau must be non-negative")
    t = decompose(Y)
    s = t.values.copy()
    s[N:] = np.maximum(s[N:] - tau, 0.0)
    return _rebuild(t.left, s, t.right_t)


def l21_prox(Q: np.ndarray, tau: float) -> np.ndarray:
    """Column-wise group shrinkage: prox of ``tau * sum_i ||q_i||_2``.

    Each column is scaled by ``max(0, 1 - tau/||q_i||)``; columns with norm
    at most ``tau`` become zero.
    """
    if tau < 0:
        raise ValueError("tau must be non-negative")
    Q = np.asarray(Q, dtype=float)
    norms = np.linalg.norm(Q, axis=0)
    scale = np.zeros_like(norms)
    nz = norms > tau
    scale[nz] = 1.0 - tau / norms[nz]
    return Q * scale


def compute_weights(X: np.ndarray, gamma: float, length: int) -> WeightVector:
    """Penalty weights ``w_i = sigma_i(X)**gamma``, padded to ``length``.

    Singular values of ``X`` below ``RANK_EPS * sigma_1`` count as zero.
    Beyond ``min(m, n)`` there is no singular value, so the weight is
    ``0**gamma`` as well.  ``0**0`` is taken as 1, which makes ``gamma = 0``
    produce the all-ones vector and recover the plain nuclear norm.
    """
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    X = np.asarray(X, dtype=float)
    r = min(X.shape)
    if length < r:
        raise ValueError(f"length {length} shorter than min(m, n) = {r}")
    sigma = np.zeros(length)
    if r > 0:
        s = np.linalg.svd(X, compute_uv=False)
        s[s < RANK_EPS * s[0]] = 0.0
        sigma[:r] = s
    if gamma == 0:
        w = np.ones(length)
    else:
        w = sigma**gamma
    return WeightVector(w)
