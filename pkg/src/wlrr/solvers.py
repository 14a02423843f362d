"""Solvers for the low-rank self-representation family.

All four entry points minimize

    ``||Z||_(w,*) + lam * ||E||_2,1   s.t.   X = X Z + E``

over the representation matrix ``Z`` (n x n) and the column-structured
error ``E`` (m x n), differing only in the spectral penalty: weighted
nuclear norm (non-ascending weights), plain nuclear norm (all-ones
weights), or the tail sum of singular values past a protected rank.

Two iteration schemes are provided: a splitting scheme with an auxiliary
variable ``J = Z`` and a per-iteration exact Z solve, and a linearized
scheme that removes the auxiliary variable by linearizing the quadratic
coupling term at the current iterate.  Both are deterministic: identical
inputs and configuration produce identical iterates.
"""

import math
from dataclasses import dataclass, field, replace
from enum import Enum

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .prox import (
    WeightVector,
    compute_weights,
    l21_prox,
    partial_svt,
    weighted_svt,
)

__all__ = [
    "SolverVariant",
    "SolverConfig",
    "SolverSolution",
    "LrrProblem",
    "NumericalError",
    "default_lambda",
    "resolve_config",
    "solve_wnnm_lrr_admm",
    "solve_wnnm_lrr_ladmm",
    "solve_lrr",
    "solve_pssv_lrr",
    "objective_value",
]


class NumericalError(RuntimeError):
    """An iterate became non-finite; names the offending iteration."""


class SolverVariant(Enum):
    WNNM_ADMM = "wnnm-admm"
    WNNM_LADMM = "wnnm-ladmm"
    NNM_LRR = "nnm"
    PSSV_LRR = "pssv"


@dataclass(frozen=True)
class SolverConfig:
    """Solver parameters.  ``None`` fields are resolved from the data.

    lam
        Error-term weight; default ``1/sqrt(log n)`` with n the number of
        data columns.
    gamma
        Weight-schedule exponent (weights are ``sigma_i(X)**gamma``);
        0 recovers the plain nuclear norm.
    mu0, mu_max, rho
        Penalty schedule ``mu_{k+1} = min(rho * mu_k, mu_max)``.  Defaults
        by scheme: mu0 = 1e-6 and rho = 1.1 for the splitting scheme,
        mu0 = min(1e-2, 1/sigma_max(X)) and rho = 1.9 for the linearized
        one (which grows mu only when iterates have nearly stalled).
    eps
        Splitting-scheme stopping tolerance on both max-norm residuals.
    eps1, eps2
        Linearized-scheme tolerances: relative Frobenius feasibility and
        relative step size.
    eta
        Linearization constant; must exceed sigma_max(X)**2.  Default
        ``1.02 * sigma_max(X)**2``.
    """

    lam: float | None = None
    gamma: float = 1.0 / 3.0
    mu0: float | None = None
    mu_max: float = 1e6
    rho: float | None = None
    eps: float = 1e-8
    eps1: float = 1e-6
    eps2: float = 1e-5
    eta: float | None = None
    max_iters: int = 1000
    variant: SolverVariant | None = None

    def __post_init__(self):
        if self.mu0 is not None and not 0 < self.mu0 <= self.mu_max:
            raise ValueError("need mu_max >= mu0 > 0")
        if self.rho is not None and self.rho <= 1:
            raise ValueError("rho must exceed 1")
        for name in ("eps", "eps1", "eps2"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.lam is not None and self.lam <= 0:
            raise ValueError("lam must be positive")
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")


@dataclass
class SolverSolution:
    Z: np.ndarray
    E: np.ndarray
    iterations: int
    primal_residual_history: np.ndarray
    converged: bool


@dataclass(frozen=True)
class LrrProblem:
    """Data matrix plus the per-singular-value penalty weights for Z."""

    X: np.ndarray
    w: WeightVector

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2:
            raise ValueError("X must be a 2-D matrix")
        if not np.all(np.isfinite(X)):
            raise ValueError("X contains non-finite entries")
        if len(self.w) != X.shape[1]:
            raise ValueError(
                f"weight vector length {len(self.w)} != sample count {X.shape[1]}"
            )
        object.__setattr__(self, "X", X)

    @classmethod
    def from_data(cls, X: np.ndarray, gamma: float = 1.0 / 3.0) -> "LrrProblem":
        """Build the problem with weights computed once from ``X``."""
        X = np.asarray(X, dtype=float)
        return cls(X, compute_weights(X, gamma, X.shape[1]))


def default_lambda(n: int) -> float:
    """Error weight ``1/sqrt(log n)`` for an n-column data matrix."""
    if n < 1:
        raise ValueError("need at least one data column")
    return 1.0 / math.sqrt(math.log(n)) if n >= 2 else 1.0


def resolve_config(
    cfg: SolverConfig | None, X: np.ndarray, variant: SolverVariant
) -> SolverConfig:
    """Materialize every ``None`` field of ``cfg`` for the given data.

    Rejects a config explicitly tagged for a different solver variant.
    """
    if cfg is None:
        cfg = SolverConfig()
    if cfg.variant is not None and cfg.variant != variant:
        raise ValueError(
            f"config is tagged for variant {cfg.variant.value!r}, "
            f"not {variant.value!r}"
        )
    n = X.shape[1]
    lam = cfg.lam if cfg.lam is not None else default_lambda(n)
    linearized = variant == SolverVariant.WNNM_LADMM
    rho = cfg.rho if cfg.rho is not None else (1.9 if linearized else 1.1)
    if linearized:
        smax = np.linalg.norm(X, 2) if np.any(X) else 0.0
        mu0 = cfg.mu0
        if mu0 is None:
            mu0 = min(1e-2, 1.0 / smax) if smax > 0 else 1e-2
        eta = cfg.eta
        if eta is None:
            eta = 1.02 * smax**2 if smax > 0 else 1.0
        elif eta <= smax**2:
            raise ValueError(
                f"eta = {eta} must exceed sigma_max(X)^2 = {smax**2}"
            )
    else:
        mu0 = cfg.mu0 if cfg.mu0 is not None else 1e-6
        eta = cfg.eta
    return replace(cfg, lam=lam, mu0=mu0, rho=rho, eta=eta, variant=variant)


def objective_value(Z, E, w, lam) -> float:
    """``||Z||_(w,*) + lam * ||E||_2,1`` for a candidate pair."""
    if not isinstance(w, WeightVector):
        w = WeightVector(np.asarray(w, dtype=float))
    s = np.linalg.svd(np.asarray(Z, dtype=float), compute_uv=False)
    l21 = float(np.sum(np.linalg.norm(np.asarray(E, dtype=float), axis=0)))
    return float(np.dot(w.weights[: s.size], s)) + lam * l21


def _check_finite(k, **mats):
    for name, M in mats.items():
        if not np.all(np.isfinite(M)):
            raise NumericalError(f"{name} became non-finite at iteration {k}")


def _zero_solution(X):
    m, n = X.shape
    return SolverSolution(
        Z=np.zeros((n, n)),
        E=np.zeros((m, n)),
        iterations=0,
        primal_residual_history=np.zeros(0),
        converged=True,
    )


def _iterate_split(X, lam, j_update, cfg: SolverConfig) -> SolverSolution:
    """Splitting scheme with auxiliary J = Z and exact Z solves.

    Per iteration: spectral shrink on J, a linear solve for Z against the
    constant SPD matrix I + X'X (factored once), column shrinkage for E,
    gradient-ascent multiplier updates, geometric mu growth.  Stops when
    both max-norm residuals drop below ``cfg.eps``.
    """
    m, n = X.shape
    Xt = X.T
    factor = cho_factor(np.eye(n) + Xt @ X)
    Z = np.zeros((n, n))
    E = np.zeros((m, n))
    Y1 = np.zeros((m, n))
    Y2 = np.zeros((n, n))
    mu = cfg.mu0
    history = []
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        J = j_update(Z + Y2 / mu, mu)
        Z = cho_solve(factor, Xt @ (X - E) + J + (Xt @ Y1 - Y2) / mu)
        E = l21_prox(X - X @ Z + Y1 / mu, lam / mu)
        R1 = X - X @ Z - E
        R2 = Z - J
        Y1 += mu * R1
        Y2 += mu * R2
        mu = min(cfg.rho * mu, cfg.mu_max)
        r1 = float(np.max(np.abs(R1)))
        r2 = float(np.max(np.abs(R2)))
        history.append(r1)
        _check_finite(k, Z=Z, E=E, Y1=Y1, Y2=Y2)
        if r1 < cfg.eps and r2 < cfg.eps:
            converged = True
            break
    return SolverSolution(Z, E, k, np.asarray(history), converged)


def _iterate_linearized(X, lam, w, cfg: SolverConfig) -> SolverSolution:
    """Linearized scheme: no auxiliary variable, one spectral shrink per step.

    The quadratic coupling term is linearized at Z_k, so the Z-update is a
    single weighted shrink at the gradient point
    ``Z_k + X'(Y + mu (X - X Z_k - E_{k+1})) / (mu eta)``.
    The penalty mu grows by ``cfg.rho`` only in iterations where
    ``mu * max(dZ, dE) / ||X||_F`` has fallen below ``eps2``; stopping
    requires relative feasibility < ``eps1`` and relative step < ``eps2``.
    """
    m, n = X.shape
    Xt = X.T
    x_fro = np.linalg.norm(X)
    Z = np.zeros((n, n))
    E = np.zeros((m, n))
    Y = np.zeros((m, n))
    mu = cfg.mu0
    history = []
    converged = False
    k = 0
    for k in range(1, cfg.max_iters + 1):
        XZ = X @ Z
        E_new = l21_prox(X - XZ + Y / mu, lam / mu)
        mu_eta = mu * cfg.eta
        G = Xt @ (Y + mu * (X - XZ - E_new))
        Z_new = weighted_svt(Z + G / mu_eta, w, mu_eta)
        R = X - X @ Z_new - E_new
        Y += mu * R
        step = max(
            np.linalg.norm(Z_new - Z), np.linalg.norm(E_new - E)
        ) / x_fro
        feas = np.linalg.norm(R) / x_fro
        grow = mu * step < cfg.eps2
        mu = min((cfg.rho if grow else 1.0) * mu, cfg.mu_max)
        Z, E = Z_new, E_new
        history.append(float(feas))
        _check_finite(k, Z=Z, E=E, Y=Y)
        if feas < cfg.eps1 and step < cfg.eps2:
            converged = True
            break
    return SolverSolution(Z, E, k, np.asarray(history), converged)


def solve_wnnm_lrr_admm(
    problem: LrrProblem, cfg: SolverConfig | None = None
) -> SolverSolution:
    """Weighted-penalty solve via the splitting scheme."""
    cfg = resolve_config(cfg, problem.X, SolverVariant.WNNM_ADMM)
    if not np.any(problem.X):
        return _zero_solution(problem.X)
    w = problem.w
    return _iterate_split(
        problem.X, cfg.lam, lambda M, mu: weighted_svt(M, w, mu), cfg
    )


def solve_wnnm_lrr_ladmm(
    problem: LrrProblem, cfg: SolverConfig | None = None
) -> SolverSolution:
    """Weighted-penalty solve via the linearized scheme."""
    cfg = resolve_config(cfg, problem.X, SolverVariant.WNNM_LADMM)
    if not np.any(problem.X):
        return _zero_solution(problem.X)
    return _iterate_linearized(problem.X, cfg.lam, problem.w, cfg)


def solve_lrr(
    X: np.ndarray, lam: float | None = None, cfg: SolverConfig | None = None
) -> SolverSolution:
    """Plain nuclear-norm baseline: the weighted solver with all-ones weights."""
    X = np.asarray(X, dtype=float)
    if cfg is not None and cfg.variant not in (None, SolverVariant.NNM_LRR):
        raise ValueError(f"config is tagged for variant {cfg.variant.value!r}")
    cfg = SolverConfig() if cfg is None else cfg
    cfg = replace(cfg, lam=lam if lam is not None else cfg.lam, gamma=0.0, variant=None)
    cfg = resolve_config(cfg, X, SolverVariant.NNM_LRR)
    problem = LrrProblem.from_data(X, gamma=0.0)
    if not np.any(X):
        return _zero_solution(X)
    w = problem.w
    return _iterate_split(X, cfg.lam, lambda M, mu: weighted_svt(M, w, mu), cfg)


def solve_pssv_lrr(
    X: np.ndarray,
    lam: float | None = None,
    N: int = 0,
    cfg: SolverConfig | None = None,
) -> SolverSolution:
    """Rank-controlled variant: the top ``N`` singular values of the shrink
    target pass through unpenalized, forcing rank(Z) >= N at the solution.

    Non-convex for N > 0; used as an instrument for rank/accuracy sweeps,
    with no optimality claim.  ``N = 0`` coincides with the plain baseline.
    """
    X = np.asarray(X, dtype=float)
    if not 0 <= N <= X.shape[1]:
        raise ValueError(f"protected rank {N} out of range for {X.shape[1]} samples")
    if not np.all(np.isfinite(X)):
        raise ValueError("X contains non-finite entries")
    if cfg is not None and cfg.variant not in (None, SolverVariant.PSSV_LRR):
        raise ValueError(f"config is tagged for variant {cfg.variant.value!r}")
    cfg = SolverConfig() if cfg is None else cfg
    cfg = replace(cfg, lam=lam if lam is not None else cfg.lam, variant=None)
    cfg = resolve_config(cfg, X, SolverVariant.PSSV_LRR)
    if not np.any(X):
        return _zero_solution(X)
    return _iterate_split(
        X, cfg.lam, lambda M, mu: partial_svt(M, N, 1.0 / mu), cfg
    )
