"""Randomized hyperplane rounding from factors or dense relaxations.

A solution factor F feeds a scan over leading-column counts k: for each
k and each trial, draw a Gaussian direction in R^k, take signs of
F[:, :k] @ z, and keep the labels with the lowest quadratic objective.
Each (k, trial) pair derives its own generator from (seed, k, trial),
so trials are order-independent and reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .sparse import quad_form

__all__ = [
    "factor_from_eig",
    "factor_from_svd",
    "sign_round",
    "hyperplane_round",
    "cut_value",
    "RoundingResult",
]


def factor_from_eig(Z):
    """Factor Q |diag(w)|^(1/2) of a dense symmetric Z, negatives clamped.

    Columns are ordered by decreasing eigenvalue magnitude before
    clamping, so the leading columns carry the dominant spectrum and a
    k-scan sees the informative directions first.
    """
    Z = np.asarray(Z, dtype=np.float64)
    w, Q = np.linalg.eigh(Z)
    order = np.argsort(-np.abs(w), kind="stable")
    w = np.maximum(w[order], 0.0)
    return Q[:, order] * np.sqrt(w)


def factor_from_svd(X):
    """Factor U diag(s)^(1/2) from the thin SVD of a solver factor X."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim == 1:
        X = X[:, None]
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    return U * np.sqrt(s)


def sign_round(x):
    """Signs of a vector with ties at zero resolving to +1."""
    return np.where(np.asarray(x, dtype=np.float64) >= 0.0, 1.0, -1.0)


@dataclass
class RoundingResult:
    x: np.ndarray
    value: float
    k: int
    trial: int


def hyperplane_round(F, C, trials=10, seed=0, k_cap=64):
    """Best labels over the k-scan and Gaussian trials, by objective.

    Parameters
    ----------
    F : ndarray, shape (n, d)
        Rounding factor; the scan uses its first min(d, k_cap) columns.
    C : SymSparse, ShiftedSymSparse, or dense ndarray
        Quadratic objective the labels are scored against.
    trials : int
        Gaussian draws per column count.
    seed : int
        Base seed; trial (k, t) uses generator seeded by (seed, k, t).

    Returns
    -------
    RoundingResult with the winning labels, their objective value, and
    the (k, trial) pair that produced them.  Ties keep the earliest
    (k, trial) in scan order, so results are reproducible.
    """
    F = np.asarray(F, dtype=np.float64)
    if F.ndim == 1:
        F = F[:, None]
    kmax = min(F.shape[1], k_cap)
    if kmax < 1:
        raise ValueError("rounding factor has no columns")
    best = None
    for k in range(1, kmax + 1):
        Fk = F[:, :k]
        for t in range(1, trials + 1):
            rng = np.random.default_rng([seed, k, t])
            z = rng.standard_normal(k)
            x = sign_round(Fk @ z)
            val = quad_form(C, x)
            if best is None or val < best.value:
                best = RoundingResult(x=x, value=val, k=k, trial=t)
    return best


def cut_value(A, x):
    """Weight of the cut induced by labels x on adjacency A.

    Equals (sum of all weights - x.T A x) / 4 for x in {-1, +1}^n.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.size and float(np.max(np.abs(np.abs(x) - 1.0))) != 0.0:
        raise ValueError("cut labels must be +1 or -1")
    if isinstance(A, np.ndarray):
        total = float(A.sum())
    else:
        total = A.sum_all()
    return (total - quad_form(A, x)) / 4.0
