"""Constraint sets for factor iterates and their projections.

Each set projects a dense (n, r) factor entrywise, per row, or per
column.  ``generalized_project`` handles the curvature-weighted
projection min_{Y in C} tr((Y - T) H (Y - T).T) that the factored ADMM
needs for its Y update: closed form where available, projected gradient
descent otherwise.
"""

from __future__ import annotations

import numpy as np



__all__ = [
    "Binary",
    "UnitNormColumn",
    "UnitNormRow",
    "Nonnegative",
    "Free",
    "generalized_project",
]


class ConstraintSet:
    """Base class; subclasses implement project_info and contains."""

    def project(self, M):
        return self.project_info(M)[0]

    def project_info(self, M):
        raise NotImplementedError

    def contains(self, M, tol=1e-8):
        raise NotImplementedError

    def __repr__(self):
        return type(self).__name__ + "()"


class Binary(ConstraintSet):
    """Entries in {-1, +1}; ties at zero resolve to +1."""

    def project_info(self, M):
        return np.where(np.asarray(M, dtype=np.float64) >= 0.0, 1.0, -1.0), 0

    def contains(self, M, tol=1e-8):
        return bool(np.all(np.abs(np.abs(M) - 1.0) <= tol))


class UnitNormColumn(ConstraintSet):
    """Each column scaled to unit Euclidean norm.

    A zero column cannot be projected; it falls back to the first
    coordinate axis and the fallback count is reported.
    """

    def project_info(self, M):
        M = np.asarray(M, dtype=np.float64)
        squeeze = M.ndim == 1
        if squeeze:
            M = M[:, None]
        norms = np.linalg.norm(M, axis=0)
        zero = norms == 0.0
        safe = np.where(zero, 1.0, norms)
        out = M / safe
        if np.any(zero):
            out[:, zero] = 0.0
            out[0, zero] = 1.0
        if squeeze:
            out = out[:, 0]
        return out, int(np.count_nonzero(zero))

    def contains(self, M, tol=1e-8):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim == 1:
            M = M[:, None]
        return bool(np.all(np.abs(np.linalg.norm(M, axis=0) - 1.0) <= tol))


class UnitNormRow(ConstraintSet):
    """Each row scaled to unit Euclidean norm, zero rows falling back
    to the first coordinate axis."""

    def project_info(self, M):
        M = np.asarray(M, dtype=np.float64)
        squeeze = M.ndim == 1
        if squeeze:
            M = M[:, None]
        norms = np.linalg.norm(M, axis=1)
        zero = norms == 0.0
        safe = np.where(zero, 1.0, norms)
        out = M / safe[:, None]
        if np.any(zero):
            out[zero, :] = 0.0
            out[zero, 0] = 1.0
        if squeeze:
            out = out[:, 0]
        return out, int(np.count_nonzero(zero))

    def contains(self, M, tol=1e-8):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim == 1:
            M = M[:, None]
        return bool(np.all(np.abs(np.linalg.norm(M, axis=1) - 1.0) <= tol))


class Nonnegative(ConstraintSet):
    """Entrywise nonnegative orthant."""

    def project_info(self, M):
        return np.maximum(np.asarray(M, dtype=np.float64), 0.0), 0

    def contains(self, M, tol=1e-8):
        return bool(np.all(np.asarray(M) >= -tol))


class Free(ConstraintSet):
    """No constraint; projection is the identity."""

    def project_info(self, M):
        return np.array(M, dtype=np.float64), 0

    def contains(self, M, tol=1e-8):
        return True


def generalized_project(set_, y_hat, x, rho, tol=1e-10, max_iter=500,
                        reference=None):
    """Minimize tr((Y - T) H (Y - T).T) over Y in the set.

    Here H = rho * (I + x.T @ x) and T solves T @ H = y_hat, i.e. T is
    the unconstrained stationary point of the quadratic.  For r = 1 the
    weight is scalar and the problem collapses to a plain projection of
    y_hat / h; the free set returns T directly.  Everything else runs
    projected gradient descent with fixed step 1 / lambda_max(H),
    stopping when the iterate moves less than ``tol`` in Frobenius norm.

    PGD starts from the projected unconstrained minimizer, or from
    ``reference`` when that feasible point scores a lower subproblem
    objective.  Each PGD step is non-increasing (exact majorization at
    step 1/lambda_max), so the result is never worse than a feasible
    reference; solvers pass the previous iterate to keep their outer
    descent argument valid.

    Returns
    -------
    (Y, info) : info carries iterations, converged, fallback_rows.
    """
    if rho <= 0.0:
        raise ValueError(f"penalty must be positive, got {rho}")
    y_hat = np.asarray(y_hat, dtype=np.float64)
    squeeze = y_hat.ndim == 1
    if squeeze:
        y_hat = y_hat[:, None]
        x = np.asarray(x, dtype=np.float64)[:, None]
    r = y_hat.shape[1]
    H = rho * (np.eye(r) + x.T @ x)

    if r == 1:
        # scalar weight: the weighted and plain projections coincide
        y, nfb = set_.project_info(y_hat / H[0, 0])
        if squeeze:
            y = y.reshape(-1)
        return y, {"iterations": 0, "converged": True, "fallback_rows": nfb}

    y_unc = np.linalg.solve(H, y_hat.T).T
    if isinstance(set_, Free):
        return y_unc, {"iterations": 0, "converged": True, "fallback_rows": 0}

    # exact top eigenvalue of the r-by-r weight; an underestimated step
    # bound would break the monotone-descent guarantee of the PGD loop
    step = 1.0 / float(np.linalg.eigvalsh(H)[-1])
    y, fallbacks = set_.project_info(y_unc)
    if reference is not None and set_.contains(reference):

        def q(w):
            return 0.5 * np.sum((w @ H) * w) - np.sum(w * y_hat)

        if q(reference) < q(y):
            y = np.array(reference, dtype=np.float64)
    converged = False
    iterations = 0
    for iterations in range(1, max_iter + 1):
        grad = y @ H - y_hat
        y_new, nfb = set_.project_info(y - step * grad)
        fallbacks += nfb
        delta = float(np.linalg.norm(y_new - y))
        y = y_new
        if delta <= tol:
            converged = True
            break
    return y, {"iterations": iterations, "converged": converged,
               "fallback_rows": fallbacks}
