"""Three-block splitting baseline for the convex relaxation.

Solves min <C, Z> s.t. A(Z) = b, Z PSD by consensus splitting over
three copies of Z: the linear term, the affine constraint, and the PSD
cone each get a proximal step, the copies are averaged, and the
consensus correction feeds back into each copy.  Dense storage
throughout, so this is the desk-scale reference, capped by ``n_cap``.

Two averaging variants exist.  "reflected" averages the reflected
points 2 X_i - Z_i, which is the classical product-space splitting and
converges to the relaxation optimum; it is the config default.
"literal" averages the prox outputs X_i directly.  The literal sweep is
kept because it is the cheaper textbook-looking rule and useful for
comparison, but its fixed points solve a proximally damped problem (the
sum of the copies is invariant under the sweep), so it settles near,
not at, the optimum; see the solver tests for the observed gap.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .results import SolveResult, Trace

__all__ = [
    "DrsConfig",
    "DrsState",
    "prox_linear",
    "prox_affine",
    "prox_psd",
    "drs_step",
    "solve",
]

_GUARD = 1e-12


@dataclass
class DrsConfig:
    """Step ``t`` scales the proxes, ``relax`` the consensus feedback.

    The sweep stops once the consensus average satisfies the affine
    constraint to ``eps * feas_factor`` and sits within that same
    distance (Frobenius) of the PSD prox output; with the defaults that
    is 1e-4, so both reported violations are bounded by 1e-4 directly.
    Measuring the violations themselves matters for the trace map,
    where the raw copy disagreement understates the constraint error by
    a sqrt(n) factor.
    """

    t: float = 1.0
    relax: float = 1.0
    eps: float = 1e-3
    feas_factor: float = 0.1
    max_iter: int = 20000
    variant: str = "reflected"
    n_cap: int = 3000

    def validate(self):
        if self.t <= 0 or self.relax <= 0:
            raise ValueError("t and relax must be positive")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.variant not in ("reflected", "literal"):
            raise ValueError(f"unknown variant {self.variant!r}")
        return self


class DrsState:
    __slots__ = ("Z", "k")

    def __init__(self, Z, k=0):
        self.Z = Z  # list of three dense symmetric copies
        self.k = k


def prox_linear(Z, C, t):
    """Prox of t * <C, .> at Z."""
    return Z - t * C


def prox_affine(Z, lmap):
    """Projection onto A(Z) = b: overwrite the diagonal, or shift it."""
    if lmap.kind == "diag":
        out = Z.copy()
        np.fill_diagonal(out, lmap.b)
        return out
    if lmap.kind == "trace":
        n = Z.shape[0]
        return Z + ((lmap.b - np.trace(Z)) / n) * np.eye(n)
    raise ValueError("the splitting baseline needs a diag or trace constraint")


def prox_psd(Z):
    """Projection onto the PSD cone by eigenvalue clamping."""
    w, Q = np.linalg.eigh(Z)
    return (Q * np.maximum(w, 0.0)) @ Q.T


def drs_step(state, C, lmap, t=1.0, relax=1.0, variant="literal"):
    """One sweep: proxes, consensus average, feedback into each copy.

    Returns (Y, X) where Y is the consensus average and X the list of
    prox outputs.  The default is the literal average of the X_i; pass
    variant="reflected" for the convergent product-space rule.
    """
    Z = state.Z
    X = [prox_linear(Z[0], C, t), prox_affine(Z[1], lmap), prox_psd(Z[2])]
    if variant == "reflected":
        Y = sum(2.0 * Xi - Zi for Xi, Zi in zip(X, Z)) / 3.0
    else:
        Y = (X[0] + X[1] + X[2]) / 3.0
    for i in range(3):
        Z[i] = Z[i] + relax * (Y - X[i])
    state.k += 1
    return Y, X


def solve(C, lmap, config=None):
    """Iterate sweeps until the copies agree, then report the consensus.

    The trace reuses the shared schema: P is the largest relative change
    of any copy, D the largest disagreement |Y - X_i|, rho the
    relaxation factor, and both value columns carry <C, Y> since the
    splitting has no explicit duals.  The stopping rule checks the
    reported violations directly: the affine residual of Y and the
    distance from Y to the PSD copy, both against eps * feas_factor
    (Weyl's inequality turns the latter into a bound on the negative
    part of Y's spectrum).
    """
    config = (config or DrsConfig()).validate()
    if hasattr(C, "to_dense"):
        C = C.to_dense()
    C = np.asarray(C, dtype=np.float64)
    n = C.shape[0]
    if C.shape != (n, n):
        raise ValueError("cost must be square")
    if not np.allclose(C, C.T, atol=1e-12 * max(1.0, float(np.abs(C).max()))):
        raise ValueError("cost must be symmetric")
    if n > config.n_cap:
        raise ValueError(f"n={n} exceeds the dense cap {config.n_cap}")
    if lmap.kind == "none":
        raise ValueError("the splitting baseline needs a diag or trace constraint")
    state = DrsState([np.zeros((n, n)) for _ in range(3)])
    trace = Trace()
    stop_tol = config.eps * config.feas_factor
    converged = False
    Y = np.zeros((n, n))
    P = D = float("inf")
    obj = float("nan")
    for k in range(1, config.max_iter + 1):
        Z_prev = [Zi.copy() for Zi in state.Z]
        Y, X = drs_step(state, C, lmap, t=config.t, relax=config.relax,
                        variant=config.variant)
        P = max(
            float(np.linalg.norm(Zi - Zp)) / max(float(np.linalg.norm(Zi)), _GUARD)
            for Zi, Zp in zip(state.Z, Z_prev))
        D = max(float(np.linalg.norm(Y - Xi)) for Xi in X)
        obj = float(np.sum(C * Y))
        trace.append(k, P, D, config.relax, obj, obj)
        if not np.isfinite(obj):
            break
        feas = lmap.violation(Y)
        psd_gap = float(np.linalg.norm(Y - X[2]))
        if max(feas, psd_gap) <= stop_tol:
            converged = True
            break
    return SolveResult(converged=converged, iterations=len(trace),
                       objective=obj, P=P, D=D, rho=config.relax, trace=trace,
                       flags={}, Z=Y)
