"""Factored ADMM for linearly constrained programs over symmetric matrices.

Solves

    min f(Z)  s.t.  A(Z) = b,  Z = X @ Y.T on the stored pattern,
                    X = Y,  Y in a constraint set,

by alternating a curvature-weighted projection for Y, a closed-form
joint (X, Z) update obtained by eliminating the multiplier of A(Z) = b,
and dual ascent with a geometrically growing penalty.  All n-by-n
objects stay on the pattern; per-iteration cost is O(nnz * r + n * r^2).

Two storage flavors share the code path.  With a plain SymSparse cost
the iterate Z is materialized on the pattern.  With a ShiftedSymSparse
cost (sparse plus a constant offset, conceptually a fully dense cost)
Z is carried as sym(X @ Y.T) plus a pattern-sparse-plus-shift remainder
B, and every norm or inner product folds the factored part in through
r-by-r Gram identities, so memory still never leaves O(nnz + n r).

The identity Z = sym_pattern(X @ Y.T) + B with
B = -(grad - A*(nu) + S) / rho holds exactly after every (X, Z) update;
B is therefore stored instead of Z and doubles as the splitting
residual: the S update is just S += rho * B.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .constraints import generalized_project
from .linmaps import LinearMap
from .results import SolveResult, SolverConfig, Trace
from .sparse import (ShiftedSymSparse, SymSparse, operator_norm,
                     project_pattern, row_inner, sym_spmm)

__all__ = [
    "LinearTrace",
    "PartialObsLS",
    "MatrixAdmmState",
    "init_state",
    "linearized_gradient",
    "solve_nu",
    "update_XZ",
    "update_Y",
    "dual_update",
    "residuals",
    "augmented_lagrangian",
    "solve",
]

_GUARD = 1e-12  # floor for relative-residual denominators

# Auto rho0 factor: fraction of the cost spectral norm.  Large starts
# freeze the random factors before any cost information propagates;
# starts far below this collapse every column onto the dominant cost
# eigenvector.  0.05 sits on the wide flat part between the two cliffs.
_RHO0_FACTOR = 0.05


class LinearTrace:
    """Objective f(Z) = <C, Z> for a pattern-stored (optionally shifted) C."""

    lipschitz = 0.0

    def __init__(self, C):
        self.C = C

    def value(self, state):
        return _inner_with_z(self.C, state)

    def gradient(self, state):
        return self.C


class PartialObsLS:
    """Least squares on observed entries, f(Z) = sum_obs (Z_ij - C_ij)^2.

    Off-diagonal observations count once per ordered pair, so the sum is
    the squared Frobenius distance restricted to the pattern.  The
    gradient Lipschitz constant is 2.  Requires an explicit SymSparse
    cost (the observation pattern is the storage pattern).
    """

    lipschitz = 2.0

    def __init__(self, C):
        if not isinstance(C, SymSparse):
            raise TypeError("partial-observation objective needs a SymSparse cost")
        self.C = C

    def value(self, state):
        diff = state.Z - self.C
        return diff.inner(diff)

    def gradient(self, state):
        return (state.Z - self.C) * 2.0


class Snapshot(NamedTuple):
    X: np.ndarray
    Y: np.ndarray
    B: object
    Z: object


class MatrixAdmmState:
    """Iterates of the factored solver.

    Z is stored on the pattern for the explicit flavor and left None for
    the implicit one, where it is defined by Z = sym(X @ Y.T) + B.
    Updates rebind arrays rather than writing into them, so snapshots
    can alias previous iterates safely.
    """

    __slots__ = ("X", "Y", "B", "S", "U", "nu", "rho", "k", "Z")

    def __init__(self, X, Y, B, S, U, nu, rho, k=0, Z=None):
        self.X, self.Y, self.B, self.S, self.U = X, Y, B, S, U
        self.nu, self.rho, self.k, self.Z = nu, rho, k, Z

    @property
    def implicit(self):
        return isinstance(self.B, ShiftedSymSparse)

    @property
    def pattern(self):
        return self.B.pattern

    def snapshot(self):
        return Snapshot(self.X, self.Y, self.B, self.Z)

    def z_dense(self):
        """Dense Z for debugging and oracles; never used by the solver."""
        if self.implicit:
            phi = 0.5 * (self.X @ self.Y.T + self.Y @ self.X.T)
            return phi + self.B.to_dense()
        return self.Z.to_dense()

    @classmethod
    def from_parts(cls, Z, X, Y, S, U, nu, rho, k=0):
        """Build a state from an explicit pattern-stored Z."""
        B = Z - project_pattern(X, Y, Z.pattern)
        return cls(X, Y, B, S, U, nu, rho, k=k, Z=Z)


# -- factored Gram identities for the implicit flavor ---------------------

def _phi_inner(A, B, C, D):
    """<sym(A B^T), sym(C D^T)> via r-by-r products."""
    return 0.5 * (np.sum((A.T @ C) * (B.T @ D)) + np.sum((A.T @ D) * (B.T @ C)))


def _phi_sum(X, Y):
    """Sum of all entries of sym(X Y^T)."""
    return float(X.sum(axis=0) @ Y.sum(axis=0))


def _phi_matmat(X, Y, M):
    """sym(X Y^T) @ M without forming the n-by-n product."""
    return 0.5 * (X @ (Y.T @ M) + Y @ (X.T @ M))


def _z_matmat(state, M):
    if state.implicit:
        return state.B.matmat(M) + _phi_matmat(state.X, state.Y, M)
    return sym_spmm(state.Z, M)


def _z_norm_sq(X, Y, B, pattern):
    """Squared Frobenius norm of sym(X Y^T) + B for the implicit flavor."""
    Bs, beta = B.sparse, B.shift
    n = pattern.n
    phi_pat = project_pattern(X, Y, pattern)
    out = _phi_inner(X, Y, X, Y) + Bs.inner(Bs) + beta**2 * n**2
    out += 2.0 * Bs.inner(phi_pat)
    out += 2.0 * beta * _phi_sum(X, Y)
    out += 2.0 * beta * Bs.sum_all()
    return max(out, 0.0)


def _z_diff_norm_sq(state, prev):
    """Squared Frobenius norm of Z - Z_prev for the implicit flavor."""
    X, Y, Xp, Yp = state.X, state.Y, prev.X, prev.Y
    pat = state.pattern
    dBs = state.B.sparse - prev.B.sparse
    dbeta = state.B.shift - prev.B.shift
    n = pat.n
    out = (_phi_inner(X, Y, X, Y) + _phi_inner(Xp, Yp, Xp, Yp)
           - 2.0 * _phi_inner(X, Y, Xp, Yp))
    out += dBs.inner(dBs) + dbeta**2 * n**2
    out += 2.0 * (dBs.inner(project_pattern(X, Y, pat))
                  - dBs.inner(project_pattern(Xp, Yp, pat)))
    out += 2.0 * dbeta * (_phi_sum(X, Y) - _phi_sum(Xp, Yp))
    out += 2.0 * dbeta * dBs.sum_all()
    return max(out, 0.0)


def _inner_with_z(C, state):
    """<C, Z> for either flavor."""
    if not state.implicit:
        return C.inner(state.Z)
    pat = state.pattern
    phi_pat = project_pattern(state.X, state.Y, pat)
    out = C.sparse.inner(phi_pat) + C.shift * _phi_sum(state.X, state.Y)
    out += C.inner(state.B)
    return out


def _z_fro(state):
    if state.implicit:
        return float(np.sqrt(_z_norm_sq(state.X, state.Y, state.B, state.pattern)))
    return state.Z.norm_fro()


# -- solver operations -----------------------------------------------------

def init_state(objective, lmap, n, r, config):
    """Seeded uniform(-1, 1) factors; Z starts at their pattern product.

    For a diag constraint the diagonal of Z is overwritten so A(Z) = b
    holds from the first iterate; duals start at zero.  An unset rho0
    resolves to a fixed fraction of the cost spectral norm.
    """
    C = objective.C
    pat = C.pattern
    if pat.n != n:
        raise ValueError(f"cost is {pat.n}-dimensional, expected {n}")
    if lmap.kind == "diag" and lmap.b.size != n:
        raise ValueError("diag map right-hand side has wrong length")
    if r < 1:
        raise ValueError("rank must be at least 1")
    rng = np.random.default_rng(config.seed)
    X = rng.uniform(-1.0, 1.0, (n, r))
    Y = rng.uniform(-1.0, 1.0, (n, r))
    bvals = np.zeros(pat.nnz)
    if lmap.kind == "diag":
        bvals[pat.diag_positions] = lmap.b - row_inner(X, Y)
    Bs = SymSparse(pat, bvals)
    implicit = isinstance(C, ShiftedSymSparse)
    if implicit:
        B = ShiftedSymSparse(Bs, 0.0)
        S = ShiftedSymSparse(SymSparse.zeros(pat), 0.0)
        Z = None
    else:
        B = Bs
        S = SymSparse.zeros(pat)
        Z = project_pattern(X, Y, pat) + B
    U = np.zeros((n, r))
    nu = np.zeros(lmap.m)
    # a linear objective wants a low start so the growing penalty sweeps
    # the cost spectrum; a curved one needs the penalty to dominate its
    # gradient Lipschitz constant at the data scale from the first step
    factor = max(_RHO0_FACTOR, objective.lipschitz)
    rho0 = config.resolve_rho0(operator_norm(C), factor)
    return MatrixAdmmState(X, Y, B, S, U, nu, rho0, k=0, Z=Z)


def linearized_gradient(objective, state):
    """Gradient of f at the current Z, the linearization point."""
    return objective.gradient(state)


def solve_nu(state, G, lmap):
    """Multiplier of A(Z) = b via the skinny-factor pipeline.

    Only products with Y and stored diagonals appear, so the cost is
    O(nnz * r + n * r).  The same expressions serve the diag and trace
    maps; the trace map sums them to scalars.
    """
    Y, S, U, rho = state.Y, state.S, state.U, state.rho
    F1 = S.matmat(Y)
    F2 = G.matmat(Y)
    g1 = row_inner(F1, Y)
    g2 = row_inner(U, Y)
    g3 = row_inner(F2, Y)
    g4 = row_inner(Y, Y)
    # diag(D Y^T) for the dual-adjusted target D = (S Y - U)/rho + Y
    adyt = (g1 - g2) / rho + g4
    if lmap.kind == "diag":
        numer = rho * (lmap.b - adyt) + G.diagonal() + S.diagonal() + g3 + g1
        return numer / (g4 + 1.0)
    if lmap.kind == "trace":
        # H = Tr((I + Y Y^T)) summed against the identity adjoint, so the
        # denominator carries n, not the 1 of the per-row diag case
        numer = (rho * (lmap.b - float(adyt.sum()))
                 + G.trace() + S.trace() + float((g3 + g1).sum()))
        return np.array([numer / (float(g4.sum()) + Y.shape[0])])
    return np.zeros(0)


def update_XZ(state, G, lmap, nu):
    """Closed-form joint minimizer over (X, Z) given Y and the duals.

    B collects every pattern term of the stationarity system; X rides on
    B @ Y plus the dual-adjusted target, and Z is B plus the pattern
    projection of X @ Y.T, which makes A(Z) = b hold to rounding error
    by construction.
    """
    rho = state.rho
    pat = state.pattern
    Astar = lmap.adjoint(nu, pat)
    if state.implicit:
        Bs = (G.sparse - Astar + state.S.sparse) * (-1.0 / rho)
        B = ShiftedSymSparse(Bs, -(G.shift + state.S.shift) / rho)
    else:
        B = (G - Astar + state.S) * (-1.0 / rho)
    D_fac = (state.S.matmat(state.Y) - state.U) / rho + state.Y
    X_new = B.matmat(state.Y) + D_fac
    state.X = X_new
    state.B = B
    state.nu = nu
    if not state.implicit:
        state.Z = project_pattern(X_new, state.Y, pat) + B
    return state


def update_Y(state, set_, config):
    """Curvature-weighted projection of the Y stationarity target.

    The previous Y is offered as a projected-gradient starting point, so
    once the iterate is feasible the step never increases the augmented
    Lagrangian.
    """
    rho = state.rho
    ZX = _z_matmat(state, state.X)
    y_hat = state.U + state.S.matmat(state.X) + rho * (state.X + ZX)
    Y_new, info = generalized_project(set_, y_hat, state.X, rho,
                                      tol=config.proj_tol,
                                      max_iter=config.proj_max_iter,
                                      reference=state.Y)
    state.Y = Y_new
    return info


def dual_update(state, config):
    """Ascent on both duals, then geometric penalty growth.

    S += rho * (Z - sym(X Y^T)) is exactly S += rho * B.
    """
    rho = state.rho
    if state.implicit:
        S = ShiftedSymSparse(state.S.sparse + state.B.sparse * rho,
                             state.S.shift + rho * state.B.shift)
    else:
        S = state.S + state.B * rho
    state.S = S
    state.U = state.U + rho * (state.X - state.Y)
    state.rho = min(config.rho_max, config.gamma * rho)
    state.k += 1
    return state


def residuals(state, prev):
    """Progress residual P and feasibility residual D.

    P is the largest relative Frobenius change over the Z, X, Y blocks;
    D the larger of |Z - sym(X Y^T)| / |Z| and |X - Y| / |X|.
    Denominators are floored to avoid division by zero.
    """
    z_nrm = _z_fro(state)
    if state.implicit:
        dz = float(np.sqrt(_z_diff_norm_sq(state, prev)))
    else:
        dz = (state.Z - prev.Z).norm_fro()
    p_z = dz / max(z_nrm, _GUARD)
    x_nrm = float(np.linalg.norm(state.X))
    p_x = float(np.linalg.norm(state.X - prev.X)) / max(x_nrm, _GUARD)
    y_nrm = float(np.linalg.norm(state.Y))
    p_y = float(np.linalg.norm(state.Y - prev.Y)) / max(y_nrm, _GUARD)
    P = max(p_z, p_x, p_y)
    d_split = state.B.norm_fro() / max(z_nrm, _GUARD)
    d_factor = float(np.linalg.norm(state.X - state.Y)) / max(x_nrm, _GUARD)
    return P, max(d_split, d_factor)


def augmented_lagrangian(state, objective, set_=None, rho=None, feas_tol=1e-8):
    """Augmented Lagrangian of the splitting at the given state.

    Evaluates f(Z) + <U, X - Y> + <S, Z - X Y^T> + rho/2 |X - Y|^2
    + rho/2 |Z - X Y^T|^2 with the coupling term taken literally: the
    unsymmetrized product, off-pattern entries included.  The Y update
    minimizes exactly this quantity, so its steps are non-ascent under
    this convention.  Gram identities keep the evaluation at sparse
    cost; <S, Z - X Y^T> equals <S, B> because S is symmetric and lives
    on the pattern.  When a constraint set is supplied and Y is
    infeasible beyond ``feas_tol`` the value is +inf, matching the
    indicator term.
    """
    if set_ is not None and not set_.contains(state.Y, tol=feas_tol):
        return float("inf")
    if rho is None:
        rho = state.rho
    X, Y = state.X, state.Y
    gap = X - Y
    prod_sq = float(np.sum((X.T @ X) * (Y.T @ Y)))  # |X Y^T|^2
    if state.implicit:
        # Z - X Y^T = B + (sym(X Y^T) - X Y^T), the parts orthogonal
        B = state.B
        K = Y.T @ X
        asym_sq = 0.5 * (prod_sq - float(np.sum(K * K.T)))
        coupling_sq = B.inner(B) + asym_sq
    else:
        # recompute the remainder so mid-iteration states evaluate exactly
        phi = project_pattern(X, Y, state.pattern)
        B = state.Z - phi
        coupling_sq = (state.Z.inner(state.Z) - 2.0 * state.Z.inner(phi)
                       + prod_sq)
    val = objective.value(state)
    val += float(np.sum(state.U * gap))
    val += state.S.inner(B)
    val += 0.5 * rho * (float(np.sum(gap * gap)) + coupling_sq)
    return val


def solve(objective, lmap, set_, n, r, config=None):
    """Run the factored ADMM to tolerance or the iteration cap.

    Returns a SolveResult whose trace logs, per iteration, the residual
    pair, the penalty used, the raw objective, and the augmented
    Lagrangian evaluated at the end of the iteration with that penalty.
    """
    config = (config or SolverConfig()).validate()
    state = init_state(objective, lmap, n, r, config)
    trace = Trace()
    flags = {"proj_fallbacks": 0, "proj_nonconverged": 0, "nonfinite": False}
    converged = False
    P = D = float("inf")
    obj = float("nan")
    rho_used = state.rho
    for k in range(1, config.max_iter + 1):
        prev = state.snapshot()
        rho_used = state.rho
        info = update_Y(state, set_, config)
        flags["proj_fallbacks"] += info["fallback_rows"]
        if not info["converged"]:
            flags["proj_nonconverged"] += 1
        G = linearized_gradient(objective, state)
        nu = solve_nu(state, G, lmap)
        update_XZ(state, G, lmap, nu)
        dual_update(state, config)
        P, D = residuals(state, prev)
        obj = objective.value(state)
        lag = augmented_lagrangian(state, objective, rho=rho_used)
        trace.append(k, P, D, rho_used, obj, lag)
        if not (np.isfinite(P) and np.isfinite(D) and np.isfinite(obj)):
            flags["nonfinite"] = True
            break
        if max(P, D) <= config.eps:
            converged = True
            break
    return SolveResult(converged=converged, iterations=len(trace),
                       objective=obj, P=P, D=D, rho=rho_used, trace=trace,
                       flags=flags, X=state.X, Y=state.Y,
                       Z=None if state.implicit else state.Z)
