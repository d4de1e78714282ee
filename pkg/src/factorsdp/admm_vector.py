"""Two-block ADMM for vector programs min g(x) s.t. x = y, y in a set.

The y update is a plain projection of x + u/rho; the x update solves
the stationarity equation grad g(x) + u + rho (x - y) = 0, which is a
scalar shift for a linear g and a warm-started conjugate gradient solve
of (2C + rho I) x = rho y - u for a quadratic g.  With a constant
penalty above the critical multiple of the gradient Lipschitz constant
the augmented Lagrangian decreases every iteration; the diagnostics
module knows the thresholds.
"""

from __future__ import annotations

import numpy as np

from .results import SolveResult, SolverConfig, Trace
from .sparse import operator_norm

__all__ = [
    "QuadraticForm",
    "LinearForm",
    "VectorAdmmState",
    "init_state",
    "update_y",
    "update_x",
    "dual_update",
    "residuals",
    "augmented_lagrangian",
    "solve",
]

_GUARD = 1e-12

# Auto rho0 factor: fraction of the gradient Lipschitz constant for a
# quadratic g.  The shifted system 2C + rho I re-weights each cost
# eigendirection by rho / (rho - lambda); starting a quarter of the way
# up the spectrum and growing sweeps that amplification through every
# mode before the iterates lock, which is where sign quality comes from.
_RHO0_FACTOR = 0.25


class QuadraticForm:
    """g(x) = x.T @ C @ x for a symmetric pattern-stored or shifted C.

    The gradient Lipschitz constant 2 * |C|_2 comes from power iteration
    on first use and is cached.  Pass ``strong_convexity`` (2 * smallest
    eigenvalue of C, when known and positive) to enable the linear-rate
    diagnostics.
    """

    def __init__(self, C, strong_convexity=None):
        self.C = C
        self.strong_convexity = strong_convexity
        self._lipschitz = None

    @property
    def n(self):
        return self.C.n if not isinstance(self.C, np.ndarray) else self.C.shape[0]

    def value(self, x):
        from .sparse import quad_form
        return quad_form(self.C, x)

    def gradient(self, x):
        if isinstance(self.C, np.ndarray):
            return 2.0 * (self.C @ x)
        return 2.0 * self.C.matmat(x)

    def lipschitz(self, tol=1e-6):
        if self._lipschitz is None:
            self._lipschitz = 2.0 * operator_norm(self.C, tol=tol)
        return self._lipschitz


class LinearForm:
    """g(x) = c.T @ x; gradient constant, Lipschitz constant zero."""

    strong_convexity = None

    def __init__(self, c):
        self.c = np.asarray(c, dtype=np.float64)

    @property
    def n(self):
        return self.c.size

    def value(self, x):
        return float(self.c @ x)

    def gradient(self, x):
        return self.c

    def lipschitz(self, tol=1e-6):
        return 0.0


class VectorAdmmState:
    __slots__ = ("x", "y", "u", "rho", "k")

    def __init__(self, x, y, u, rho, k=0):
        self.x, self.y, self.u = x, y, u
        self.rho, self.k = rho, k

    def snapshot(self):
        return (self.x, self.y)


def init_state(objective, set_, n, config):
    """x starts uniform(-1, 1) seeded; y is its projection; u is zero.

    An unset rho0 resolves to a fraction of the gradient Lipschitz
    constant; a linear objective has none, so the scale falls back to
    the gradient norm itself.
    """
    rng = np.random.default_rng(config.seed)
    x = rng.uniform(-1.0, 1.0, n)
    y = set_.project(x)
    scale = objective.lipschitz()
    if scale == 0.0 and isinstance(objective, LinearForm):
        scale = float(np.linalg.norm(objective.c))
    rho0 = config.resolve_rho0(scale, _RHO0_FACTOR)
    return VectorAdmmState(x, y, np.zeros(n), rho0, k=0)


def update_y(state, set_):
    y_new, fallbacks = set_.project_info(state.x + state.u / state.rho)
    state.y = y_new
    return fallbacks


def _cg(matvec, rhs, x0, tol, max_iter):
    """Conjugate gradients for an SPD system, relative-residual stopping.

    Returns (x, resid_norm, iterations, converged).  The best iterate so
    far comes back even when the cap is hit.
    """
    x = x0.copy()
    r = rhs - matvec(x)
    bnorm = float(np.linalg.norm(rhs))
    target = tol * max(bnorm, _GUARD)
    rnorm = float(np.linalg.norm(r))
    if rnorm <= target:
        return x, rnorm, 0, True
    x_best, r_best = x.copy(), rnorm
    # residuals are not monotone when the operator is indefinite; cut the
    # run once they blow past the starting point instead of overflowing
    blowup = 1e3 * max(rnorm, bnorm, _GUARD)
    p = r.copy()
    rs = rnorm * rnorm
    for it in range(1, max_iter + 1):
        Ap = matvec(p)
        denom = float(p @ Ap)
        if denom <= 0.0 or not np.isfinite(denom):
            return x_best, r_best, it, False
        alpha = rs / denom
        x = x + alpha * p
        r = r - alpha * Ap
        rs_new = float(r @ r)
        rnorm = float(np.sqrt(rs_new))
        if not np.isfinite(rnorm) or rnorm > blowup:
            return x_best, r_best, it, False
        if rnorm < r_best:
            x_best, r_best = x.copy(), rnorm
        if rnorm <= target:
            return x, rnorm, it, True
        p = r + (rs_new / rs) * p
        rs = rs_new
    return x_best, r_best, max_iter, False


def update_x(state, objective, config):
    """Exact x step for linear g, warm-started CG for quadratic g.

    The shifted system 2C + rho I is indefinite while rho is below the
    gradient Lipschitz constant; plain CG can break down there, so a
    failed CG pass is retried with MINRES, which handles symmetric
    indefinite systems and keeps the stationarity equation solved
    through the early small-penalty phase.  Returns (inner_iterations,
    residual, converged); the linear branch reports (0, 0.0, True).
    """
    rho = state.rho
    if isinstance(objective, LinearForm):
        state.x = state.y - (objective.c + state.u) / rho
        return 0, 0.0, True
    C = objective.C
    if isinstance(C, np.ndarray):
        matvec = lambda v: 2.0 * (C @ v) + rho * v
    else:
        matvec = lambda v: 2.0 * C.matmat(v) + rho * v
    rhs = rho * state.y - state.u
    x_new, resid, iters, ok = _cg(matvec, rhs, state.x, config.cg_tol,
                                  config.cg_max_iter)
    if not ok:
        x_new, resid, extra, ok = _minres_rescue(matvec, rhs, x_new,
                                                 config.cg_tol,
                                                 config.cg_max_iter)
        iters += extra
    state.x = x_new
    return iters, resid, ok


def _minres_rescue(matvec, rhs, x0, tol, max_iter):
    from scipy.sparse.linalg import LinearOperator, minres

    n = rhs.size
    op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
    count = [0]

    def tick(_):
        count[0] += 1

    # minres stops on a recurrence estimate that can sit an order or two
    # above the true residual; ask for extra digits and re-check honestly
    x, info = minres(op, rhs, x0=x0, rtol=1e-2 * tol, maxiter=max_iter,
                     callback=tick)
    resid = float(np.linalg.norm(rhs - matvec(x)))
    target = tol * max(float(np.linalg.norm(rhs)), _GUARD)
    return x, resid, count[0], resid <= target


def dual_update(state, config):
    state.u = state.u + state.rho * (state.x - state.y)
    state.rho = min(config.rho_max, config.gamma * state.rho)
    state.k += 1
    return state


def residuals(state, prev):
    """P over {x, y} relative changes; D = |x - y| / |x|."""
    x_prev, y_prev = prev
    p_x = np.linalg.norm(state.x - x_prev) / max(np.linalg.norm(state.x), _GUARD)
    p_y = np.linalg.norm(state.y - y_prev) / max(np.linalg.norm(state.y), _GUARD)
    D = np.linalg.norm(state.x - state.y) / max(np.linalg.norm(state.x), _GUARD)
    return float(max(p_x, p_y)), float(D)


def augmented_lagrangian(state, objective, set_=None, rho=None, feas_tol=1e-8):
    """g(x) + <u, x - y> + rho/2 |x - y|^2, +inf for infeasible y."""
    if set_ is not None and not set_.contains(state.y, tol=feas_tol):
        return float("inf")
    if rho is None:
        rho = state.rho
    gap = state.x - state.y
    return (objective.value(state.x) + float(state.u @ gap)
            + 0.5 * rho * float(gap @ gap))


def solve(objective, set_, n=None, config=None):
    """Run the vector ADMM; trace columns match the factored solver."""
    config = (config or SolverConfig()).validate()
    if n is None:
        n = objective.n
    state = init_state(objective, set_, n, config)
    trace = Trace()
    flags = {"proj_fallbacks": 0, "cg_nonconverged": 0, "cg_iterations": 0,
             "nonfinite": False}
    converged = False
    P = D = float("inf")
    obj = float("nan")
    rho_used = state.rho
    for k in range(1, config.max_iter + 1):
        prev = state.snapshot()
        rho_used = state.rho
        flags["proj_fallbacks"] += update_y(state, set_)
        iters, _, ok = update_x(state, objective, config)
        flags["cg_iterations"] += iters
        if not ok:
            flags["cg_nonconverged"] += 1
        dual_update(state, config)
        P, D = residuals(state, prev)
        obj = objective.value(state.x)
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
                       flags=flags, x=state.x, y=state.y)
