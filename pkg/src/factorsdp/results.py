"""Solver configuration, iteration traces, and result records."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = ["SolverConfig", "Trace", "SolveResult"]


@dataclass
class SolverConfig:
    """Shared knobs for the factored and vector ADMM solvers.

    The penalty starts at ``rho0`` and grows by ``gamma`` each iteration
    until ``rho_max``; set gamma to 1 for a constant penalty.  Leaving
    ``rho0`` unset scales the start to the cost matrix: each solver
    multiplies the spectral norm of the cost by its own factor, chosen
    so the early iterations explore instead of freezing the random
    initialization in place (too large) or collapsing onto the dominant
    eigenvector (too small).  ``eps`` bounds the combined
    progress/feasibility residual at which the solver stops.  ``proj_*``
    control the inner projected gradient loop of the Y update, ``cg_*``
    the inner solver of the vector x update.
    """

    rho0: float | None = None
    gamma: float = 1.05
    rho_max: float = 1e4
    eps: float = 1e-3
    max_iter: int = 5000
    seed: int = 0
    proj_tol: float = 1e-10
    proj_max_iter: int = 500
    cg_tol: float = 1e-10
    cg_max_iter: int = 500

    def validate(self):
        if self.rho0 is not None:
            if self.rho0 <= 0:
                raise ValueError("rho0 must be positive")
            if self.rho_max < self.rho0:
                raise ValueError("rho_max must be at least rho0")
        if self.gamma < 1.0:
            raise ValueError("gamma must be at least 1")
        if self.eps <= 0:
            raise ValueError("eps must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        return self

    def resolve_rho0(self, scale, factor):
        """rho0 if set, else factor * scale with a floor of 1e-8."""
        if self.rho0 is not None:
            return float(self.rho0)
        return max(float(factor) * float(scale), 1e-8)


class Trace:
    """Per-iteration history with a fixed CSV schema.

    Columns: k, P, D, rho, objective, lagrangian.  P is the largest
    relative change of any iterate block, D the largest relative
    feasibility gap, rho the penalty used during the iteration,
    objective the raw (non-linearized) cost, lagrangian the augmented
    Lagrangian at the end of the iteration.  Floats serialize via repr,
    so identical runs produce byte-identical files.
    """

    COLUMNS = ("k", "P", "D", "rho", "objective", "lagrangian")

    def __init__(self):
        self.k = []
        self.P = []
        self.D = []
        self.rho = []
        self.objective = []
        self.lagrangian = []

    def append(self, k, P, D, rho, objective, lagrangian):
        self.k.append(int(k))
        self.P.append(float(P))
        self.D.append(float(D))
        self.rho.append(float(rho))
        self.objective.append(float(objective))
        self.lagrangian.append(float(lagrangian))

    def __len__(self):
        return len(self.k)

    def rows(self):
        return zip(self.k, self.P, self.D, self.rho, self.objective,
                   self.lagrangian)

    def to_csv(self):
        lines = [",".join(self.COLUMNS)]
        for k, P, D, rho, obj, lag in self.rows():
            lines.append(f"{k},{P!r},{D!r},{rho!r},{obj!r},{lag!r}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.to_csv())


@dataclass
class SolveResult:
    """Outcome of a solver run.

    Iterate payloads differ by solver: the factored solver fills X, Y
    and (when the pattern is explicit) Z; the vector solver fills x, y;
    the splitting baseline fills Z with the dense consensus matrix.
    ``flags`` collects counters such as projection fallbacks and inner
    loops that hit their iteration caps.
    """

    converged: bool
    iterations: int
    objective: float
    P: float
    D: float
    rho: float
    trace: Trace
    flags: dict = field(default_factory=dict)
    X: np.ndarray | None = None
    Y: np.ndarray | None = None
    Z: object = None
    x: np.ndarray | None = None
    y: np.ndarray | None = None
