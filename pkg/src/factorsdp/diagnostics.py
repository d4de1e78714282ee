"""Convergence-theory constants and trace analysis.

The solvers are supported by descent arguments whose constants depend
on the penalty, the gradient Lipschitz constant of the smooth term, and
(for the factored solver) the smallest achievable distortion of the Y
block.  This module evaluates those constants, checks monotonicity of
logged Lagrangian values, and fits linear convergence rates, so
experiment scripts can verify they run in a regime the theory covers.

The augmented Lagrangian evaluators live with their solvers and are
re-exported here for convenience.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .admm_matrix import augmented_lagrangian as auglag_matrix
from .admm_vector import augmented_lagrangian as auglag_vector

__all__ = [
    "auglag_matrix",
    "auglag_vector",
    "theory_constants",
    "TheoryConstants",
    "critical_penalty",
    "descent_check",
    "DescentReport",
    "linear_rate_fit",
    "RateFit",
]

#: constant-penalty descent threshold multiplier: rho >= this times L_g
CRITICAL_RATIO = (3.0 + np.sqrt(17.0)) / 2.0


def critical_penalty(lipschitz):
    """Smallest constant penalty the vector descent argument certifies."""
    return CRITICAL_RATIO * lipschitz


@dataclass
class TheoryConstants:
    """Descent coefficients; positive values certify the step they tag.

    sigma_max bounds from below the smallest squared distortion the
    factored Y update can exhibit given a spectral-norm bound sigma_y on
    the Y iterates.  c1..c3 are the factored solver's per-block descent
    weights (c2 already pays the linearization error L_f / 2).  The two
    vector coefficients multiply |x_next - x|^2 in the one-iteration
    descent bound, without and with strong convexity.
    """

    sigma_max: float
    c1: float
    c2: float
    c3: float
    c_vector: float
    c_vector_strong: float
    matrix_ok: bool
    vector_ok: bool
    linear_rate_ok: bool


def theory_constants(sigma_y, rho, lipschitz_f=0.0, lipschitz_g=0.0,
                     strong_convexity_g=0.0, rho_next=None):
    """Evaluate every descent constant at one penalty value.

    ``rho_next`` defaults to ``rho`` (constant schedule); pass the grown
    penalty when checking a growing schedule mid-run.
    """
    if rho <= 0:
        raise ValueError("rho must be positive")
    s2 = sigma_y**2
    sigma_max = 1.0 - (np.sqrt(s2 * s2 + 4.0 * s2) - s2) / 2.0
    c1 = 0.5 * rho * sigma_max
    c2 = c1 - 0.5 * lipschitz_f
    c3 = 0.5 * rho
    if rho_next is None:
        rho_next = rho
    lg2 = lipschitz_g**2
    dual_term = lg2 * (rho_next + rho) / (2.0 * rho**2)
    c_vector = 0.5 * (rho - 3.0 * lipschitz_g) - dual_term
    c_vector_strong = 0.5 * (rho + strong_convexity_g) - dual_term
    linear_ok = (rho > lipschitz_g
                 and 0.5 * (rho + strong_convexity_g) >= lg2 / rho)
    return TheoryConstants(
        sigma_max=float(sigma_max), c1=float(c1), c2=float(c2), c3=float(c3),
        c_vector=float(c_vector), c_vector_strong=float(c_vector_strong),
        matrix_ok=bool(rho * sigma_max > lipschitz_f),
        vector_ok=bool(c_vector > 0.0),
        linear_rate_ok=bool(linear_ok),
    )


@dataclass
class DescentReport:
    violations: int
    worst_excess: float
    pairs: int

    @property
    def ok(self):
        return self.violations == 0


def descent_check(values, slack=0.0):
    """Count increases of a logged sequence beyond ``slack``.

    ``worst_excess`` is the largest increase minus slack over all
    consecutive pairs (negative when the sequence is cleanly
    monotone).
    """
    values = np.asarray(values, dtype=np.float64)
    if values.size < 2:
        return DescentReport(0, float("-inf"), 0)
    steps = np.diff(values)
    excess = steps - slack
    return DescentReport(int(np.count_nonzero(excess > 0.0)),
                         float(np.max(excess)), int(steps.size))


@dataclass
class RateFit:
    slope: float
    intercept: float
    points: int


def linear_rate_fit(values, floor):
    """Least-squares slope of log(value - floor) against iteration index.

    Entries at or below the floor are dropped (they carry no gap);
    fewer than three usable points is an error since a line through two
    points says nothing.
    """
    values = np.asarray(values, dtype=np.float64)
    gaps = values - floor
    mask = np.isfinite(gaps) & (gaps > 0.0)
    if int(mask.sum()) < 3:
        raise ValueError("need at least 3 trace values above the floor")
    k = np.nonzero(mask)[0].astype(np.float64)
    logs = np.log(gaps[mask])
    slope, intercept = np.polyfit(k, logs, 1)
    return RateFit(float(slope), float(intercept), int(mask.sum()))
