"""Linear constraint maps on pattern-stored symmetric matrices.

Supported families: one that reads the diagonal (diag(Z) = b), one that
reads the trace (tr(Z) = b), and the empty map for unconstrained
problems.  Each map knows how to apply itself, apply its adjoint, and
report the infinity-norm constraint violation.
"""

from __future__ import annotations

import numpy as np

from .sparse import SymSparse

__all__ = ["LinearMap", "diag_map", "trace_map", "none_map"]


class LinearMap:
    """Constraint map A with right-hand side b, A(Z) = b.

    ``kind`` is one of "diag", "trace", "none".  The right-hand side is
    a length-n vector for "diag", a scalar for "trace", absent for
    "none".  Use the module-level constructors rather than this class
    directly.
    """

    __slots__ = ("kind", "b")

    def __init__(self, kind, b):
        self.kind = kind
        self.b = b

    @property
    def m(self):
        """Number of scalar constraints."""
        if self.kind == "diag":
            return self.b.size
        return 1 if self.kind == "trace" else 0

    def apply(self, Z):
        """A(Z) for anything exposing diagonal()/trace()."""
        if self.kind == "diag":
            n = Z.n if hasattr(Z, "n") else Z.shape[0]
            if n != self.b.size:
                raise ValueError(
                    f"matrix dimension {n} does not match b length {self.b.size}")
            return np.asarray(Z.diagonal(), dtype=np.float64)
        if self.kind == "trace":
            return np.array([Z.trace()])
        return np.zeros(0)

    def apply_to_diag(self, diag):
        """A(Z) given just the diagonal of Z as a vector."""
        if self.kind == "diag":
            return np.asarray(diag, dtype=np.float64)
        if self.kind == "trace":
            return np.array([float(np.sum(diag))])
        return np.zeros(0)

    def adjoint(self, nu, pattern):
        """A*(nu) as a SymSparse on ``pattern`` (a diagonal matrix).

        diag maps give Diag(nu); the trace map gives nu * I.
        """
        nu = np.atleast_1d(np.asarray(nu, dtype=np.float64))
        if nu.size != self.m:
            raise ValueError(f"multiplier length {nu.size}, expected {self.m}")
        vals = np.zeros(pattern.nnz)
        if self.kind == "diag":
            vals[pattern.diag_positions] = nu
        elif self.kind == "trace":
            vals[pattern.diag_positions] = nu[0]
        return SymSparse(pattern, vals)

    def violation(self, Z):
        """Infinity norm of A(Z) - b; zero for the empty map."""
        if self.kind == "none":
            return 0.0
        return float(np.max(np.abs(self.apply(Z) - self.rhs())))

    def rhs(self):
        if self.kind == "diag":
            return self.b
        if self.kind == "trace":
            return np.array([self.b])
        return np.zeros(0)

    def __repr__(self):
        if self.kind == "diag":
            return f"LinearMap(diag, n={self.b.size})"
        if self.kind == "trace":
            return f"LinearMap(trace, b={self.b})"
        return "LinearMap(none)"


def diag_map(b):
    """Constraint diag(Z) = b for a length-n vector b."""
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError("diag map needs a 1-d right-hand side")
    return LinearMap("diag", b)


def trace_map(b):
    """Constraint tr(Z) = b for a scalar b."""
    return LinearMap("trace", float(b))


def none_map():
    """Empty map for unconstrained objectives."""
    return LinearMap("none", None)
