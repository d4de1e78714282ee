"""Pattern-restricted symmetric matrices and factor-level linear algebra.

Everything n-by-n in this package lives on a fixed symmetric sparsity
pattern: an immutable, sorted list of unordered index pairs that always
contains the full diagonal.  Tall skinny factors are plain dense arrays.
No routine here materializes a dense n-by-n array, so memory stays at
O(nnz + n*r).

Contents
--------
SparsityPattern   frozen pair list with O(1) (i, j) lookup
SymSparse         symmetric matrix with one value per stored pair
ShiftedSymSparse  SymSparse plus a scalar multiple of the all-ones matrix
project_pattern   symmetrized restriction of X @ Y.T onto a pattern
sym_spmm          pattern matrix times skinny dense factor
row_inner         per-row inner products, i.e. diag(A @ B.T)
power_iteration   dominant eigenvalue of a symmetric operator
spectral_norm     largest singular value of a skinny factor
operator_norm     spectral norm of an implicitly defined symmetric matrix
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

__all__ = [
    "SparsityPattern",
    "SymSparse",
    "ShiftedSymSparse",
    "project_pattern",
    "sym_spmm",
    "row_inner",
    "power_iteration",
    "spectral_norm",
    "operator_norm",
    "quad_form",
    "PowerIterationResult",
]


class SparsityPattern:
    """Sorted list of unordered index pairs of an n-by-n symmetric matrix.

    The diagonal is always present: callers never have to special-case
    whether (i, i) is storable.  Pairs are normalized to i <= j, deduped,
    and sorted lexicographically, so two patterns built from the same
    pair set compare equal entry by entry.

    Parameters
    ----------
    n : int
        Matrix dimension.
    pairs : iterable of (int, int), optional
        Off-diagonal or diagonal pairs to store, 0-based, any order.
    """

    __slots__ = ("n", "rows", "cols", "_index", "_diag_pos", "_weights",
                 "_offdiag_mask", "_csr_cache")

    def __init__(self, n, pairs=()):
        if n <= 0:
            raise ValueError(f"pattern dimension must be positive, got {n}")
        self.n = int(n)
        seen = {(i, i) for i in range(n)}
        for i, j in pairs:
            i, j = int(i), int(j)
            if not (0 <= i < n and 0 <= j < n):
                raise ValueError(f"pair ({i}, {j}) out of range for n={n}")
            if i > j:
                i, j = j, i
            seen.add((i, j))
        ordered = sorted(seen)
        self.rows = np.array([p[0] for p in ordered], dtype=np.intp)
        self.cols = np.array([p[1] for p in ordered], dtype=np.intp)
        self.rows.setflags(write=False)
        self.cols.setflags(write=False)
        self._index = {p: k for k, p in enumerate(ordered)}
        diag = self.rows == self.cols
        self._diag_pos = np.nonzero(diag)[0]  # position of (i, i), ascending in i
        self._offdiag_mask = ~diag
        # Frobenius weight of each stored pair in the full matrix
        self._weights = np.where(diag, 1.0, 2.0)
        self._csr_cache = None

    @classmethod
    def full(cls, n):
        iu = np.triu_indices(n)
        return cls(n, zip(iu[0].tolist(), iu[1].tolist()))

    @property
    def nnz(self):
        return self.rows.size

    @property
    def weights(self):
        return self._weights

    @property
    def diag_positions(self):
        return self._diag_pos

    @property
    def offdiag_mask(self):
        return self._offdiag_mask

    def density(self):
        """Fraction of the full matrix covered, counting both triangles."""
        return float(self._weights.sum()) / (self.n * self.n)

    def __contains__(self, pair):
        i, j = pair
        if i > j:
            i, j = j, i
        return (i, j) in self._index

    def index_of(self, i, j):
        if i > j:
            i, j = j, i
        try:
            return self._index[(i, j)]
        except KeyError:
            raise KeyError(f"pair ({i}, {j}) not in pattern") from None

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, SparsityPattern):
            return NotImplemented
        return (self.n == other.n
                and np.array_equal(self.rows, other.rows)
                and np.array_equal(self.cols, other.cols))

    def __hash__(self):
        return hash((self.n, self.nnz))

    def __repr__(self):
        return f"SparsityPattern(n={self.n}, nnz={self.nnz})"

    def _csr_layout(self):
        """CSR skeleton of the symmetric expansion, cached on the pattern.

        Returns (indptr, indices, value_perm) so that a CSR matrix with
        data = values[value_perm] equals the full symmetric matrix.
        """
        if self._csr_cache is None:
            off = np.nonzero(self._offdiag_mask)[0]
            ri = np.concatenate([self.rows, self.cols[off]])
            ci = np.concatenate([self.cols, self.rows[off]])
            vidx = np.concatenate([np.arange(self.nnz), off])
            order = np.lexsort((ci, ri))
            ri, ci, vidx = ri[order], ci[order], vidx[order]
            indptr = np.zeros(self.n + 1, dtype=np.intp)
            np.add.at(indptr, ri + 1, 1)
            np.cumsum(indptr, out=indptr)
            self._csr_cache = (indptr, ci.astype(np.int32, copy=False), vidx)
        return self._csr_cache


class SymSparse:
    """Symmetric matrix stored as one value per pattern pair.

    Value arrays are treated as immutable; arithmetic returns new
    instances sharing the pattern.  Operands of binary operations must
    share the pattern object or an equal one.
    """

    __slots__ = ("pattern", "values")

    def __init__(self, pattern, values):
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (pattern.nnz,):
            raise ValueError(
                f"values shape {values.shape} does not match pattern nnz {pattern.nnz}")
        self.pattern = pattern
        self.values = values

    @classmethod
    def zeros(cls, pattern):
        return cls(pattern, np.zeros(pattern.nnz))

    @classmethod
    def from_dense(cls, pattern, dense):
        dense = np.asarray(dense, dtype=np.float64)
        upper = dense[pattern.rows, pattern.cols]
        lower = dense[pattern.cols, pattern.rows]
        if not np.array_equal(upper, lower):
            raise ValueError("dense matrix is not symmetric on the pattern")
        return cls(pattern, upper)

    @property
    def n(self):
        return self.pattern.n

    def with_values(self, values):
        return SymSparse(self.pattern, values)

    def get(self, i, j, default=0.0):
        """Entry (i, j), or ``default`` when the pair is off-pattern."""
        if i > j:
            i, j = j, i
        k = self.pattern._index.get((i, j))
        return default if k is None else float(self.values[k])

    def diagonal(self):
        return self.values[self.pattern.diag_positions]

    def trace(self):
        return float(self.diagonal().sum())

    def sum_all(self):
        """Sum of all entries of the full matrix (both triangles)."""
        return float(self.pattern.weights @ self.values)

    def inner(self, other):
        """Frobenius inner product over the full matrix."""
        self._check_pattern(other)
        return float(np.sum(self.pattern.weights * self.values * other.values))

    def norm_fro(self):
        return float(np.sqrt(np.sum(self.pattern.weights * self.values**2)))

    def matmat(self, M):
        """Symmetric product self @ M for a dense (n, k) or (n,) array."""
        M = np.asarray(M, dtype=np.float64)
        indptr, indices, perm = self.pattern._csr_layout()
        csr = sp.csr_matrix((self.values[perm], indices, indptr),
                            shape=(self.n, self.n))
        return csr @ M

    def quad_form(self, x):
        """x.T @ self @ x for a vector x."""
        p = self.pattern
        prod = self.values * x[p.rows] * x[p.cols]
        return float(np.sum(p.weights * prod))

    def to_dense(self):
        D = np.zeros((self.n, self.n))
        p = self.pattern
        D[p.rows, p.cols] = self.values
        D[p.cols, p.rows] = self.values
        return D

    def _check_pattern(self, other):
        if self.pattern is not other.pattern and self.pattern != other.pattern:
            raise ValueError("operands are stored on different patterns")

    def __add__(self, other):
        self._check_pattern(other)
        return SymSparse(self.pattern, self.values + other.values)

    def __sub__(self, other):
        self._check_pattern(other)
        return SymSparse(self.pattern, self.values - other.values)

    def __mul__(self, scalar):
        return SymSparse(self.pattern, self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return SymSparse(self.pattern, -self.values)

    def __repr__(self):
        return f"SymSparse(n={self.n}, nnz={self.pattern.nnz})"


class ShiftedSymSparse:
    """A pattern-sparse symmetric matrix plus ``shift`` times all-ones.

    Represents S + shift * ones((n, n)) without ever forming the dense
    rank-one part.  Used for cost matrices whose only dense structure is
    a constant offset, e.g. mean-degree-centered graph costs.
    """

    __slots__ = ("sparse", "shift")

    def __init__(self, sparse, shift=0.0):
        self.sparse = sparse
        self.shift = float(shift)

    @property
    def n(self):
        return self.sparse.n

    @property
    def pattern(self):
        return self.sparse.pattern

    def diagonal(self):
        return self.sparse.diagonal() + self.shift

    def trace(self):
        return self.sparse.trace() + self.shift * self.n

    def sum_all(self):
        return self.sparse.sum_all() + self.shift * self.n**2

    def inner(self, other):
        if isinstance(other, SymSparse):
            other = ShiftedSymSparse(other, 0.0)
        return (self.sparse.inner(other.sparse)
                + self.shift * other.sparse.sum_all()
                + other.shift * self.sparse.sum_all()
                + self.shift * other.shift * self.n**2)

    def norm_fro(self):
        return float(np.sqrt(max(self.inner(self), 0.0)))

    def matmat(self, M):
        M = np.asarray(M, dtype=np.float64)
        out = self.sparse.matmat(M)
        if self.shift != 0.0:
            out = out + self.shift * M.sum(axis=0)
        return out

    def quad_form(self, x):
        s = float(np.sum(x))
        return self.sparse.quad_form(x) + self.shift * s * s

    def to_dense(self):
        return self.sparse.to_dense() + self.shift

    def __add__(self, other):
        if isinstance(other, SymSparse):
            other = ShiftedSymSparse(other, 0.0)
        return ShiftedSymSparse(self.sparse + other.sparse, self.shift + other.shift)

    def __sub__(self, other):
        if isinstance(other, SymSparse):
            other = ShiftedSymSparse(other, 0.0)
        return ShiftedSymSparse(self.sparse - other.sparse, self.shift - other.shift)

    def __mul__(self, scalar):
        return ShiftedSymSparse(self.sparse * scalar, self.shift * float(scalar))

    __rmul__ = __mul__

    def __neg__(self):
        return ShiftedSymSparse(-self.sparse, -self.shift)

    def __repr__(self):
        return f"ShiftedSymSparse(n={self.n}, nnz={self.pattern.nnz}, shift={self.shift})"


def project_pattern(X, Y, pattern):
    """Symmetrized restriction of X @ Y.T onto a pattern.

    Stored pair {i, j} receives (X_i . Y_j + X_j . Y_i) / 2, which is the
    nearest symmetric matrix to X @ Y.T on the pattern.  Diagonal entries
    reduce to X_i . Y_i.

    Parameters
    ----------
    X, Y : ndarray, shape (n, r)
    pattern : SparsityPattern

    Returns
    -------
    SymSparse
    """
    ri, ci = pattern.rows, pattern.cols
    vals = 0.5 * (np.einsum("ij,ij->i", X[ri], Y[ci])
                  + np.einsum("ij,ij->i", X[ci], Y[ri]))
    return SymSparse(pattern, vals)


def sym_spmm(A, M):
    """Product of a pattern-stored symmetric matrix with a skinny factor."""
    return A.matmat(M)


def row_inner(A, B):
    """Per-row inner products <A_i, B_i>, equal to diag(A @ B.T)."""
    return np.einsum("ij,ij->i", A, B)


def quad_form(C, x):
    """x.T @ C @ x for SymSparse, ShiftedSymSparse, or dense C."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(C, np.ndarray):
        return float(x @ C @ x)
    return C.quad_form(x)


@dataclass
class PowerIterationResult:
    value: float
    vector: np.ndarray
    iterations: int
    converged: bool


def power_iteration(matvec, dim, tol=1e-8, max_iter=500):
    """Dominant eigenvalue (by magnitude) of a symmetric operator.

    Starts from a fixed-seed Gaussian vector, so repeated runs are
    bit-identical while the start is never an exact eigenvector of a
    structured operator (graph costs annihilate the all-ones vector,
    which would trap a deterministic uniform start at eigenvalue zero).
    Convergence is declared when the Rayleigh quotient changes by a
    relative ``tol``; otherwise the best estimate comes back with
    ``converged=False``.
    """
    v = np.random.default_rng(0).standard_normal(dim)
    v /= np.linalg.norm(v)
    lam = 0.0
    for k in range(1, max_iter + 1):
        w = matvec(v)
        nrm = np.linalg.norm(w)
        if nrm == 0.0:
            return PowerIterationResult(0.0, v, k, True)
        v = w / nrm
        lam_new = float(v @ matvec(v))
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1e-30):
            return PowerIterationResult(lam_new, v, k, True)
        lam = lam_new
    return PowerIterationResult(lam, v, max_iter, False)


def spectral_norm(Y, tol=1e-8, max_iter=500, return_info=False):
    """Largest singular value of a skinny factor Y.

    Runs power iteration on the r-by-r Gram matrix Y.T @ Y, so the cost
    is O(n r^2) once plus O(r^2) per iteration.
    """
    Y = np.asarray(Y, dtype=np.float64)
    if Y.ndim == 1:
        Y = Y[:, None]
    G = Y.T @ Y
    res = power_iteration(lambda v: G @ v, G.shape[0], tol=tol, max_iter=max_iter)
    sigma = float(np.sqrt(max(res.value, 0.0)))
    if return_info:
        return sigma, res
    return sigma


def operator_norm(A, tol=1e-8, max_iter=500, return_info=False):
    """Spectral norm of a symmetric matrix given by its matvec.

    ``A`` may be a SymSparse, ShiftedSymSparse, dense array, or a bare
    callable v -> A @ v paired with a dimension: pass ``(matvec, dim)``.
    """
    if isinstance(A, tuple):
        matvec, dim = A
    elif isinstance(A, np.ndarray):
        matvec, dim = (lambda v: A @ v), A.shape[0]
    else:
        matvec, dim = A.matmat, A.n
    res = power_iteration(matvec, dim, tol=tol, max_iter=max_iter)
    nrm = abs(res.value)
    if return_info:
        return nrm, res
    return nrm
