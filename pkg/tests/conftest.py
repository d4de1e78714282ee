"""Shared oracles used across the test modules.

Every dense oracle here recomputes the quantity under test with plain
numpy loops or factorizations so the sparse kernels are checked against
an implementation that shares no code with them.
"""

import numpy as np
import pytest

from factorsdp import SparsityPattern, SymSparse


def dense_spmm_oracle(S_dense, Y):
    """Triple-loop product, no BLAS shortcuts."""
    n, r = Y.shape
    out = np.zeros((n, r))
    for i in range(n):
        for j in range(n):
            for k in range(r):
                out[i, k] += S_dense[i, j] * Y[j, k]
    return out


def dense_diag_oracle(A, B):
    return np.diag(A @ B.T).copy()


def random_pattern(n, density, rng):
    """Diagonal plus a random subset of off-diagonal pairs."""
    pairs = []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < density:
                pairs.append((i, j))
    return SparsityPattern(n, pairs)


def random_symsparse(pattern, rng, scale=1.0):
    values = rng.uniform(-scale, scale, size=pattern.nnz)
    return SymSparse(pattern, values)


def exhaustive_max_cut(A):
    """Best cut over all sign vectors; A is a SymSparse adjacency."""
    n = A.pattern.n
    A_dense = A.to_dense()
    total = A_dense.sum()
    best = 0.0
    for mask in range(2 ** (n - 1)):
        x = np.ones(n)
        for i in range(n - 1):
            if mask >> i & 1:
                x[i + 1] = -1.0
        best = max(best, 0.25 * (total - x @ A_dense @ x))
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
