"""Problem families: graph cuts, community detection, image segmentation,
and partial-observation factorization.

Each builder returns a ProblemInstance bundling the objective, the
linear constraint map, the default constraint set, and whatever side
data (adjacency, ground truth) the family carries.  Costs built from a
graph stay on the graph's pattern; the community cost keeps its dense
mean offset as a symbolic shift so nothing n-by-n is ever formed.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

from .admm_matrix import LinearTrace, PartialObsLS
from .constraints import Binary, Nonnegative
from .linmaps import diag_map, none_map
from .sparse import ShiftedSymSparse, SparsityPattern, SymSparse

__all__ = [
    "ProblemInstance",
    "build_maxcut",
    "build_community",
    "build_segmentation",
    "build_partial_ls",
    "generate_sbm",
    "random_graph",
    "random_partial_observations",
    "relative_error",
    "default_rank",
]


@dataclass
class ProblemInstance:
    """A named instance: objective + constraint map + default set.

    ``set_`` is the family's natural constraint set at rank 1; rank-r
    factored runs typically swap in a row-norm set (see default_rank for
    the customary rank).  ``adjacency`` is kept when the instance came
    from a graph so cut values can be reported; ``truth`` carries
    planted labels when the generator knows them.
    """

    name: str
    n: int
    objective: object
    lmap: object
    set_: object
    r_default: int = 1
    adjacency: SymSparse | None = None
    truth: np.ndarray | None = None
    meta: dict = field(default_factory=dict)


def default_rank(n):
    """Customary factor rank for rank-r graph solves, ceil(sqrt(2n))."""
    return int(np.ceil(np.sqrt(2.0 * n)))


def build_maxcut(A):
    """Max-cut instance: cost (A - Diag(A 1)) / 4, diagonal pinned to one.

    Minimizing x.T C x over signs is then exactly maximizing the cut
    weight of A.  Negative edge weights are accepted but make the
    quarter-shift identity a signed cut, so interpret accordingly.
    """
    pat = A.pattern
    if A.values.size and float(A.values.min()) < 0.0:
        warnings.warn("adjacency has negative weights; the cut identity "
                      "then scores a signed cut", stacklevel=2)
    deg = A.matmat(np.ones(A.n))
    vals = A.values / 4.0
    dpos = pat.diag_positions
    vals = vals.copy()
    vals[dpos] = (A.values[dpos] - deg) / 4.0
    C = SymSparse(pat, vals)
    return ProblemInstance(name="maxcut", n=A.n, objective=LinearTrace(C),
                           lmap=diag_map(np.ones(A.n)), set_=Binary(),
                           r_default=1, adjacency=A)


def build_community(A, p=None, q=None):
    """Two-community instance: cost a * ones - A with a the edge-density
    midpoint (p + q) / 2, estimated from the graph when not given.

    The all-ones offset stays a scalar on a ShiftedSymSparse, so solver
    memory is still proportional to the edge count.
    """
    if (p is None) != (q is None):
        raise ValueError("give both p and q, or neither")
    if p is None:
        a = A.sum_all() / float(A.n) ** 2
    else:
        a = 0.5 * (float(p) + float(q))
    C = ShiftedSymSparse(-1.0 * A, a)
    return ProblemInstance(name="community", n=A.n, objective=LinearTrace(C),
                           lmap=diag_map(np.ones(A.n)), set_=Binary(),
                           r_default=1, adjacency=A, meta={"a": a})


def build_segmentation(image, c_weight=1.0, kernel="raw", sigma=1.0,
                       formulation="maxcut", pixel_budget=4096):
    """Two-phase segmentation of an RGB image as a graph problem.

    Pixel features are [r, g, b, c * col, c * row] with channels in
    [0, 1] and raw pixel coordinates.  With kernel="raw" the affinity is
    the squared feature distance (dissimilarity weights, cut keeps
    similar pixels together through the max-cut objective); with
    kernel="gaussian" it is exp(-d^2 / sigma^2) with a zero diagonal.
    The affinity is dense, hence the pixel budget.
    """
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 3 or image.shape[2] != 3:
        raise ValueError("expected an (h, w, 3) RGB array")
    h, w = image.shape[:2]
    n = h * w
    if n > pixel_budget:
        raise ValueError(f"{n} pixels exceed the budget {pixel_budget}; "
                         "downscale the image first")
    rows, cols = np.divmod(np.arange(n), w)
    feats = np.column_stack([image.reshape(n, 3),
                             c_weight * cols.astype(np.float64),
                             c_weight * rows.astype(np.float64)])
    d2 = cdist(feats, feats, "sqeuclidean")
    if kernel == "raw":
        W = d2
    elif kernel == "gaussian":
        if sigma <= 0:
            raise ValueError("sigma must be positive")
        W = np.exp(-d2 / sigma**2)
        np.fill_diagonal(W, 0.0)
    else:
        raise ValueError(f"unknown kernel {kernel!r}")
    A = SymSparse.from_dense(SparsityPattern.full(n), W)
    if formulation == "maxcut":
        inst = build_maxcut(A)
    elif formulation == "community":
        inst = build_community(A)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    inst.name = "segment"
    inst.meta.update(height=h, width=w, kernel=kernel, c_weight=c_weight)
    return inst


def build_partial_ls(C_obs, r=5):
    """Nonnegative low-rank fit of observed entries.

    ``C_obs`` must store every diagonal entry (its pattern does by
    construction); the objective is the squared misfit over the stored
    entries, unconstrained in A(Z) = b terms, with nonnegative factors.
    """
    return ProblemInstance(name="factorize", n=C_obs.n,
                           objective=PartialObsLS(C_obs), lmap=none_map(),
                           set_=Nonnegative(), r_default=r)


def generate_sbm(n, p, q, seed=0):
    """Balanced two-block stochastic graph.

    First ceil(n/2) nodes are community +1, the rest -1; edges appear
    independently with probability p inside a community and q across.
    Returns (adjacency, labels).
    """
    if not (0.0 <= q <= p <= 1.0):
        raise ValueError("need 0 <= q <= p <= 1")
    rng = np.random.default_rng(seed)
    half = (n + 1) // 2
    truth = np.ones(n)
    truth[half:] = -1.0
    iu, ju = np.triu_indices(n, k=1)
    prob = np.where(truth[iu] == truth[ju], p, q)
    keep = rng.random(iu.size) < prob
    pairs = zip(iu[keep].tolist(), ju[keep].tolist())
    pat = SparsityPattern(n, pairs)
    vals = np.ones(pat.nnz)
    vals[pat.diag_positions] = 0.0
    return SymSparse(pat, vals), truth


def random_graph(n, p, seed=0, weights=None):
    """Erdos-Renyi-style random graph; optional (low, high) uniform weights."""
    rng = np.random.default_rng(seed)
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < p
    iu, ju = iu[keep], ju[keep]
    pat = SparsityPattern(n, zip(iu.tolist(), ju.tolist()))
    vals = np.zeros(pat.nnz)
    if weights is None:
        w = np.ones(iu.size)
    else:
        w = rng.uniform(weights[0], weights[1], iu.size)
    for (i, j, wij) in zip(iu.tolist(), ju.tolist(), w):
        vals[pat.index_of(i, j)] = wij
    return SymSparse(pat, vals)


def random_partial_observations(n, rank=5, density=0.5, seed=0):
    """Synthetic nonnegative PSD ground truth observed on a random pattern.

    The truth is M @ M.T with M uniform(0, 1); every diagonal entry is
    observed, plus each off-diagonal pair independently with the given
    density.  Returns (C_obs, M).
    """
    rng = np.random.default_rng(seed)
    M = rng.uniform(0.0, 1.0, (n, rank))
    iu, ju = np.triu_indices(n, k=1)
    keep = rng.random(iu.size) < density
    pat = SparsityPattern(n, zip(iu[keep].tolist(), ju[keep].tolist()))
    full = M @ M.T
    return SymSparse.from_dense(pat, full), M


def relative_error(Z, C):
    """|Z - C|_F / |C|_F over the stored pattern."""
    diff = Z - C
    denom = C.norm_fro()
    if denom == 0.0:
        raise ValueError("reference has zero norm on the pattern")
    return diff.norm_fro() / denom
