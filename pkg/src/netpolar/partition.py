"""Two-way graph partitioners.

Three interchangeable strategies, all yielding a 0/1 node labeling with
both blocks non-empty:

* :func:`bisect_mincut` - multilevel balanced min-cut (heavy-edge
  coarsening, BFS-grown initial bisections, Fiduccia-Mattheyses
  boundary refinement).
* :func:`bisect_spectral` - regularized spectral bisection on the
  degree-corrected adjacency, thresholding the second eigenvector at 0.
* :func:`refine_modularity` - random single-node flips accepted only on
  a strict two-block modularity gain, on top of an existing partition.

Each also has an estimator wrapper with the scikit-learn clustering
interface (``fit``/``fit_predict``/``labels_``/``get_params``), which is
what the score-normalization pipeline passes around.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh
from sklearn.base import BaseEstimator, ClusterMixin, clone

from . import _kernels
from .graph import Graph
from .validation import check_graph, check_partition

__all__ = [
    "bisect_mincut",
    "bisect_spectral",
    "refine_modularity",
    "MincutBisection",
    "SpectralBisection",
    "ModularityRefinement",
    "make_partitioner",
    "PARTITIONER_NAMES",
]


def _balance_bounds(n: int, balance_tolerance: float) -> tuple[int, int]:
    if not 0.0 <= balance_tolerance < 1.0:
        raise ValueError("balance_tolerance must be in [0, 1)")
    max_w0 = max(int((1.0 + balance_tolerance) * n / 2.0), math.ceil(n / 2))
    max_w0 = min(max_w0, n - 1)
    return n - max_w0, max_w0


def bisect_mincut(
    g: Graph,
    *,
    balance_tolerance: float = 0.1,
    random_state: int = 0,
    coarsen_to: int = 64,
    n_init: int = 8,
    max_fm_passes: int = 10,
) -> np.ndarray:
    """Balanced two-way min-cut labeling via a multilevel heuristic.

    The graph is coarsened by heavy-edge matching until it has at most
    ``coarsen_to`` supernodes, bisected by growing block 0 from
    ``n_init`` BFS seeds, then refined level by level with FM passes.
    Block sizes stay within ``balance_tolerance`` of n/2 whenever the
    refinement can keep them there.

    Returns an int8 array of 0/1 block labels.
    """
    check_graph(g, min_nodes=2)
    n = g.n
    min_w0, max_w0 = _balance_bounds(n, balance_tolerance)
    rng = np.random.default_rng(random_state)

    indptr = np.asarray(g.indptr, dtype=np.int64)
    indices = np.asarray(g.indices, dtype=np.int64)
    eweights = np.ones(indices.shape[0], dtype=np.int64)
    vweights = np.ones(n, dtype=np.int64)

    # coarsen; remember the projection map of every level
    levels: list[tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]] = []
    while indptr.shape[0] - 1 > coarsen_to:
        n_cur = indptr.shape[0] - 1
        order = rng.permutation(n_cur).astype(np.int64)
        match = _kernels.greedy_heavy_matching(indptr, indices, eweights, order)
        rep = np.minimum(np.arange(n_cur, dtype=np.int64), match)
        uniq, cid = np.unique(rep, return_inverse=True)
        nc = uniq.shape[0]
        if nc >= 0.95 * n_cur:
            break
        src = np.repeat(np.arange(n_cur, dtype=np.int64), np.diff(indptr))
        crow = cid[src]
        ccol = cid[indices]
        off_diag = crow != ccol
        coarse = coo_matrix(
            (eweights[off_diag], (crow[off_diag], ccol[off_diag])), shape=(nc, nc)
        ).tocsr()
        coarse.sum_duplicates()
        coarse.sort_indices()
        levels.append((indptr, indices, eweights, vweights, cid))
        indptr = coarse.indptr.astype(np.int64)
        indices = coarse.indices.astype(np.int64)
        eweights = coarse.data.astype(np.int64)
        vweights = np.bincount(cid, weights=vweights, minlength=nc).astype(np.int64)

    total = int(vweights.sum())
    n_cur = indptr.shape[0] - 1
    best_labels = None
    best_rank = None
    for _ in range(max(1, n_init)):
        start = int(rng.integers(n_cur))
        labels = _kernels.bfs_grow_bisection(
            indptr, indices, vweights, start, total // 2
        )
        cut = int(
            _kernels.fm_refine(
                indptr, indices, eweights, vweights, labels,
                min_w0, max_w0, max_fm_passes,
            )
        )
        w0 = int(vweights[labels == 0].sum())
        rank = (not (min_w0 <= w0 <= max_w0), cut)
        if best_rank is None or rank < best_rank:
            best_rank = rank
            best_labels = labels

    labels = best_labels
    for indptr, indices, eweights, vweights, cid in reversed(levels):
        labels = labels[cid]
        _kernels.fm_refine(
            indptr, indices, eweights, vweights, labels,
            min_w0, max_w0, max_fm_passes,
        )
    return check_partition(g, labels)


def bisect_spectral(
    g: Graph,
    *,
    tau: float | None = None,
    tol: float = 1e-8,
    max_iter: int | None = None,
    random_state: int = 0,
) -> np.ndarray:
    """Regularized spectral bisection.

    Works on A_tau = A + (tau/n) J with tau defaulting to the mean
    degree; takes the eigenvector of the second-largest eigenvalue of
    D_tau^{-1/2} A_tau D_tau^{-1/2} and thresholds it at zero, after
    flipping signs so the first non-zero component is positive. Nodes
    landing exactly on 0 go to block 0.

    Small graphs are solved densely; larger ones use a matrix-free
    Lanczos solve that raises on non-convergence within ``max_iter``
    (default 10n) iterations.
    """
    check_graph(g, min_nodes=2)
    n = g.n
    if tau is None:
        tau = g.mean_degree
    if max_iter is None:
        max_iter = 10 * n
    d_tau = g.degrees.astype(np.float64) + float(tau)
    if np.any(d_tau <= 0):
        raise ValueError("tau must be positive on graphs with isolated nodes")
    dis = 1.0 / np.sqrt(d_tau)

    if n <= 64:
        dense = g.to_sparse().toarray() + float(tau) / n
        sym = dense * dis[:, None] * dis[None, :]
        _, vecs = np.linalg.eigh(sym)
        fiedler = vecs[:, -2]
    else:
        adj = g.to_sparse()
        scale = float(tau) / n

        def matvec(x):
            y = dis * x
            return dis * (adj @ y + scale * y.sum())

        op = LinearOperator((n, n), matvec=matvec, dtype=np.float64)
        v0 = np.random.default_rng(random_state).standard_normal(n)
        try:
            vals, vecs = eigsh(op, k=2, which="LA", tol=tol, maxiter=max_iter, v0=v0)
        except ArpackNoConvergence as exc:
            raise RuntimeError(
                f"spectral bisection did not converge within {max_iter} iterations"
            ) from exc
        fiedler = vecs[:, 0]  # eigenvalues come back ascending

    nz = np.flatnonzero(np.abs(fiedler) > 1e-12)
    if nz.size and fiedler[nz[0]] < 0:
        fiedler = -fiedler
    labels = (fiedler < 0).astype(np.int8)
    n0 = int(np.count_nonzero(labels == 0))
    if n0 == 0 or n0 == n:
        # degenerate vector; fall back to a median split
        order = np.argsort(fiedler, kind="stable")
        labels = np.zeros(n, dtype=np.int8)
        labels[order[n // 2 :]] = 1
    return check_partition(g, labels)


def refine_modularity(
    g: Graph,
    labels,
    *,
    swap_factor: int = 2,
    random_state: int = 0,
) -> np.ndarray:
    """Hill-climb two-block modularity by random single-node flips.

    Attempts ``swap_factor * n`` uniformly drawn node moves, accepting
    a move only when it strictly increases modularity and never
    emptying a block. Returns a new labeling; the input is untouched.
    """
    labels = check_partition(g, labels).copy()
    check_graph(g, min_nodes=2)
    rng = np.random.default_rng(random_state)
    picks = rng.integers(0, g.n, size=swap_factor * g.n).astype(np.int64)
    _kernels.modularity_refine_run(
        np.asarray(g.indptr, dtype=np.int64),
        np.asarray(g.indices, dtype=np.int64),
        np.asarray(g.degrees, dtype=np.int64),
        labels,
        picks,
    )
    return labels


class MincutBisection(ClusterMixin, BaseEstimator):
    """Multilevel balanced min-cut bisection as a cluster estimator."""

    def __init__(
        self,
        balance_tolerance: float = 0.1,
        coarsen_to: int = 64,
        n_init: int = 8,
        max_fm_passes: int = 10,
        random_state: int = 0,
    ):
        self.balance_tolerance = balance_tolerance
        self.coarsen_to = coarsen_to
        self.n_init = n_init
        self.max_fm_passes = max_fm_passes
        self.random_state = random_state

    def fit(self, X: Graph, y=None):
        self.labels_ = bisect_mincut(
            X,
            balance_tolerance=self.balance_tolerance,
            random_state=self.random_state,
            coarsen_to=self.coarsen_to,
            n_init=self.n_init,
            max_fm_passes=self.max_fm_passes,
        )
        return self


class SpectralBisection(ClusterMixin, BaseEstimator):
    """Regularized spectral bisection as a cluster estimator."""

    def __init__(
        self,
        tau: float | None = None,
        tol: float = 1e-8,
        max_iter: int | None = None,
        random_state: int = 0,
    ):
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter
        self.random_state = random_state

    def fit(self, X: Graph, y=None):
        self.labels_ = bisect_spectral(
            X,
            tau=self.tau,
            tol=self.tol,
            max_iter=self.max_iter,
            random_state=self.random_state,
        )
        return self


class ModularityRefinement(ClusterMixin, BaseEstimator):
    """Base partitioner followed by modularity hill-climbing.

    ``base=None`` means a :class:`MincutBisection` seeded with this
    estimator's ``random_state``.
    """

    def __init__(self, base=None, swap_factor: int = 2, random_state: int = 0):
        self.base = base
        self.swap_factor = swap_factor
        self.random_state = random_state

    def fit(self, X: Graph, y=None):
        if self.base is None:
            base = MincutBisection(random_state=self.random_state)
        else:
            base = clone(self.base)
        initial = base.fit(X).labels_
        self.base_labels_ = initial
        self.labels_ = refine_modularity(
            X, initial, swap_factor=self.swap_factor, random_state=self.random_state
        )
        return self


PARTITIONER_NAMES = ("mincut", "spectral", "modularity")


def make_partitioner(name: str, random_state: int = 0, **params):
    """Build a partitioner estimator from its command-line name."""
    if name == "mincut":
        return MincutBisection(random_state=random_state, **params)
    if name == "spectral":
        return SpectralBisection(random_state=random_state, **params)
    if name == "modularity":
        return ModularityRefinement(random_state=random_state, **params)
    raise ValueError(
        f"unknown partitioner {name!r}; expected one of {', '.join(PARTITIONER_NAMES)}"
    )
