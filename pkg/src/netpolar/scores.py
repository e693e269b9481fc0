"""Structural polarization scores for a two-way partitioned graph.

All scorers take a preprocessed :class:`~netpolar.graph.Graph` and a
0/1 node labeling with both blocks non-empty, and return a
:class:`ScoreResult`. Precondition violations and degenerate inputs
raise; :func:`score_all` converts exceptions into results with the
``error`` field set so ensemble runs can keep going.

The eight score ids and their value ranges:

======  ===========================  ============
id      measure                      range
======  ===========================  ============
RWC     random walk controversy      [-1, 1]
ARWC    adaptive RWC                 [-1, 1]
BCC     betweenness cut centrality   [0, 1]
BP      boundary polarization        [-0.5, 0.5]
DP      dipole polarization          [0, 1]
Q       two-block modularity         [-0.5, 1]
EI      E-I index (sign flipped so   [-1, 1]
        +1 means fully separated)
AEI     density-adjusted E-I index   [-1, 1]
======  ===========================  ============
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix, identity
from scipy.sparse.linalg import spsolve

_trapezoid = getattr(np, "trapezoid", None) or np.trapz

from . import _kernels
from .graph import Graph
from .validation import check_graph, check_partition

__all__ = [
    "SCORE_IDS",
    "DOMAINS",
    "ScoreResult",
    "ScoreConfig",
    "ConvergenceError",
    "edge_betweenness",
    "top_degree_influencers",
    "influencer_count",
    "absorption_probabilities",
    "rwc",
    "arwc",
    "bcc",
    "bp",
    "dp",
    "modularity",
    "ei_index",
    "aei_index",
    "score_all",
]

SCORE_IDS = ("RWC", "ARWC", "BCC", "BP", "DP", "Q", "EI", "AEI")

DOMAINS = {
    "RWC": (-1.0, 1.0),
    "ARWC": (-1.0, 1.0),
    "BCC": (0.0, 1.0),
    "BP": (-0.5, 0.5),
    "DP": (0.0, 1.0),
    "Q": (-0.5, 1.0),
    "EI": (-1.0, 1.0),
    "AEI": (-1.0, 1.0),
}


class ConvergenceError(RuntimeError):
    """Iteration hit its cap; carries the final residual."""

    def __init__(self, message: str, *, residual: float, iterations: int):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


@dataclass(frozen=True)
class ScoreResult:
    """One score evaluation: value, the parameters used, and flags."""

    score_id: str
    value: float | None
    params: dict = field(default_factory=dict)
    flags: tuple[str, ...] = ()
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "score_id": self.score_id,
            "value": self.value,
            "params": dict(self.params),
            "flags": list(self.flags),
            "error": self.error,
        }


@dataclass(frozen=True)
class ScoreConfig:
    """Shared knobs for :func:`score_all`; defaults match the scorers."""

    k: int = 10
    K: float = 0.01
    dp_K: float = 0.01
    dp_tol: float = 1e-6
    dp_max_iter: int | None = None
    bcc_grid_size: int = 512
    bcc_density_floor: float = 1e-12
    rwc_method: str = "exact"
    rwc_walks: int = 100_000
    random_state: int = 0


def _round_half_up(x: float) -> int:
    # 2.5 -> 3; Python's round() would give 2
    return int(math.floor(x + 0.5))


def influencer_count(n_side: int, fraction: float) -> int:
    """Per-side influencer count for a coverage fraction: >= 1 always."""
    if not 0.0 < fraction <= 1.0:
        raise ValueError("influencer fraction must be in (0, 1]")
    return min(n_side, max(1, _round_half_up(fraction * n_side)))


def top_degree_influencers(g: Graph, labels, block: int, k: int) -> np.ndarray:
    """Top-k nodes of a block by degree, ties to the smallest node id.

    k is truncated to the block size.
    """
    labels = np.asarray(labels)
    nodes = np.flatnonzero(labels == block)
    if nodes.size == 0:
        raise ValueError(f"block {block} is empty")
    order = np.lexsort((nodes, -g.degrees[nodes]))
    return nodes[order[: min(k, nodes.size)]]


def _partition_edge_counts(g: Graph, labels: np.ndarray):
    """(n_a, n_b, internal_a, internal_b, cut) for a 0/1 labeling."""
    n_a = int(np.count_nonzero(labels == 0))
    n_b = g.n - n_a
    if g.m == 0:
        return n_a, n_b, 0, 0, 0
    lu = labels[g.edges[:, 0]]
    lv = labels[g.edges[:, 1]]
    cut = int(np.count_nonzero(lu != lv))
    internal_a = int(np.count_nonzero((lu == 0) & (lv == 0)))
    internal_b = g.m - cut - internal_a
    return n_a, n_b, internal_a, internal_b, cut


# ---------------------------------------------------------------------------
# random walk controversy


def absorption_probabilities(
    g: Graph, labels, influencers_a, influencers_b
) -> np.ndarray:
    """Start-side by absorbed-side probabilities of the absorbing walk.

    The walk starts uniformly over a side (influencers included, so a
    start on an influencer is absorbed immediately) and moves to a
    uniform neighbor until it hits an influencer. Solved exactly via
    the linear system of the absorbing chain.

    Returns a (2, 2) row-stochastic matrix: rows index the start side
    (A=0, B=1), columns the absorbing side.
    """
    labels = check_partition(g, labels)
    ia = np.asarray(influencers_a, dtype=np.int64)
    ib = np.asarray(influencers_b, dtype=np.int64)
    if ia.size == 0 or ib.size == 0:
        raise ValueError("both influencer sets must be non-empty")
    if np.intersect1d(ia, ib).size:
        raise ValueError("influencer sets overlap")
    if not g.is_connected:
        raise ValueError("non-absorbing walk: graph is not connected")

    n = g.n
    absorb = np.zeros(n, dtype=np.int8)
    absorb[ia] = 1
    absorb[ib] = 2
    transient = absorb == 0
    f_a = np.zeros(n, dtype=np.float64)
    f_a[ia] = 1.0

    tn = np.flatnonzero(transient)
    if tn.size:
        tmap = np.full(n, -1, dtype=np.int64)
        tmap[tn] = np.arange(tn.size)
        src = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
        keep = transient[src]
        rows = tmap[src[keep]]
        cols = g.indices[keep]
        w = 1.0 / g.degrees[src[keep]]
        to_transient = transient[cols]
        q = csr_matrix(
            (w[to_transient], (rows[to_transient], tmap[cols[to_transient]])),
            shape=(tn.size, tn.size),
        )
        to_a = absorb[cols] == 1
        b = np.bincount(rows[to_a], weights=w[to_a], minlength=tn.size)
        sol = spsolve((identity(tn.size, format="csr") - q).tocsc(), b)
        f_a[tn] = np.atleast_1d(sol)

    side_a = labels == 0
    p_aa = float(f_a[side_a].mean())
    p_ba = float(f_a[~side_a].mean())
    return np.array([[p_aa, 1.0 - p_aa], [p_ba, 1.0 - p_ba]])


def _rwc_from_matrix(p: np.ndarray) -> float:
    return float(p[0, 0] * p[1, 1] - p[0, 1] * p[1, 0])


def rwc(
    g: Graph,
    labels,
    k: int = 10,
    *,
    method: str = "exact",
    n_walks: int = 100_000,
    random_state: int = 0,
) -> ScoreResult:
    """Random walk controversy with k top-degree influencers per side.

    value = p_AA p_BB - p_AB p_BA over the absorbing-walk probabilities.
    k is truncated to the block size on small blocks. ``method`` is
    "exact" (linear solve) or "montecarlo" (simulated walks, kept as a
    cross-check of the exact solver).
    """
    labels = check_partition(g, labels)
    if k < 1:
        raise ValueError("k must be >= 1")
    ia = top_degree_influencers(g, labels, 0, k)
    ib = top_degree_influencers(g, labels, 1, k)
    params = {"k": k, "k_eff_a": int(ia.size), "k_eff_b": int(ib.size), "method": method}
    if method == "exact":
        p = absorption_probabilities(g, labels, ia, ib)
    elif method == "montecarlo":
        if not g.is_connected:
            raise ValueError("non-absorbing walk: graph is not connected")
        absorb = np.zeros(g.n, dtype=np.int8)
        absorb[ia] = 1
        absorb[ib] = 2
        counts = _kernels.simulate_absorbing_walks(
            g.indptr,
            g.indices,
            absorb,
            np.flatnonzero(labels == 0).astype(np.int64),
            np.flatnonzero(labels == 1).astype(np.int64),
            n_walks,
            random_state & 0xFFFFFFFF,
        )
        totals = counts.sum(axis=1)
        if np.any(totals == 0):
            raise ValueError("no walks started on one side; raise n_walks")
        p = counts / totals[:, None]
        params["n_walks"] = n_walks
        params["random_state"] = random_state
    else:
        raise ValueError(f"unknown method {method!r}")
    return ScoreResult("RWC", _rwc_from_matrix(p), params)


def arwc(g: Graph, labels, K: float = 0.01) -> ScoreResult:
    """RWC with influencer counts adapted to block sizes.

    Each side pins max(1, round_half_up(K * side_size)) top-degree
    influencers; otherwise identical to the exact :func:`rwc`.
    """
    labels = check_partition(g, labels)
    n_a = int(np.count_nonzero(labels == 0))
    n_b = g.n - n_a
    k_a = influencer_count(n_a, K)
    k_b = influencer_count(n_b, K)
    ia = top_degree_influencers(g, labels, 0, k_a)
    ib = top_degree_influencers(g, labels, 1, k_b)
    p = absorption_probabilities(g, labels, ia, ib)
    return ScoreResult("ARWC", _rwc_from_matrix(p), {"K": K, "k_a": k_a, "k_b": k_b})


# ---------------------------------------------------------------------------
# betweenness cut centrality


def edge_betweenness(g: Graph) -> np.ndarray:
    """Exact shortest-path edge betweenness, aligned with ``g.edges``.

    Each unordered node pair contributes the fraction of its shortest
    paths through the edge; disconnected pairs contribute nothing.
    """
    check_graph(g)
    return _kernels.brandes_edge_betweenness(
        g.indptr, g.indices, g.csr_edge_ids, g.n, g.m
    )


def _scott_bandwidth(sample: np.ndarray, union_range: float) -> float:
    if sample.size > 1:
        s = float(sample.std(ddof=1))
        if s > 0.0:
            return s * sample.size ** (-0.2)
    bw = 0.1 * union_range
    return bw if bw > 0.0 else 1.0


def _kde_on_grid(sample: np.ndarray, bw: float, grid: np.ndarray) -> np.ndarray:
    dens = np.zeros(grid.size)
    step = max(1, 4_000_000 // max(1, grid.size))
    for i in range(0, sample.size, step):
        z = (grid[:, None] - sample[None, i : i + step]) / bw
        dens += np.exp(-0.5 * z * z).sum(axis=1)
    return dens / (sample.size * bw * math.sqrt(2.0 * math.pi))


def bcc(
    g: Graph,
    labels,
    *,
    grid_size: int = 512,
    density_floor: float = 1e-12,
) -> ScoreResult:
    """Betweenness cut centrality.

    1 - exp(-d_KL) where d_KL is the KL divergence from the non-cut to
    the cut edge-betweenness distribution, both smoothed by Gaussian
    KDE (Scott's rule bandwidth) on a shared grid spanning both samples
    plus three bandwidths, with densities floored before the log.

    An empty cut (or an empty non-cut side) short-circuits to 1.0 with
    a flag: there is no overlap to measure.
    """
    labels = check_partition(g, labels)
    check_graph(g, require_edges=True)
    params = {"grid_size": grid_size, "density_floor": density_floor}
    values = edge_betweenness(g)
    cut_mask = labels[g.edges[:, 0]] != labels[g.edges[:, 1]]
    cut_vals = values[cut_mask]
    rest = values[~cut_mask]
    if cut_vals.size == 0:
        return ScoreResult("BCC", 1.0, params, flags=("empty_cut",))
    if rest.size == 0:
        return ScoreResult("BCC", 1.0, params, flags=("empty_noncut",))

    union_range = float(values.max() - values.min())
    bw_c = _scott_bandwidth(cut_vals, union_range)
    bw_r = _scott_bandwidth(rest, union_range)
    lo = min(cut_vals.min() - 3.0 * bw_c, rest.min() - 3.0 * bw_r)
    hi = max(cut_vals.max() + 3.0 * bw_c, rest.max() + 3.0 * bw_r)
    grid = np.linspace(lo, hi, grid_size)
    p = np.maximum(_kde_on_grid(cut_vals, bw_c, grid), density_floor)
    q = np.maximum(_kde_on_grid(rest, bw_r, grid), density_floor)
    dkl = max(0.0, float(_trapezoid(p * np.log(p / q), grid)))
    params.update({"bandwidth_cut": bw_c, "bandwidth_noncut": bw_r})
    return ScoreResult("BCC", -math.expm1(-dkl), params)


# ---------------------------------------------------------------------------
# boundary polarization


def bp(g: Graph, labels) -> ScoreResult:
    """Boundary polarization.

    Boundary nodes are nodes with a cross-block edge and at least one
    same-block neighbor that has none. Averages d_I / (d_C + d_I) over
    them (d_I edges to such internal neighbors, d_C cross edges) minus
    0.5, so sparse block contact pushes toward +0.5.

    No boundary nodes at all: -0.5 if a cut exists (everything sits on
    the frontier), +0.5 if the blocks are disconnected.
    """
    labels = check_partition(g, labels)
    check_graph(g, require_edges=True)
    n = g.n
    src = np.repeat(np.arange(n, dtype=np.int64), g.degrees)
    same = labels[src] == labels[g.indices]
    cross_deg = np.bincount(src[~same], minlength=n)
    internal = cross_deg == 0
    to_internal = same & internal[g.indices]
    d_i = np.bincount(src[to_internal], minlength=n)
    qualifying = (cross_deg > 0) & (d_i > 0)
    if not np.any(qualifying):
        if np.count_nonzero(cross_deg) == 0:
            return ScoreResult("BP", 0.5, flags=("disconnected_blocks",))
        return ScoreResult("BP", -0.5, flags=("no_qualifying_boundary",))
    ratios = d_i[qualifying] / (cross_deg[qualifying] + d_i[qualifying])
    return ScoreResult(
        "BP", float(ratios.mean() - 0.5), {"n_boundary": int(qualifying.sum())}
    )


# ---------------------------------------------------------------------------
# dipole polarization


def dp(
    g: Graph,
    labels,
    *,
    K: float = 0.01,
    tol: float = 1e-6,
    max_iter: int | None = None,
) -> ScoreResult:
    """Dipole polarization via opinion propagation from influencers.

    Per-side top-degree influencers (fraction K, as in ARWC) are pinned
    at +1/-1; every other node synchronously takes the mean of its
    neighbors' previous values until the max change is below ``tol``.
    The score is (1 - |n+ - n-| / n) * |gc+ - gc-| / 2 over the signs
    and gravity centers of the converged values; exact zeros belong to
    neither pole. Raises :class:`ConvergenceError` at ``max_iter``
    (default 10n).
    """
    labels = check_partition(g, labels)
    n = g.n
    if max_iter is None:
        max_iter = 10 * n
    n_a = int(np.count_nonzero(labels == 0))
    k_a = influencer_count(n_a, K)
    k_b = influencer_count(n - n_a, K)
    ia = top_degree_influencers(g, labels, 0, k_a)
    ib = top_degree_influencers(g, labels, 1, k_b)
    fixed = np.zeros(n, dtype=np.bool_)
    fixed[ia] = True
    fixed[ib] = True
    r0 = np.zeros(n, dtype=np.float64)
    r0[ia] = 1.0
    r0[ib] = -1.0
    r, iters, resid, ok = _kernels.label_propagation_run(
        g.indptr, g.indices, fixed, r0, tol, max_iter
    )
    if not ok:
        raise ConvergenceError(
            f"opinion propagation residual {resid:.3e} after {iters} iterations",
            residual=float(resid),
            iterations=int(iters),
        )
    pos = r > 0.0
    neg = r < 0.0
    n_pos = int(pos.sum())
    n_neg = int(neg.sum())
    gc_pos = float(r[pos].mean())
    gc_neg = float(r[neg].mean())
    d = abs(gc_pos - gc_neg) / 2.0
    delta_a = abs(n_pos - n_neg) / n
    params = {
        "K": K,
        "k_a": k_a,
        "k_b": k_b,
        "tol": tol,
        "max_iter": max_iter,
        "iterations": int(iters),
        "residual": float(resid),
    }
    return ScoreResult("DP", (1.0 - delta_a) * d, params)


# ---------------------------------------------------------------------------
# count-based scores


def modularity(g: Graph, labels) -> ScoreResult:
    """Two-block Newman modularity, sum of e_c - a_c^2 over the blocks."""
    labels = check_partition(g, labels)
    check_graph(g, require_edges=True)
    _, _, int_a, int_b, _ = _partition_edge_counts(g, labels)
    m = g.m
    deg_a = int(g.degrees[labels == 0].sum())
    a_a = deg_a / (2.0 * m)
    a_b = 1.0 - a_a
    value = (int_a / m - a_a**2) + (int_b / m - a_b**2)
    return ScoreResult("Q", float(value))


def ei_index(g: Graph, labels) -> ScoreResult:
    """E-I index oriented so +1 means no cross-block edges.

    (internal - external) / (internal + external) over edge counts;
    the classic survey-network statistic uses the opposite sign.
    """
    labels = check_partition(g, labels)
    check_graph(g, require_edges=True)
    _, _, int_a, int_b, cut = _partition_edge_counts(g, labels)
    internal = int_a + int_b
    return ScoreResult("EI", float((internal - cut) / (internal + cut)))


def aei_index(g: Graph, labels) -> ScoreResult:
    """Density-adjusted E-I index.

    Uses within-block densities L_c / C(n_c, 2) and the cross density
    X / (n_A n_B), so block-size imbalance does not mechanically push
    the score around. Requires both blocks to have >= 2 nodes.
    """
    labels = check_partition(g, labels)
    check_graph(g, require_edges=True)
    n_a, n_b, int_a, int_b, cut = _partition_edge_counts(g, labels)
    if n_a < 2 or n_b < 2:
        raise ValueError("degenerate block: AEI needs at least 2 nodes per block")
    s_aa = int_a / (n_a * (n_a - 1) / 2.0)
    s_bb = int_b / (n_b * (n_b - 1) / 2.0)
    s_ab = cut / (n_a * n_b)
    num = s_aa + s_bb - 2.0 * s_ab
    den = s_aa + s_bb + 2.0 * s_ab
    return ScoreResult("AEI", float(num / den))


# ---------------------------------------------------------------------------


def score_all(
    g: Graph,
    labels,
    config: ScoreConfig | None = None,
    score_ids=SCORE_IDS,
) -> list[ScoreResult]:
    """Evaluate the requested scores, trapping per-score failures.

    Returns one :class:`ScoreResult` per requested id, in request
    order; a scorer that raises contributes a result with ``error``
    set and ``value=None``.
    """
    cfg = config if config is not None else ScoreConfig()
    unknown = [s for s in score_ids if s not in SCORE_IDS]
    if unknown:
        raise ValueError(f"unknown score ids: {', '.join(unknown)}")
    out = []
    for sid in score_ids:
        try:
            if sid == "RWC":
                res = rwc(
                    g,
                    labels,
                    cfg.k,
                    method=cfg.rwc_method,
                    n_walks=cfg.rwc_walks,
                    random_state=cfg.random_state,
                )
            elif sid == "ARWC":
                res = arwc(g, labels, cfg.K)
            elif sid == "BCC":
                res = bcc(
                    g,
                    labels,
                    grid_size=cfg.bcc_grid_size,
                    density_floor=cfg.bcc_density_floor,
                )
            elif sid == "BP":
                res = bp(g, labels)
            elif sid == "DP":
                res = dp(
                    g, labels, K=cfg.dp_K, tol=cfg.dp_tol, max_iter=cfg.dp_max_iter
                )
            elif sid == "Q":
                res = modularity(g, labels)
            elif sid == "EI":
                res = ei_index(g, labels)
            else:
                res = aei_index(g, labels)
        except Exception as exc:  # noqa: BLE001 - ensemble runs must survive
            res = ScoreResult(sid, None, error=str(exc))
        out.append(res)
    return out
