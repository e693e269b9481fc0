"""Null models and synthetic benchmark generators.

The dk-series randomizations of an observed graph:

* d0 - uniform random graph with the same node and edge count.
* d1 - configuration model: double-edge-swap chain preserving every
  node's degree.
* d2 - the same chain restricted to swaps that also preserve the joint
  degree matrix.

Plus the two planted benchmarks used for evaluation: power-law random
graphs with a tuned mean degree, and two-block stochastic block models
with a planted polarized split.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .graph import EdgeListData, Graph, preprocess
from .validation import as_rng, check_graph

__all__ = [
    "gen_er",
    "sample_configuration",
    "sample_dk2",
    "randomize",
    "NULL_KINDS",
    "powerlaw_degree_sequence",
    "gen_powerlaw",
    "gen_sbm",
    "SBM_SCHEMES",
    "NullModelSpec",
]

NULL_KINDS = ("d0", "d1", "d2")
SBM_SCHEMES = ("low", "medium", "high")


def _distinct_pairs(n: int, m: int, rng: np.random.Generator) -> np.ndarray:
    """m distinct unordered pairs over n nodes, uniformly at random."""
    max_m = n * (n - 1) // 2
    if m > max_m:
        raise ValueError(f"m={m} exceeds the {max_m} possible pairs")
    if m == 0:
        return np.empty((0, 2), dtype=np.int64)
    if 2 * m > max_m:
        # dense regime: enumerate and subsample (rejection would crawl)
        if max_m > (1 << 23):
            raise ValueError("dense pair sampling of this size is unsupported")
        us, vs = np.triu_indices(n, k=1)
        pick = rng.choice(max_m, size=m, replace=False)
        return np.stack([us[pick], vs[pick]], axis=1).astype(np.int64)
    chosen: set[int] = set()
    out = np.empty(m, dtype=np.int64)
    filled = 0
    while filled < m:
        todo = m - filled
        u = rng.integers(0, n, size=2 * todo + 16)
        v = rng.integers(0, n, size=2 * todo + 16)
        ok = u != v
        keys = np.minimum(u[ok], v[ok]) * np.int64(n) + np.maximum(u[ok], v[ok])
        for key in keys:
            k = int(key)
            if k not in chosen:
                chosen.add(k)
                out[filled] = k
                filled += 1
                if filled == m:
                    break
    return np.stack([out // n, out % n], axis=1)


def gen_er(n: int, m: int, random_state=0) -> Graph:
    """Uniform simple graph with exactly n nodes and m edges."""
    if n < 1:
        raise ValueError("n must be >= 1")
    max_m = n * (n - 1) // 2
    if not 0 <= m <= max_m:
        raise ValueError(f"m must be in [0, {max_m}] for n={n}")
    rng = as_rng(random_state)
    return Graph.from_edges(n, _distinct_pairs(n, m, rng), validate=False)


def _swap_chain(g: Graph, random_state, swap_factor: int, match_degrees: bool) -> Graph:
    check_graph(g)
    m = g.m
    if m < 2:
        return g
    rng = as_rng(random_state)
    attempts = swap_factor * m
    pick_i = rng.integers(0, m, size=attempts)
    pick_j = rng.integers(0, m - 1, size=attempts)
    flip_i = rng.integers(0, 2, size=attempts).astype(np.bool_)
    flip_j = rng.integers(0, 2, size=attempts).astype(np.bool_)
    edges = g.edges.copy()
    _kernels.double_edge_swap_run(
        edges,
        np.int64(g.n),
        pick_i,
        pick_j,
        flip_i,
        flip_j,
        g.degrees,
        match_degrees,
    )
    return Graph.from_edges(g.n, edges, labels=g.labels, validate=False)


def sample_configuration(g: Graph, random_state=0, swap_factor: int = 20) -> Graph:
    """Degree-preserving randomization (simple-graph double edge swaps).

    Runs ``swap_factor * m`` attempted swaps; proposals that would
    create a self-loop or parallel edge are rejected but count against
    the budget. The degree sequence is preserved exactly.
    """
    return _swap_chain(g, random_state, swap_factor, match_degrees=False)


def sample_dk2(g: Graph, random_state=0, swap_factor: int = 20) -> Graph:
    """Joint-degree-matrix-preserving randomization.

    Same chain as :func:`sample_configuration` with proposals also
    rejected unless the rewired endpoints have equal degree, which
    keeps every edge's (sorted) endpoint degree pair intact.
    """
    return _swap_chain(g, random_state, swap_factor, match_degrees=True)


def randomize(g: Graph, kind: str, random_state=0, swap_factor: int = 20) -> Graph:
    """Sample one dk-series null of an observed graph."""
    if kind == "d0":
        return gen_er(g.n, g.m, random_state)
    if kind == "d1":
        return sample_configuration(g, random_state, swap_factor)
    if kind == "d2":
        return sample_dk2(g, random_state, swap_factor)
    raise ValueError(f"unknown null kind {kind!r}; expected one of {NULL_KINDS}")


# ---------------------------------------------------------------------------
# power-law graphs


def _discrete_powerlaw_means(n: int, gamma: float) -> np.ndarray:
    """means[j] = mean of P(k) ~ k^-gamma supported on [j+1, n-1]."""
    ks = np.arange(1, n, dtype=np.float64)
    w = ks**-gamma
    sw = np.cumsum(w[::-1])[::-1]
    skw = np.cumsum((ks * w)[::-1])[::-1]
    return skw / sw


def powerlaw_degree_sequence(
    n: int, gamma: float, target_mean: float, random_state=0
) -> np.ndarray:
    """Degree sequence with P(k) ~ k^-gamma and a tuned mean.

    The lower cutoff k_min and a Bernoulli mixture between the k_min
    and k_min+1 supports are solved so the distribution's mean equals
    ``target_mean`` exactly; the sum is forced even by redrawing one
    uniformly chosen entry. Raises if no cutoff can reach the target,
    reporting the feasible range.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if gamma <= 1.0:
        raise ValueError("gamma must be > 1")
    rng = as_rng(random_state)
    means = _discrete_powerlaw_means(n, gamma)  # index j -> k_min = j+1
    if not means[0] <= target_mean <= n - 1:
        raise ValueError(
            f"target mean degree {target_mean} out of feasible range "
            f"[{means[0]:.4f}, {n - 1}] for gamma={gamma}, n={n}"
        )
    j = int(np.searchsorted(means, target_mean, side="right")) - 1
    j = max(0, j)
    k_min = j + 1

    ks = np.arange(1, n, dtype=np.int64)
    w = ks.astype(np.float64) ** -gamma

    def cdf_from(kmin: int) -> np.ndarray:
        tail = w[kmin - 1 :]
        return np.cumsum(tail) / tail.sum()

    cdf_lo = cdf_from(k_min)
    if k_min + 1 <= n - 1 and means[j] != target_mean:
        cdf_hi = cdf_from(k_min + 1)
        mix = (means[j + 1] - target_mean) / (means[j + 1] - means[j])
    else:
        cdf_hi = cdf_lo
        mix = 1.0

    def draw(size: int) -> np.ndarray:
        lo = rng.random(size) < mix
        u = rng.random(size)
        out = np.empty(size, dtype=np.int64)
        out[lo] = k_min + np.searchsorted(cdf_lo, u[lo])
        out[~lo] = k_min + 1 + np.searchsorted(cdf_hi, u[~lo])
        return out

    degrees = draw(n)
    if degrees.sum() % 2:
        idx = int(rng.integers(n))
        while True:
            degrees[idx] = draw(1)[0]
            if degrees.sum() % 2 == 0:
                break
    return degrees


def gen_powerlaw(n: int, gamma: float, target_mean: float, random_state=0) -> Graph:
    """Power-law random graph: erased stub matching, then preprocessing.

    Stubs are paired uniformly; self-loops and parallel edges are
    erased and the largest component extracted, so the returned graph
    is simple and connected (and typically a bit smaller than n).
    """
    rng = as_rng(random_state)
    degrees = powerlaw_degree_sequence(n, gamma, target_mean, rng)
    stubs = np.repeat(np.arange(n, dtype=np.int64), degrees)
    rng.shuffle(stubs)
    return preprocess(EdgeListData(n=n, pairs=stubs.reshape(-1, 2)))


# ---------------------------------------------------------------------------
# planted two-block graphs


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def _block_edges(nb: int, k_in: float, rng: np.random.Generator) -> np.ndarray:
    if nb < 2:
        return np.empty((0, 2), dtype=np.int64)
    if k_in > nb - 1:
        raise ValueError(f"k_in={k_in} impossible in a block of {nb} nodes")
    pairs = nb * (nb - 1) // 2
    m = int(rng.binomial(pairs, k_in / (nb - 1)))
    return _distinct_pairs(nb, m, rng)


def gen_sbm(
    n: int,
    frac_small: float,
    k_in: float,
    contrast: float,
    scheme: str,
    random_state=0,
) -> tuple[Graph, np.ndarray]:
    """Two-block planted-partition graph with a polarized split.

    Nodes [0, n_small) form the small block (n_small = round of
    frac_small * n); each block is internally Erdos-Renyi with expected
    degree ``k_in``. Cross edges are Bernoulli with an expected total
    set by the scheme, using k_out = k_in / contrast:

    * ``low``    - k_out * n_large cross edges
    * ``medium`` - k_out * n / 2
    * ``high``   - k_out * n_small

    Returns the (possibly disconnected) graph and the planted labels
    (0 = small block). Raises when the expected cross-edge total
    exceeds the n_small * n_large capacity.
    """
    if n < 2:
        raise ValueError("n must be >= 2")
    if not 0.0 < frac_small <= 0.5:
        raise ValueError("frac_small must be in (0, 0.5]")
    if k_in <= 0 or contrast <= 0:
        raise ValueError("k_in and contrast must be positive")
    if scheme not in SBM_SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SBM_SCHEMES}")
    rng = as_rng(random_state)
    n_small = _round_half_up(frac_small * n)
    if n_small < 1 or n_small >= n:
        raise ValueError("block sizes degenerate for this frac_small")
    n_large = n - n_small
    k_out = k_in / contrast
    expected_cross = {
        "low": k_out * n_large,
        "medium": k_out * n / 2.0,
        "high": k_out * n_small,
    }[scheme]
    capacity = n_small * n_large
    if expected_cross > capacity:
        raise ValueError(
            f"expected cross-edge count {expected_cross:.1f} exceeds the "
            f"{capacity} possible cross pairs"
        )

    small = _block_edges(n_small, k_in, rng)
    large = _block_edges(n_large, k_in, rng) + n_small
    x = int(rng.binomial(capacity, expected_cross / capacity))
    chosen: set[int] = set()
    keys = np.empty(x, dtype=np.int64)
    filled = 0
    while filled < x:
        todo = x - filled
        u = rng.integers(0, n_small, size=2 * todo + 16)
        v = rng.integers(0, n_large, size=2 * todo + 16)
        for key in u * np.int64(n_large) + v:
            k = int(key)
            if k not in chosen:
                chosen.add(k)
                keys[filled] = k
                filled += 1
                if filled == x:
                    break
    cross = np.stack([keys // n_large, n_small + keys % n_large], axis=1)

    edges = np.concatenate([small, large, cross], axis=0)
    labels = np.ones(n, dtype=np.int8)
    labels[:n_small] = 0
    return Graph.from_edges(n, edges, validate=False), labels


_SPEC_PARAMS = {
    "d0": set(),
    "d1": {"swap_factor"},
    "d2": {"swap_factor"},
    "er": {"n", "m"},
    "powerlaw": {"n", "gamma", "target_mean"},
    "sbm": {"n", "frac_small", "k_in", "contrast", "scheme"},
}


@dataclass(frozen=True)
class NullModelSpec:
    """Serializable description of a null model or generator.

    ``d0``/``d1``/``d2`` kinds randomize an observed graph passed to
    :meth:`sample`; the generator kinds build a graph from params
    alone.
    """

    kind: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def __post_init__(self):
        if self.kind not in _SPEC_PARAMS:
            raise ValueError(
                f"unknown kind {self.kind!r}; expected one of {sorted(_SPEC_PARAMS)}"
            )
        extra = set(self.params) - _SPEC_PARAMS[self.kind]
        if extra:
            raise ValueError(
                f"invalid params for kind {self.kind!r}: {sorted(extra)}"
            )

    def sample(self, g: Graph | None = None) -> Graph:
        if self.kind in NULL_KINDS:
            if g is None:
                raise ValueError(f"kind {self.kind!r} needs an observed graph")
            return randomize(g, self.kind, self.seed, **self.params)
        if self.kind == "er":
            return gen_er(random_state=self.seed, **self.params)
        if self.kind == "powerlaw":
            return gen_powerlaw(random_state=self.seed, **self.params)
        return gen_sbm(random_state=self.seed, **self.params)[0]
