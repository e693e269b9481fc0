"""Graph container, edge-list IO and preprocessing.

Graphs are stored in a compact immutable form: an ``(m, 2)`` int64 edge
array with ``u < v`` per row, plus a CSR adjacency built once at
construction. All analysis code in this package operates on the
preprocessed form produced by :func:`preprocess`: the largest connected
component of the input with self-loops and parallel edges removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import IO, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

__all__ = [
    "EdgeListData",
    "Graph",
    "load_edge_list",
    "preprocess",
    "joint_degree_matrix",
    "degree_assortativity",
    "graph_summary",
    "write_edge_list",
    "write_label_map",
    "write_partition_csv",
]


@dataclass(frozen=True)
class EdgeListData:
    """Raw parsed edge list: may contain self-loops and duplicates."""

    n: int
    pairs: np.ndarray  # (k, 2) int64, unordered endpoints
    labels: tuple[str, ...] | None = None


def load_edge_list(source: Union[str, Path, IO[str]]) -> EdgeListData:
    """Parse a whitespace-separated edge list into raw pairs.

    Each non-blank, non-comment line must hold exactly two tokens, the
    endpoint labels. Labels are arbitrary strings and are mapped to
    integer ids in order of first appearance. Lines starting with ``#``
    and blank lines are skipped.

    Parameters
    ----------
    source : path or open text file

    Returns
    -------
    EdgeListData
        Raw pairs, possibly with loops and duplicates; cleaning happens
        in :func:`preprocess`.
    """
    if hasattr(source, "read"):
        lines = source.read().splitlines()
    else:
        lines = Path(source).read_text().splitlines()

    index: dict[str, int] = {}
    us = []
    vs = []
    for lineno, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) != 2:
            raise ValueError(
                f"line {lineno}: expected 2 tokens, got {len(tokens)}: {stripped!r}"
            )
        a, b = tokens
        if a not in index:
            index[a] = len(index)
        if b not in index:
            index[b] = len(index)
        us.append(index[a])
        vs.append(index[b])

    pairs = np.stack(
        [np.asarray(us, dtype=np.int64), np.asarray(vs, dtype=np.int64)], axis=1
    ) if us else np.empty((0, 2), dtype=np.int64)
    return EdgeListData(n=len(index), pairs=pairs, labels=tuple(index))


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Graph:
    """Immutable simple undirected graph.

    Fields are numpy int64 arrays shared with the numba kernels:
    ``edges`` holds each undirected edge once with ``u < v``, sorted
    lexicographically; ``indptr``/``indices`` is the CSR adjacency with
    neighbor lists sorted ascending; ``csr_edge_ids[k]`` is the row of
    ``edges`` that CSR entry ``k`` came from.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    csr_edge_ids: np.ndarray
    degrees: np.ndarray
    labels: tuple[str, ...] | None = None

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: np.ndarray,
        labels: tuple[str, ...] | None = None,
        validate: bool = True,
    ) -> "Graph":
        """Build a graph from a simple edge set.

        ``edges`` rows may be in either endpoint order; they are
        canonicalized to ``u < v`` and sorted. Raises ``ValueError`` on
        self-loops, duplicate edges or out-of-range endpoints.
        """
        if n < 0:
            raise ValueError("n must be non-negative")
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        m = edges.shape[0]
        if m:
            lo = np.minimum(edges[:, 0], edges[:, 1])
            hi = np.maximum(edges[:, 0], edges[:, 1])
            edges = np.stack([lo, hi], axis=1)
            order = np.lexsort((hi, lo))
            edges = edges[order]
            if validate:
                if lo.min() < 0 or hi.max() >= n:
                    raise ValueError("edge endpoint out of range")
                if np.any(edges[:, 0] == edges[:, 1]):
                    raise ValueError("self-loop in edge set")
                if np.any(
                    (edges[1:, 0] == edges[:-1, 0]) & (edges[1:, 1] == edges[:-1, 1])
                ):
                    raise ValueError("duplicate edge in edge set")
        if labels is not None and len(labels) != n:
            raise ValueError("labels length must equal n")

        src = np.concatenate([edges[:, 0], edges[:, 1]])
        dst = np.concatenate([edges[:, 1], edges[:, 0]])
        eid = np.concatenate([np.arange(m, dtype=np.int64)] * 2) if m else np.empty(
            0, dtype=np.int64
        )
        order = np.lexsort((dst, src))
        indices = dst[order]
        csr_edge_ids = eid[order]
        degrees = np.bincount(src, minlength=n).astype(np.int64)
        indptr = np.concatenate(
            [np.zeros(1, dtype=np.int64), np.cumsum(degrees, dtype=np.int64)]
        )
        return cls(
            n=n,
            edges=_freeze(edges),
            indptr=_freeze(indptr),
            indices=_freeze(indices),
            csr_edge_ids=_freeze(csr_edge_ids),
            degrees=_freeze(degrees),
            labels=labels,
        )

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @property
    def mean_degree(self) -> float:
        return 2.0 * self.m / self.n if self.n else 0.0

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    @cached_property
    def is_connected(self) -> bool:
        if self.n <= 1:
            return True
        ncomp, _ = connected_components(self.to_sparse(), directed=False)
        return ncomp == 1

    def to_sparse(self) -> csr_matrix:
        data = np.ones(len(self.indices), dtype=np.float64)
        return csr_matrix((data, self.indices, self.indptr), shape=(self.n, self.n))

    def label_of(self, v: int) -> str:
        return self.labels[v] if self.labels is not None else str(v)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self.n == other.n
            and self.edges.shape == other.edges.shape
            and bool(np.all(self.edges == other.edges))
            and self.labels == other.labels
        )

    def __hash__(self) -> int:
        return hash((self.n, self.edges.tobytes(), self.labels))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


def _clean_pairs(pairs: np.ndarray, n: int) -> np.ndarray:
    """Drop self-loops, canonicalize order, deduplicate."""
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    if pairs.min() < 0 or pairs.max() >= n:
        raise ValueError("edge endpoint out of range")
    keep = pairs[:, 0] != pairs[:, 1]
    pairs = pairs[keep]
    if pairs.size == 0:
        return np.empty((0, 2), dtype=np.int64)
    lo = np.minimum(pairs[:, 0], pairs[:, 1])
    hi = np.maximum(pairs[:, 0], pairs[:, 1])
    packed = np.unique(lo * np.int64(n) + hi)
    return np.stack([packed // n, packed % n], axis=1)


def preprocess(data: Union[EdgeListData, Graph]) -> Graph:
    """Reduce raw input to its largest connected component, simplified.

    Self-loops and parallel edges are removed first, then the largest
    component is extracted; ties between equal-sized components go to
    the one containing the smallest original node id. Surviving nodes
    are renumbered 0..n'-1 in increasing original-id order, which makes
    the operation idempotent.

    Raises ``ValueError`` on an empty input (no nodes).
    """
    if isinstance(data, Graph):
        n, pairs, labels = data.n, data.edges, data.labels
    else:
        n, pairs, labels = data.n, data.pairs, data.labels
    if n == 0:
        raise ValueError("empty graph: no nodes")

    edges = _clean_pairs(np.asarray(pairs, dtype=np.int64).reshape(-1, 2), n)

    adj = csr_matrix(
        (
            np.ones(2 * edges.shape[0], dtype=np.int8),
            (
                np.concatenate([edges[:, 0], edges[:, 1]]),
                np.concatenate([edges[:, 1], edges[:, 0]]),
            ),
        ),
        shape=(n, n),
    )
    _, comp = connected_components(adj, directed=False)
    sizes = np.bincount(comp)
    comp_ids, first_node = np.unique(comp, return_index=True)
    candidates = comp_ids[sizes[comp_ids] == sizes.max()]
    # tie: keep the component whose smallest original id is smallest
    best = candidates[np.argmin(first_node[candidates])]

    keep_nodes = np.flatnonzero(comp == best)
    remap = np.full(n, -1, dtype=np.int64)
    remap[keep_nodes] = np.arange(keep_nodes.size, dtype=np.int64)
    keep_edges = edges[(comp[edges[:, 0]] == best)]
    new_edges = remap[keep_edges]
    new_labels = (
        tuple(labels[i] for i in keep_nodes) if labels is not None else None
    )
    return Graph.from_edges(
        int(keep_nodes.size), new_edges, labels=new_labels, validate=False
    )


def joint_degree_matrix(g: Graph) -> dict[tuple[int, int], int]:
    """Count edges by the (sorted) degree pair of their endpoints.

    The values sum to ``g.m``; keys are ``(d_low, d_high)`` tuples.
    """
    if g.m == 0:
        return {}
    du = g.degrees[g.edges[:, 0]]
    dv = g.degrees[g.edges[:, 1]]
    lo = np.minimum(du, dv)
    hi = np.maximum(du, dv)
    packed = lo * np.int64(g.n) + hi
    keys, counts = np.unique(packed, return_counts=True)
    return {
        (int(k // g.n), int(k % g.n)): int(c) for k, c in zip(keys, counts)
    }


def degree_assortativity(g: Graph) -> float:
    """Pearson correlation of endpoint degrees over all edges.

    Returns nan when a degree sequence is constant (zero variance),
    e.g. on regular graphs.
    """
    if g.m < 2:
        return float("nan")
    x = np.concatenate([g.degrees[g.edges[:, 0]], g.degrees[g.edges[:, 1]]]).astype(
        float
    )
    y = np.concatenate([g.degrees[g.edges[:, 1]], g.degrees[g.edges[:, 0]]]).astype(
        float
    )
    sx = x.std()
    if sx == 0.0:
        return float("nan")
    return float(((x - x.mean()) * (y - y.mean())).mean() / (sx * x.std()))


def graph_summary(g: Graph) -> dict:
    """Small JSON-friendly description used by the command line tools."""
    r = degree_assortativity(g)
    return {
        "n": g.n,
        "m": g.m,
        "mean_degree": g.mean_degree,
        "degree_assortativity": None if math.isnan(r) else r,
    }


def write_edge_list(g: Graph, path: Union[str, Path]) -> None:
    """Write one ``label_u label_v`` line per edge."""
    with open(path, "w") as fh:
        for u, v in g.edges:
            fh.write(f"{g.label_of(int(u))} {g.label_of(int(v))}\n")


def write_label_map(g: Graph, path: Union[str, Path]) -> None:
    """Write the ``id,label`` map as CSV."""
    with open(path, "w") as fh:
        fh.write("id,label\n")
        for i in range(g.n):
            fh.write(f"{i},{g.label_of(i)}\n")


def write_partition_csv(g: Graph, labels: np.ndarray, path: Union[str, Path]) -> None:
    """Write a two-column ``node,block`` CSV, blocks named A and B."""
    labels = np.asarray(labels)
    with open(path, "w") as fh:
        fh.write("node,block\n")
        for i in range(g.n):
            fh.write(f"{g.label_of(i)},{'A' if labels[i] == 0 else 'B'}\n")
