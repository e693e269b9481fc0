"""Input checks and seed helpers shared across modules."""

from __future__ import annotations

import numpy as np

from .graph import Graph

__all__ = ["check_graph", "check_partition", "as_rng", "spawn_seed"]


def check_graph(g: Graph, *, min_nodes: int = 0, require_edges: bool = False) -> Graph:
    if not isinstance(g, Graph):
        raise TypeError(f"expected a Graph, got {type(g).__name__}")
    if g.n < min_nodes:
        raise ValueError(f"graph needs at least {min_nodes} nodes, got {g.n}")
    if require_edges and g.m == 0:
        raise ValueError("graph has no edges")
    return g


def check_partition(g: Graph, labels, *, require_both_blocks: bool = True) -> np.ndarray:
    """Validate a two-block node labeling and return it as int8 0/1."""
    arr = np.asarray(labels)
    if arr.shape != (g.n,):
        raise ValueError(f"partition has shape {arr.shape}, expected ({g.n},)")
    arr = arr.astype(np.int8)
    if arr.size and (arr.min() < 0 or arr.max() > 1):
        raise ValueError("partition labels must be 0 or 1")
    if require_both_blocks:
        n0 = int(np.count_nonzero(arr == 0))
        if n0 == 0 or n0 == g.n:
            raise ValueError("partition must have two non-empty blocks")
    return arr


def as_rng(random_state) -> np.random.Generator:
    if isinstance(random_state, np.random.Generator):
        return random_state
    return np.random.default_rng(random_state)


def spawn_seed(root: int, *key: int) -> int:
    """Derived 64-bit seed, stable in root and key, for compiled kernels."""
    ss = np.random.SeedSequence(root, spawn_key=tuple(key))
    return int(ss.generate_state(2, dtype=np.uint32).view(np.uint64)[0])
