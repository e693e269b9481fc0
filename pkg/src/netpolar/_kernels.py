"""Compiled kernels for the hot loops.

Everything here takes plain int64/float64 numpy arrays. Randomness is
either pre-drawn into arrays by the caller (swap chains, refinement
picks) or driven by an explicit integer seed (walk simulation), so
results never depend on thread count or call order.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_EMPTY = np.int64(-1)
_TOMB = np.int64(-2)
_MIX = np.int64(-7046029254386353131)  # 0x9E3779B97F4A7C15 as signed


@njit(cache=True, inline="always")
def _slot(key, mask):
    return (key * _MIX) & mask


@njit(cache=True)
def _set_build(keys, cap):
    table = np.full(cap, _EMPTY, dtype=np.int64)
    mask = cap - 1
    for i in range(keys.shape[0]):
        key = keys[i]
        idx = _slot(key, mask)
        while table[idx] != _EMPTY:
            idx = (idx + 1) & mask
        table[idx] = key
    return table


@njit(cache=True, inline="always")
def _set_contains(table, mask, key):
    idx = _slot(key, mask)
    while True:
        k = table[idx]
        if k == key:
            return True
        if k == _EMPTY:
            return False
        idx = (idx + 1) & mask


@njit(cache=True, inline="always")
def _set_remove(table, mask, key):
    idx = _slot(key, mask)
    while True:
        if table[idx] == key:
            table[idx] = _TOMB
            return
        idx = (idx + 1) & mask


@njit(cache=True, inline="always")
def _set_insert(table, mask, key):
    # key must be absent; reuses tombstones
    idx = _slot(key, mask)
    while table[idx] != _EMPTY and table[idx] != _TOMB:
        idx = (idx + 1) & mask
    placed_tomb = table[idx] == _TOMB
    table[idx] = key
    return placed_tomb


@njit(cache=True)
def brandes_edge_betweenness(indptr, indices, edge_ids, n, m):
    """Exact edge betweenness over unordered node pairs (Brandes)."""
    bc = np.zeros(m, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        qh = 0
        qt = 1
        queue[0] = s
        cnt = 0
        while qh < qt:
            v = queue[qh]
            qh += 1
            order[cnt] = v
            cnt += 1
            dv = dist[v]
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if dist[w] < 0:
                    dist[w] = dv + 1
                    queue[qt] = w
                    qt += 1
                if dist[w] == dv + 1:
                    sigma[w] += sigma[v]
        for i in range(cnt - 1, 0, -1):
            w = order[i]
            coeff = (1.0 + delta[w]) / sigma[w]
            dw = dist[w]
            for k in range(indptr[w], indptr[w + 1]):
                v = indices[k]
                if dist[v] == dw - 1:
                    c = sigma[v] * coeff
                    bc[edge_ids[k]] += c
                    delta[v] += c
    for e in range(m):
        bc[e] *= 0.5
    return bc


@njit(cache=True)
def double_edge_swap_run(edges, n, pick_i, pick_j, flip_i, flip_j, degrees, match_degrees):
    """Run a degree-preserving double edge swap chain in place.

    Each attempt t proposes replacing edges (u,v),(x,y) by (u,y),(x,v),
    with endpoint orientation randomized by the flip arrays. Proposals
    creating a self-loop or parallel edge are rejected but still consume
    the attempt. With ``match_degrees`` the proposal is additionally
    rejected unless deg(v) == deg(y), which preserves the joint degree
    matrix. Returns the number of accepted swaps.
    """
    m = edges.shape[0]
    if m < 2:
        return 0
    cap = 1
    while cap < 4 * m:
        cap *= 2
    mask = cap - 1
    keys = np.empty(m, dtype=np.int64)
    for e in range(m):
        u = edges[e, 0]
        v = edges[e, 1]
        if u > v:
            u, v = v, u
        keys[e] = u * n + v
    table = _set_build(keys, cap)
    free = cap - m  # empty slots; rebuild when tombstones eat too many
    accepted = 0
    for t in range(pick_i.shape[0]):
        i = pick_i[t]
        j = pick_j[t]
        if j >= i:
            j += 1
        u = edges[i, 0]
        v = edges[i, 1]
        x = edges[j, 0]
        y = edges[j, 1]
        if flip_i[t]:
            u, v = v, u
        if flip_j[t]:
            x, y = y, x
        if match_degrees and degrees[v] != degrees[y]:
            continue
        if u == y or x == v:
            continue
        k1 = u * n + y if u < y else y * n + u
        k2 = x * n + v if x < v else v * n + x
        if k1 == k2:
            continue
        if _set_contains(table, mask, k1) or _set_contains(table, mask, k2):
            continue
        ku = u * n + v if u < v else v * n + u
        kx = x * n + y if x < y else y * n + x
        _set_remove(table, mask, ku)
        _set_remove(table, mask, kx)
        # removes leave tombstones; only inserts into truly empty slots
        # shrink the empty pool, so rebuild once probing would degrade
        if not _set_insert(table, mask, k1):
            free -= 1
        if not _set_insert(table, mask, k2):
            free -= 1
        edges[i, 0] = u
        edges[i, 1] = y
        edges[j, 0] = x
        edges[j, 1] = v
        accepted += 1
        if free < cap // 4:
            for e in range(m):
                a = edges[e, 0]
                b = edges[e, 1]
                if a > b:
                    a, b = b, a
                keys[e] = a * n + b
            table = _set_build(keys, cap)
            free = cap - m
    return accepted


@njit(cache=True)
def label_propagation_run(indptr, indices, fixed, r_init, tol, max_iter):
    """Synchronous averaging over neighbors with pinned nodes.

    Free node update: r_t(s) = mean over neighbors v of r_{t-1}(v).
    Stops when the max absolute change drops below tol. Returns
    (values, iterations, residual, converged).
    """
    n = r_init.shape[0]
    r = r_init.copy()
    nxt = r_init.copy()
    it = 0
    resid = 0.0
    while it < max_iter:
        resid = 0.0
        for s in range(n):
            if fixed[s]:
                continue
            deg = indptr[s + 1] - indptr[s]
            if deg == 0:
                nxt[s] = 0.0
                continue
            acc = 0.0
            for k in range(indptr[s], indptr[s + 1]):
                acc += r[indices[k]]
            val = acc / deg
            d = val - r[s]
            if d < 0.0:
                d = -d
            if d > resid:
                resid = d
            nxt[s] = val
        tmp = r
        r = nxt
        nxt = tmp
        it += 1
        if resid < tol:
            return r, it, resid, True
    return r, it, resid, False


@njit(cache=True)
def simulate_absorbing_walks(indptr, indices, absorb, nodes_a, nodes_b, n_walks, seed):
    """Count absorptions of uniform random walks, by start side.

    absorb: 0 = transient, 1 = absorbing on side A, 2 = absorbing on
    side B. Walks start uniformly on side A or B (fair coin), including
    the absorbing nodes themselves. Returns a 2x2 count matrix indexed
    [start_side, absorbed_side].
    """
    np.random.seed(seed)
    counts = np.zeros((2, 2), dtype=np.int64)
    for _ in range(n_walks):
        if np.random.random() < 0.5:
            side = 0
            cur = nodes_a[np.random.randint(0, nodes_a.shape[0])]
        else:
            side = 1
            cur = nodes_b[np.random.randint(0, nodes_b.shape[0])]
        while absorb[cur] == 0:
            deg = indptr[cur + 1] - indptr[cur]
            cur = indices[indptr[cur] + np.random.randint(0, deg)]
        counts[side, absorb[cur] - 1] += 1
    return counts


@njit(cache=True)
def greedy_heavy_matching(indptr, indices, eweights, order):
    """Match each vertex to its heaviest unmatched neighbor.

    Vertices are visited in the given order; ties go to the smallest
    neighbor id (adjacency lists are sorted). Unmatched vertices are
    matched to themselves.
    """
    n = indptr.shape[0] - 1
    match = np.full(n, -1, dtype=np.int64)
    for idx in range(n):
        u = order[idx]
        if match[u] >= 0:
            continue
        best = -1
        bw = np.int64(-1)
        for k in range(indptr[u], indptr[u + 1]):
            v = indices[k]
            if v == u or match[v] >= 0:
                continue
            w = eweights[k]
            if w > bw:
                bw = w
                best = v
        if best >= 0:
            match[u] = best
            match[best] = u
        else:
            match[u] = u
    return match


@njit(cache=True)
def cut_weight(indptr, indices, eweights, labels):
    tot = np.int64(0)
    n = indptr.shape[0] - 1
    for v in range(n):
        for k in range(indptr[v], indptr[v + 1]):
            if labels[v] != labels[indices[k]]:
                tot += eweights[k]
    return tot // 2


@njit(cache=True)
def bfs_grow_bisection(indptr, indices, vweights, start, target_w0):
    """Seed block 0 by BFS from start until its weight reaches target.

    Jumps to the smallest-id unvisited vertex when a component is
    exhausted, so disconnected graphs still fill up block 0.
    """
    n = indptr.shape[0] - 1
    labels = np.ones(n, dtype=np.int8)
    visited = np.zeros(n, dtype=np.bool_)
    queue = np.empty(n, dtype=np.int64)
    qh = 0
    qt = 1
    queue[0] = start
    visited[start] = True
    w0 = np.int64(0)
    next_scan = 0
    while w0 < target_w0:
        if qh == qt:
            while next_scan < n and visited[next_scan]:
                next_scan += 1
            if next_scan == n:
                break
            visited[next_scan] = True
            queue[qt] = next_scan
            qt += 1
            continue
        v = queue[qh]
        qh += 1
        labels[v] = 0
        w0 += vweights[v]
        for k in range(indptr[v], indptr[v + 1]):
            u = indices[k]
            if not visited[u]:
                visited[u] = True
                queue[qt] = u
                qt += 1
    return labels


@njit(cache=True)
def _block_weight0(vweights, labels):
    w0 = np.int64(0)
    for v in range(labels.shape[0]):
        if labels[v] == 0:
            w0 += vweights[v]
    return w0


@njit(cache=True)
def _repair_balance(indptr, indices, eweights, vweights, labels, min_w0, max_w0):
    """Greedy single moves until block-0 weight is inside [min, max]."""
    n = labels.shape[0]
    w0 = _block_weight0(vweights, labels)
    guard = 0
    while (w0 > max_w0 or w0 < min_w0) and guard <= n:
        guard += 1
        src = 0 if w0 > max_w0 else 1
        best = -1
        best_gain = np.int64(-(1 << 60))
        for v in range(n):
            if labels[v] != src:
                continue
            g = np.int64(0)
            for k in range(indptr[v], indptr[v + 1]):
                if labels[indices[k]] == src:
                    g -= eweights[k]
                else:
                    g += eweights[k]
            if g > best_gain:
                best_gain = g
                best = v
        if best < 0:
            break
        labels[best] = 1 - src
        w0 += vweights[best] if src == 1 else -vweights[best]
    return w0


@njit(cache=True)
def fm_refine(indptr, indices, eweights, vweights, labels, min_w0, max_w0, max_passes):
    """Fiduccia-Mattheyses style boundary refinement, in place.

    Integer edge weights; nodes move at most once per pass; the pass is
    rolled back to its best prefix. Moves that leave block-0 weight
    outside [min_w0, max_w0] are skipped. Returns the final cut weight.
    """
    n = labels.shape[0]
    w0 = _repair_balance(indptr, indices, eweights, vweights, labels, min_w0, max_w0)
    cut = cut_weight(indptr, indices, eweights, labels)

    gmax = np.int64(0)
    for v in range(n):
        s = np.int64(0)
        for k in range(indptr[v], indptr[v + 1]):
            s += eweights[k]
        if s > gmax:
            gmax = s
    nbuckets = 2 * gmax + 1

    gain = np.empty(n, dtype=np.int64)
    head = np.empty(nbuckets, dtype=np.int64)
    nxt = np.empty(n, dtype=np.int64)
    prv = np.empty(n, dtype=np.int64)
    locked = np.empty(n, dtype=np.bool_)
    moves = np.empty(n, dtype=np.int64)

    for _ in range(max_passes):
        for b in range(nbuckets):
            head[b] = -1
        for v in range(n):
            locked[v] = False
            g = np.int64(0)
            for k in range(indptr[v], indptr[v + 1]):
                if labels[indices[k]] == labels[v]:
                    g -= eweights[k]
                else:
                    g += eweights[k]
            gain[v] = g
        # insert in descending id so list heads are the smallest ids
        for v in range(n - 1, -1, -1):
            b = gain[v] + gmax
            nxt[v] = head[b]
            prv[v] = -1
            if head[b] >= 0:
                prv[head[b]] = v
            head[b] = v
        maxptr = nbuckets - 1

        n_moves = 0
        best_idx = -1
        best_cut = cut
        cur_cut = cut
        cur_w0 = w0
        while True:
            # highest-gain feasible unlocked node
            chosen = np.int64(-1)
            b = maxptr
            while b >= 0:
                v = head[b]
                while v >= 0:
                    if labels[v] == 0:
                        nw0 = cur_w0 - vweights[v]
                    else:
                        nw0 = cur_w0 + vweights[v]
                    if nw0 >= min_w0 and nw0 <= max_w0:
                        chosen = v
                        break
                    v = nxt[v]
                if chosen >= 0:
                    break
                b -= 1
            if chosen < 0:
                break
            maxptr = b
            v = chosen
            # unlink
            if prv[v] >= 0:
                nxt[prv[v]] = nxt[v]
            else:
                head[gain[v] + gmax] = nxt[v]
            if nxt[v] >= 0:
                prv[nxt[v]] = prv[v]
            locked[v] = True
            old = labels[v]
            labels[v] = 1 - old
            cur_w0 += vweights[v] if old == 1 else -vweights[v]
            cur_cut -= gain[v]
            moves[n_moves] = v
            n_moves += 1
            if cur_cut < best_cut:
                best_cut = cur_cut
                best_idx = n_moves - 1
            for k in range(indptr[v], indptr[v + 1]):
                w = indices[k]
                if locked[w] or w == v:
                    continue
                if labels[w] == labels[v]:
                    ng = gain[w] - 2 * eweights[k]
                else:
                    ng = gain[w] + 2 * eweights[k]
                if ng == gain[w]:
                    continue
                # move w between buckets
                if prv[w] >= 0:
                    nxt[prv[w]] = nxt[w]
                else:
                    head[gain[w] + gmax] = nxt[w]
                if nxt[w] >= 0:
                    prv[nxt[w]] = prv[w]
                gain[w] = ng
                bb = ng + gmax
                nxt[w] = head[bb]
                prv[w] = -1
                if head[bb] >= 0:
                    prv[head[bb]] = w
                head[bb] = w
                if bb > maxptr:
                    maxptr = bb
        # roll back past the best prefix
        for t in range(n_moves - 1, best_idx, -1):
            v = moves[t]
            old = labels[v]
            labels[v] = 1 - old
            cur_w0 += vweights[v] if old == 1 else -vweights[v]
        w0 = cur_w0
        improved = best_cut < cut
        cut = best_cut if best_idx >= 0 else cut
        if not improved:
            break
    return cut


@njit(cache=True)
def modularity_refine_run(indptr, indices, degrees, labels, picks):
    """Attempt single-node block flips, keeping strict modularity gains.

    picks holds the pre-drawn node per attempt. Moves that would empty
    a block are skipped. Returns the number of accepted moves.
    """
    n = labels.shape[0]
    two_m = indptr[n]
    if two_m == 0:
        return 0
    m = two_m / 2.0
    d_block = np.zeros(2, dtype=np.int64)
    size = np.zeros(2, dtype=np.int64)
    for v in range(n):
        d_block[labels[v]] += degrees[v]
        size[labels[v]] += 1
    accepted = 0
    for t in range(picks.shape[0]):
        v = picks[t]
        c = labels[v]
        if size[c] <= 1:
            continue
        d_same = np.int64(0)
        d_other = np.int64(0)
        for k in range(indptr[v], indptr[v + 1]):
            if labels[indices[k]] == c:
                d_same += 1
            else:
                d_other += 1
        kv = degrees[v]
        dq = (d_other - d_same) / m - kv * (
            d_block[1 - c] - d_block[c] + kv
        ) / (2.0 * m * m)
        if dq > 0.0:
            labels[v] = 1 - c
            d_block[c] -= kv
            d_block[1 - c] += kv
            size[c] -= 1
            size[1 - c] += 1
            accepted += 1
    return accepted
