"""Numpy fallback for the hot kernels.

Semantics match the compiled backend in ``_ckern.pyx``; only the ordering
of nodes *within* one BFS level may differ (this backend emits each level
sorted, the compiled one emits adjacency order).  Callers that need a
reproducible order sort the results themselves.

Visited state is epoch-stamped: a node is visited in the current search
iff ``stamp[node] == epoch``.  Callers own the epoch bookkeeping.
"""

from __future__ import annotations

import numpy as np


def _expand(indptr, indices, frontier):
    """Gather the concatenated neighbor lists of ``frontier`` (CSR rows)."""
    starts = indptr[frontier]
    lens = indptr[frontier + 1] - starts
    total = int(lens.sum())
    if total == 0:
        return np.empty(0, dtype=indices.dtype)
    cum = np.cumsum(lens)
    idx = np.arange(total, dtype=np.int64) - np.repeat(cum - lens, lens) + np.repeat(starts, lens)
    return indices[idx]


def bfs_ball(indptr, indices, source, h, stamp, queue, epoch):
    """BFS from ``source`` up to depth ``h``; returns the ball size.

    Visited nodes are written to ``queue[:count]`` grouped by level.
    """
    stamp[source] = epoch
    queue[0] = source
    count = 1
    frontier = np.array([source], dtype=np.int32)
    for _ in range(h):
        nbr = _expand(indptr, indices, frontier)
        nbr = nbr[stamp[nbr] != epoch]
        if nbr.size == 0:
            break
        nbr = np.unique(nbr)
        stamp[nbr] = epoch
        queue[count : count + nbr.size] = nbr
        count += nbr.size
        frontier = nbr
    return count


def bfs_ball_levels(indptr, indices, source, h, stamp, queue, epoch, cum):
    """Like ``bfs_ball`` but also fills ``cum[d]`` = #nodes at distance <= d."""
    stamp[source] = epoch
    queue[0] = source
    count = 1
    cum[0] = 1
    frontier = np.array([source], dtype=np.int32)
    for depth in range(1, h + 1):
        nbr = _expand(indptr, indices, frontier)
        nbr = nbr[stamp[nbr] != epoch]
        if nbr.size == 0:
            cum[depth:] = count
            return count
        nbr = np.unique(nbr)
        stamp[nbr] = epoch
        queue[count : count + nbr.size] = nbr
        count += nbr.size
        cum[depth] = count
        frontier = nbr
    return count


def bfs_multi(indptr, indices, sources, h, stamp, queue, epoch):
    """Multi-source BFS: all sources enter at depth 0. Returns the union size."""
    frontier = np.unique(np.asarray(sources, dtype=np.int32))
    stamp[frontier] = epoch
    queue[: frontier.size] = frontier
    count = frontier.size
    for _ in range(h):
        nbr = _expand(indptr, indices, frontier)
        nbr = nbr[stamp[nbr] != epoch]
        if nbr.size == 0:
            break
        nbr = np.unique(nbr)
        stamp[nbr] = epoch
        queue[count : count + nbr.size] = nbr
        count += nbr.size
        frontier = nbr
    return count


def vicinity_size_table(indptr, indices, h_max, out):
    """Fill ``out[d-1][v]`` with the size of v's depth-d ball, d = 1..h_max."""
    node_count = indptr.shape[0] - 1
    stamp = np.zeros(node_count, dtype=np.uint32)
    queue = np.empty(node_count, dtype=np.int32)
    cum = np.empty(h_max + 1, dtype=np.int64)
    for v in range(node_count):
        bfs_ball_levels(indptr, indices, v, h_max, stamp, queue, np.uint32(v + 1), cum)
        out[:, v] = cum[1:]


def density_pass(indptr, indices, nodes, h, mask_a, mask_b, mask_u, out, stamp, queue, epoch):
    """Per reference node: one BFS counting ball size and event memberships.

    ``out`` has one row per node: [ball size, count_a, count_b, count_u].
    ``mask_u`` may be empty, in which case count_u is left at 0.
    Returns the first unused epoch.
    """
    with_u = mask_u.size > 0
    for i, r in enumerate(nodes):
        count = bfs_ball(indptr, indices, int(r), h, stamp, queue, np.uint32(epoch))
        ball = queue[:count]
        out[i, 0] = count
        out[i, 1] = np.count_nonzero(mask_a[ball])
        out[i, 2] = np.count_nonzero(mask_b[ball])
        out[i, 3] = np.count_nonzero(mask_u[ball]) if with_u else 0
        epoch += 1
    return epoch


def eligible(indptr, indices, source, h, event_mask, stamp, queue, epoch):
    """True iff some node of ``event_mask`` lies within depth ``h`` of source."""
    if event_mask[source]:
        return True
    stamp[source] = epoch
    frontier = np.array([source], dtype=np.int32)
    for _ in range(h):
        nbr = _expand(indptr, indices, frontier)
        nbr = nbr[stamp[nbr] != epoch]
        if nbr.size == 0:
            return False
        nbr = np.unique(nbr)
        if event_mask[nbr].any():
            return True
        stamp[nbr] = epoch
        frontier = nbr
    return False


_BLOCK = 256


def kendall_s(num_a, den_a, num_b, den_b):
    """Concordance sum over all pairs i < j, with exact rational comparison.

    Each value is num/den; comparison of values i, j is done on the integer
    cross products num_i*den_j vs num_j*den_i (denominators are positive).
    """
    n = num_a.shape[0]
    s = 0
    cols = np.arange(n, dtype=np.int64)
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        xa = num_a[i0:i1, None] * den_a[None, :] - num_a[None, :] * den_a[i0:i1, None]
        xb = num_b[i0:i1, None] * den_b[None, :] - num_b[None, :] * den_b[i0:i1, None]
        prod = np.sign(xa) * np.sign(xb)
        upper = cols[None, :] > np.arange(i0, i1, dtype=np.int64)[:, None]
        s += int(prod[upper].sum())
    return s


def weighted_sums(num_a, den_a, num_b, den_b, u):
    """Pair sums for the weighted concordance estimator.

    Returns (sum of c_ij * u_i * u_j, sum of u_i * u_j) over pairs i < j,
    where c_ij is the concordance sign of the pair.
    """
    n = num_a.shape[0]
    wnum = 0.0
    wden = 0.0
    cols = np.arange(n, dtype=np.int64)
    for i0 in range(0, n, _BLOCK):
        i1 = min(i0 + _BLOCK, n)
        xa = num_a[i0:i1, None] * den_a[None, :] - num_a[None, :] * den_a[i0:i1, None]
        xb = num_b[i0:i1, None] * den_b[None, :] - num_b[None, :] * den_b[i0:i1, None]
        uu = u[i0:i1, None] * u[None, :]
        upper = cols[None, :] > np.arange(i0, i1, dtype=np.int64)[:, None]
        wnum += float((np.sign(xa) * np.sign(xb) * uu)[upper].sum())
        wden += float(uu[upper].sum())
    return wnum, wden
