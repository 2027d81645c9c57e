"""Random graph generators sized for benchmarks and simulations.

Vectorized constructions that stay fast at 10^6 nodes; duplicate edges
arising from rewiring / repeated attachment are merged by Graph itself.
"""

from __future__ import annotations

import numpy as np

from .graph import Graph


def watts_strogatz(n: int, k: int, beta: float, seed: int) -> Graph:
    """Small-world graph: ring lattice with k neighbors, rewired with prob beta.

    Each lattice edge's far endpoint is replaced by a uniform random node
    with probability beta (self-loops re-drawn); unlike the textbook
    construction, a rewire may duplicate an existing edge, which the Graph
    constructor then merges — a negligible difference at the sizes used.
    """
    if n < 3:
        raise ValueError("need n >= 3")
    if k < 2 or k % 2 or k >= n:
        raise ValueError("k must be even, >= 2 and < n")
    if not 0 <= beta <= 1:
        raise ValueError("beta must lie in [0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    base = np.arange(n, dtype=np.int64)
    us = []
    vs = []
    for off in range(1, k // 2 + 1):
        us.append(base)
        vs.append((base + off) % n)
    u = np.concatenate(us)
    v = np.concatenate(vs)
    rewire = rng.random(u.size) < beta
    count = int(rewire.sum())
    if count:
        repl = rng.integers(0, n, size=count)
        bad = repl == u[rewire]
        while bad.any():
            repl[bad] = rng.integers(0, n, size=int(bad.sum()))
            bad = repl == u[rewire]
        v = v.copy()
        v[rewire] = repl
    return Graph.from_edges(u, v, node_count=n)


def barabasi_albert(n: int, m: int, seed: int) -> Graph:
    """Scale-free graph by preferential attachment (m edges per new node)."""
    if m < 1 or m >= n:
        raise ValueError("need 1 <= m < n")
    rng = np.random.Generator(np.random.PCG64(seed))
    # endpoint pool: every edge endpoint appears once, so sampling the pool
    # is sampling proportional to degree
    pool = np.empty(2 * m * (n - m), dtype=np.int64)
    pool_size = 0
    us = np.empty(m * (n - m), dtype=np.int64)
    vs = np.empty(m * (n - m), dtype=np.int64)
    e = 0
    for new in range(m, n):
        if pool_size == 0:
            targets = np.arange(m)
        else:
            targets = np.empty(m, dtype=np.int64)
            chosen: set[int] = set()
            for i in range(m):
                t = int(pool[int(rng.integers(0, pool_size))])
                while t in chosen:
                    t = int(pool[int(rng.integers(0, pool_size))])
                chosen.add(t)
                targets[i] = t
        for t in targets:
            us[e] = new
            vs[e] = t
            e += 1
            pool[pool_size] = new
            pool[pool_size + 1] = t
            pool_size += 2
    return Graph.from_edges(us[:e], vs[:e], node_count=n)
