"""Reference-node sampling strategies.

All strategies draw from the h-vicinity of the combined event nodes (never
from "out of sight" regions whose vicinities contain no event), and all are
deterministic given (graph, events, h, n, seed): candidate pools are sorted
before drawing, so results are identical across kernel backends.

  * batch-bfs   — enumerate the whole vicinity with one multi-source BFS,
                  then draw uniformly without replacement.
  * rejection   — the uniform one-trial primitive: pick an event node
                  proportional to its vicinity size, a node uniform inside
                  that vicinity, and accept with probability 1/overlap.
                  Kept for its exactly-uniform acceptance distribution.
  * importance  — rejection's proposal without the rejection step: draws
                  land with probability |V_r^h ∩ events| / N_sum, recorded
                  per node so a weight-corrected estimator can be used.
                  Optionally takes several nodes per visited vicinity.
  * whole-graph — uniform node draws over the full graph, filtered by an
                  eligibility BFS (any event within h hops).

RNG is numpy's PCG64 throughout; the generator name is recorded in each
sample for cross-build reproducibility.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import bfs_ball, eligible
from .errors import TescError
from .graph import BfsScratch, EventSet, Graph, batch_bfs
from .vicinity import VicinityIndex

RNG_NAME = "pcg64"

#: importance-sampling nodes taken per visited vicinity, by level; beyond
#: level 3 the level-3 value applies
_BATCH_K_DEFAULTS = {1: 1, 2: 3, 3: 6}

#: give up on finding new distinct nodes after this many consecutive
#: duplicate draws per requested node (the population is likely exhausted)
_STALL_FACTOR = 100


def default_batch_k(h: int) -> int:
    return _BATCH_K_DEFAULTS.get(h, _BATCH_K_DEFAULTS[3])


@dataclass
class ReferenceSample:
    """Sampled reference nodes with provenance.

    In importance mode, ``overlap_counts`` / ``probabilities`` are filled
    lazily: the overlap of each reference vicinity with the event set falls
    out of the same BFS that computes event densities, so the engine fills
    them there.  ``fill_probabilities`` computes them standalone.
    """

    nodes: np.ndarray
    weights: np.ndarray
    mode: str  # "uniform" | "importance"
    h: int
    seed: int
    n_prime: int
    exhausted: bool = False  # the full reference population was returned
    population_size: int | None = None  # N, exact (enumerating samplers only)
    population_estimate: float | None = None  # N̂ (whole-graph sampler)
    n_sum: int | None = None  # importance mode: sum of event vicinity sizes
    overlap_counts: np.ndarray | None = None  # importance: |V_r^h ∩ events|
    discarded: int = 0  # whole-graph: ineligible draws
    bfs_calls: int = 0
    rng_name: str = RNG_NAME
    warnings: list[str] = field(default_factory=list)

    @property
    def n(self) -> int:
        return int(self.nodes.size)

    @property
    def probabilities(self) -> np.ndarray | None:
        if self.overlap_counts is None or self.n_sum is None:
            return None
        return self.overlap_counts / self.n_sum


def _as_nodes(events) -> np.ndarray:
    if isinstance(events, EventSet):
        return events.nodes
    return np.ascontiguousarray(events, dtype=np.int32)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _draw_without_replacement(rng: np.random.Generator, pool: np.ndarray, k: int) -> np.ndarray:
    """Partial Fisher-Yates shuffle: k uniform draws without replacement."""
    arr = pool.copy()
    n = arr.size
    for i in range(k):
        j = int(rng.integers(i, n))
        arr[i], arr[j] = arr[j], arr[i]
    return arr[:k]


def sample_batch_bfs(
    g: Graph, events, h: int, n: int, seed: int, scratch: BfsScratch | None = None
) -> ReferenceSample:
    """Enumerate the combined h-vicinity, then sample uniformly from it.

    If the vicinity has no more than n nodes it is returned whole (flagged
    ``exhausted``); the statistic downstream is then exact rather than
    estimated.
    """
    nodes = _as_nodes(events)
    if n < 2:
        raise ValueError("need n >= 2")
    vicinity = batch_bfs(g, nodes, h, scratch)
    pop = int(vicinity.size)
    if pop < 2:
        raise TescError(f"reference population has {pop} node(s); no pairs to compare")
    rng = _rng(seed)
    if pop <= n:
        sample = vicinity.copy()
        exhausted = True
    else:
        sample = _draw_without_replacement(rng, vicinity, n)
        exhausted = False
    return ReferenceSample(
        nodes=sample,
        weights=np.ones(sample.size, dtype=np.int64),
        mode="uniform",
        h=h,
        seed=seed,
        n_prime=int(sample.size),
        exhausted=exhausted,
        population_size=pop,
        bfs_calls=1,
    )


def _size_prefix(index: VicinityIndex, h: int, event_nodes: np.ndarray) -> tuple[np.ndarray, int]:
    sizes = index.level(h)[event_nodes].astype(np.int64)
    cum = np.cumsum(sizes)
    return cum, int(cum[-1])


def _pick_proportional(rng: np.random.Generator, cum: np.ndarray, total: int) -> int:
    """Index i with probability (cum[i] - cum[i-1]) / total, exactly."""
    x = int(rng.integers(0, total))
    return int(np.searchsorted(cum, x, side="right"))


def reject_samp(
    g: Graph,
    events,
    index: VicinityIndex,
    h: int,
    rng: np.random.Generator,
    scratch: BfsScratch | None = None,
) -> int | None:
    """One uniform-sampling trial over the combined h-vicinity.

    Picks event node v with probability |V_v^h|/N_sum, then u uniform in
    V_v^h, then accepts with probability 1/|V_u^h ∩ events| (one extra BFS).
    Accepted nodes are exactly uniform over the vicinity; a trial succeeds
    with probability N/N_sum overall.  Returns the node or None on failure.
    """
    event_nodes = _as_nodes(events)
    if event_nodes.size == 0:
        raise ValueError("events must be non-empty")
    s = scratch or g.scratch()
    cum, n_sum = _size_prefix(index, h, event_nodes)

    v = int(event_nodes[_pick_proportional(rng, cum, n_sum)])
    count = bfs_ball(g.indptr, g.indices, v, h, s.stamp, s.queue, s.take())
    ball = np.sort(s.queue[:count])
    u = int(ball[int(rng.integers(0, count))])

    mask = _event_mask(g, event_nodes)
    count_u = bfs_ball(g.indptr, g.indices, u, h, s.stamp, s.queue, s.take())
    c = int(np.count_nonzero(mask[s.queue[:count_u]]))
    if int(rng.integers(0, c)) == 0:
        return u
    return None


def _event_mask(g: Graph, event_nodes: np.ndarray) -> np.ndarray:
    mask = np.zeros(g.node_count, dtype=np.uint8)
    mask[event_nodes] = 1
    return mask


def sample_importance(
    g: Graph,
    events,
    index: VicinityIndex,
    h: int,
    n: int,
    batch_k: int | None = None,
    seed: int = 0,
    scratch: BfsScratch | None = None,
) -> ReferenceSample:
    """Size-proportional vicinity sampling without rejection.

    Repeats (pick event node v proportional to |V_v^h|, BFS once, take
    batch_k distinct nodes uniformly from V_v^h) until n distinct reference
    nodes are collected; re-drawn nodes bump their weight instead.  The
    final batch is kept whole, so up to batch_k - 1 extra distinct nodes
    may be returned.
    """
    event_nodes = _as_nodes(events)
    if event_nodes.size == 0:
        raise ValueError("events must be non-empty")
    if n < 2:
        raise ValueError("need n >= 2")
    if batch_k is None:
        batch_k = default_batch_k(h)
    if batch_k < 1:
        raise ValueError("batch_k must be >= 1")
    s = scratch or g.scratch()
    rng = _rng(seed)
    cum, n_sum = _size_prefix(index, h, event_nodes)

    order: list[int] = []
    weight: dict[int, int] = {}
    bfs_calls = 0
    draws = 0
    draws_at_last_new = 0
    exhausted = False
    stall_limit = _STALL_FACTOR * n
    while len(order) < n:
        if draws - draws_at_last_new >= stall_limit:
            # no new distinct node for a long stretch: population < n
            exhausted = True
            break
        v = int(event_nodes[_pick_proportional(rng, cum, n_sum)])
        count = bfs_ball(g.indptr, g.indices, v, h, s.stamp, s.queue, s.take())
        ball = np.sort(s.queue[:count])
        bfs_calls += 1
        take = min(batch_k, count)
        picks = _draw_without_replacement(rng, ball, take) if take < count else ball
        for r in picks:
            r = int(r)
            draws += 1
            if r in weight:
                weight[r] += 1
            else:
                weight[r] = 1
                order.append(r)
                draws_at_last_new = draws

    if len(order) < 2:
        raise TescError("reference population appears to have fewer than 2 nodes")
    nodes = np.array(order, dtype=np.int32)
    weights = np.array([weight[r] for r in order], dtype=np.int64)
    return ReferenceSample(
        nodes=nodes,
        weights=weights,
        mode="importance",
        h=h,
        seed=seed,
        n_prime=draws,
        exhausted=exhausted,
        n_sum=n_sum,
        bfs_calls=bfs_calls,
    )


def fill_probabilities(
    g: Graph, sample: ReferenceSample, events, scratch: BfsScratch | None = None
) -> None:
    """Compute per-node selection probabilities of an importance sample.

    One h-hop BFS per reference node; the engine avoids this extra pass by
    counting the overlap inside its density BFS instead.
    """
    if sample.mode != "importance":
        return
    event_nodes = _as_nodes(events)
    mask = _event_mask(g, event_nodes)
    s = scratch or g.scratch()
    counts = np.empty(sample.n, dtype=np.int64)
    for i, r in enumerate(sample.nodes):
        count = bfs_ball(g.indptr, g.indices, int(r), sample.h, s.stamp, s.queue, s.take())
        counts[i] = np.count_nonzero(mask[s.queue[:count]])
    sample.overlap_counts = counts


def sample_whole_graph(
    g: Graph, events, h: int, n: int, seed: int, scratch: BfsScratch | None = None
) -> ReferenceSample:
    """Uniform draws over all nodes, filtered by event visibility.

    Nodes are drawn without replacement; each is kept iff its h-vicinity
    contains an event node (BFS with early exit).  Kept nodes are uniform
    over the combined event vicinity.  Expected discards grow like
    n * node_count / N - n, so this pays off only when the vicinity covers
    much of the graph.
    """
    event_nodes = _as_nodes(events)
    if event_nodes.size == 0:
        raise ValueError("events must be non-empty")
    if n < 2:
        raise ValueError("need n >= 2")
    s = scratch or g.scratch()
    rng = _rng(seed)
    mask = _event_mask(g, event_nodes)

    pool = np.arange(g.node_count, dtype=np.int32)
    kept: list[int] = []
    discarded = 0
    bfs_calls = 0
    for i in range(pool.size):
        if len(kept) >= n:
            break
        j = int(rng.integers(i, pool.size))
        pool[i], pool[j] = pool[j], pool[i]
        v = int(pool[i])
        bfs_calls += 1
        if eligible(g.indptr, g.indices, v, h, mask, s.stamp, s.queue, s.take()):
            kept.append(v)
        else:
            discarded += 1

    if len(kept) < 2:
        raise TescError("fewer than 2 eligible reference nodes in the whole graph")
    exhausted = len(kept) < n
    draws = len(kept) + discarded
    estimate = len(kept) / draws * g.node_count if draws else None
    return ReferenceSample(
        nodes=np.array(kept, dtype=np.int32),
        weights=np.ones(len(kept), dtype=np.int64),
        mode="uniform",
        h=h,
        seed=seed,
        n_prime=len(kept),
        exhausted=exhausted,
        population_size=len(kept) if exhausted else None,
        population_estimate=float(estimate) if estimate is not None else None,
        discarded=discarded,
        bfs_calls=bfs_calls,
    )
