"""Synthetic correlated-event generation and the recall evaluation harness.

Positive pairs are built in linked fashion: each event-a node gets a
companion event-b node at a random hop distance drawn from a clipped,
rounded half-normal whose variance equals the target vicinity level, so b
always occurs within sight of a.  Negative pairs place every b node at
least h+1 hops from every a node.  Noise then breaks links (positive) or
re-attaches b nodes near a (negative) with a given probability.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np

from ._kernels import bfs_ball, bfs_ball_levels
from .engine import TestConfig, test_correlation
from .errors import DegenerateTieError, SimulationError, TescError
from .graph import EventSet, Graph, batch_bfs

POLARITIES = ("positive", "negative")


@dataclass(frozen=True)
class SimPairSpec:
    m: int  # |V_a| = |V_b|
    h: int  # target vicinity level
    polarity: str  # "positive" | "negative"
    noise_p: float = 0.0
    seed: int = 0

    def validate(self) -> None:
        if self.m < 1:
            raise ValueError("m must be >= 1")
        if self.h < 1:
            raise ValueError("h must be >= 1")
        if self.polarity not in POLARITIES:
            raise ValueError(f"polarity must be one of {POLARITIES}")
        if not 0 <= self.noise_p <= 1:
            raise ValueError("noise_p must lie in [0, 1]")


@dataclass
class SimulatedPair:
    a: EventSet
    b: EventSet
    spec: SimPairSpec
    links: list[tuple[int, int]] | None = None  # positive pairs: (a node, b node)
    fallback_count: int = 0  # b-node placements short of the drawn distance
    broken_count: int = 0  # noise: links broken / b nodes re-attached
    stats: dict[str, Any] = field(default_factory=dict)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _uniform_nodes(rng: np.random.Generator, pool: np.ndarray, m: int) -> np.ndarray:
    if pool.size < m:
        raise SimulationError(f"need {m} nodes but only {pool.size} available")
    arr = pool.copy()
    n = arr.size
    for i in range(m):
        j = int(rng.integers(i, n))
        arr[i], arr[j] = arr[j], arr[i]
    return arr[:m]


def draw_link_distances(rng: np.random.Generator, h: int, size: int) -> np.ndarray:
    """Companion-node hop distances: round |Normal(0, var=h)|, clipped to h."""
    x = rng.normal(0.0, math.sqrt(h), size)
    return np.minimum(np.rint(np.abs(x)).astype(np.int64), h)


def link_distance_pmf(h: int) -> np.ndarray:
    """Closed-form bin probabilities of ``draw_link_distances``."""
    sd = math.sqrt(h)

    def phi(x: float) -> float:
        return 0.5 * (1.0 + math.erf(x / (sd * math.sqrt(2.0))))

    def half_cdf(x: float) -> float:  # CDF of |Normal(0, h)|
        return 2.0 * phi(x) - 1.0

    pmf = np.empty(h + 1)
    pmf[0] = half_cdf(0.5)
    for d in range(1, h):
        pmf[d] = half_cdf(d + 0.5) - half_cdf(d - 0.5)
    pmf[h] = 1.0 - half_cdf(h - 0.5)
    return pmf


def gen_positive_pair(g: Graph, spec: SimPairSpec) -> SimulatedPair:
    """Linked positive pair: every a node gets a b node within spec.h hops.

    The companion is uniform among nodes at exactly the drawn distance; when
    that frontier is empty (small component), the nearest non-empty frontier
    below it is used and counted as a fallback.  Companion collisions are
    allowed - V_b is the resulting set.
    """
    spec.validate()
    if spec.polarity != "positive":
        raise ValueError("spec.polarity must be 'positive'")
    rng = _rng(spec.seed)
    scratch = g.scratch()
    a_nodes = _uniform_nodes(rng, np.arange(g.node_count, dtype=np.int32), spec.m)
    distances = draw_link_distances(rng, spec.h, spec.m)

    cum = np.empty(spec.h + 1, dtype=np.int64)
    links: list[tuple[int, int]] = []
    fallbacks = 0
    for v, d in zip(a_nodes, distances):
        v = int(v)
        d = int(d)
        if d == 0:
            links.append((v, v))
            continue
        bfs_ball_levels(
            g.indptr, g.indices, v, d, scratch.stamp, scratch.queue, scratch.take(), cum[: d + 1]
        )
        dd = d
        while dd > 0 and cum[dd] == cum[dd - 1]:
            dd -= 1
        if dd != d:
            fallbacks += 1
        if dd == 0:
            links.append((v, v))
            continue
        frontier = np.sort(scratch.queue[cum[dd - 1] : cum[dd]].copy())
        links.append((v, int(frontier[int(rng.integers(0, frontier.size))])))

    b_nodes = sorted({b for _, b in links})
    return SimulatedPair(
        a=EventSet("sim-a", a_nodes),
        b=EventSet("sim-b", np.array(b_nodes, dtype=np.int64)),
        spec=spec,
        links=links,
        fallback_count=fallbacks,
    )


def gen_negative_pair(g: Graph, spec: SimPairSpec) -> SimulatedPair:
    """Repulsion pair: every b node at least spec.h + 1 hops from every a node."""
    spec.validate()
    if spec.polarity != "negative":
        raise ValueError("spec.polarity must be 'negative'")
    rng = _rng(spec.seed)
    a_nodes = _uniform_nodes(rng, np.arange(g.node_count, dtype=np.int32), spec.m)
    vicinity = batch_bfs(g, a_nodes, spec.h)
    outside = np.setdiff1d(np.arange(g.node_count, dtype=np.int32), vicinity, assume_unique=True)
    if outside.size < spec.m:
        raise SimulationError(
            f"only {outside.size} nodes lie outside the level-{spec.h} vicinity "
            f"of event a; need {spec.m}"
        )
    b_nodes = _uniform_nodes(rng, outside, spec.m)
    return SimulatedPair(
        a=EventSet("sim-a", a_nodes),
        b=EventSet("sim-b", b_nodes),
        spec=spec,
    )


def add_noise(g: Graph, pair: SimulatedPair, p: float, seed: int) -> SimulatedPair:
    """Perturb a noise-free pair with independent per-node noise level p.

    Positive pairs: each a-b link breaks with probability p and the b node
    is relocated uniformly outside a's vicinity.  Negative pairs: each b
    node, with probability p, is re-attached to a uniform node within h
    hops of a uniform a node.
    """
    if not 0 <= p <= 1:
        raise ValueError("noise level must lie in [0, 1]")
    if p == 0:
        return pair
    rng = _rng(seed)
    spec = pair.spec
    h = spec.h
    if spec.polarity == "positive":
        if pair.links is None:
            raise SimulationError("positive pair lost its link metadata; cannot add noise")
        vicinity = batch_bfs(g, pair.a.nodes, h)
        outside = np.setdiff1d(
            np.arange(g.node_count, dtype=np.int32), vicinity, assume_unique=True
        )
        if outside.size == 0:
            raise SimulationError("no nodes outside event a's vicinity to relocate to")
        broken = rng.random(len(pair.links)) < p
        new_b: set[int] = set()
        for (a_node, b_node), brk in zip(pair.links, broken):
            if brk:
                new_b.add(int(outside[int(rng.integers(0, outside.size))]))
            else:
                new_b.add(b_node)
        return SimulatedPair(
            a=pair.a,
            b=EventSet("sim-b", np.array(sorted(new_b), dtype=np.int64)),
            spec=replace(spec, noise_p=p),
            links=None,
            fallback_count=pair.fallback_count,
            broken_count=int(broken.sum()),
        )

    # negative: re-attach selected b nodes near event a
    scratch = g.scratch()
    moved = rng.random(pair.b.nodes.size) < p
    new_b = set()
    for b_node, mv in zip(pair.b.nodes, moved):
        if not mv:
            new_b.add(int(b_node))
            continue
        anchor = int(pair.a.nodes[int(rng.integers(0, pair.a.nodes.size))])
        count = bfs_ball(g.indptr, g.indices, anchor, h, scratch.stamp, scratch.queue, scratch.take())
        ball = np.sort(scratch.queue[:count].copy())
        new_b.add(int(ball[int(rng.integers(0, count))]))
    return SimulatedPair(
        a=pair.a,
        b=EventSet("sim-b", np.array(sorted(new_b), dtype=np.int64)),
        spec=replace(spec, noise_p=p),
        broken_count=int(moved.sum()),
    )


def generate_pair(g: Graph, spec: SimPairSpec) -> SimulatedPair:
    """Generate a pair at spec.noise_p (noise applied after construction)."""
    base = replace(spec, noise_p=0.0)
    pair = gen_positive_pair(g, base) if spec.polarity == "positive" else gen_negative_pair(g, base)
    if spec.noise_p > 0:
        pair = add_noise(g, pair, spec.noise_p, derive_pair_seed(spec.seed, "noise"))
    return pair


def derive_pair_seed(seed: int, *tags) -> int:
    """Deterministic sub-seed derivation from a master seed and tags."""
    parts = [seed]
    for tag in tags:
        if isinstance(tag, str):
            parts.extend(tag.encode("utf-8"))
        else:
            parts.append(int(tag))
    return int(np.random.SeedSequence(parts).generate_state(1, np.uint64)[0])


@dataclass
class RecallCell:
    h: int
    noise: float
    polarity: str
    tested: int
    detected: int
    errors: int
    undetermined: int

    @property
    def recall(self) -> float:
        return self.detected / self.tested if self.tested else float("nan")

    def to_dict(self) -> dict[str, Any]:
        return {
            "h": self.h,
            "noise": self.noise,
            "polarity": self.polarity,
            "tested": self.tested,
            "detected": self.detected,
            "errors": self.errors,
            "undetermined": self.undetermined,
            "recall": self.recall,
        }


def recall_experiment(
    g: Graph,
    *,
    m: int,
    hs,
    noises,
    polarities,
    pairs_per_cell: int,
    cfg: TestConfig,
    seed: int,
    index=None,
) -> list[RecallCell]:
    """Detection-rate grid over (h, noise, polarity) cells.

    Each cell generates ``pairs_per_cell`` fresh pairs and counts how many
    tests decide the correct polarity at cfg.alpha.  Generator failures and
    undetermined (degenerate-tie) tests are counted per cell, not fatal.
    """
    cells: list[RecallCell] = []
    for h in hs:
        for polarity in polarities:
            for noise in noises:
                detected = errors = undetermined = 0
                for i in range(pairs_per_cell):
                    pair_seed = derive_pair_seed(seed, h, polarity, int(round(noise * 1e6)), i)
                    spec = SimPairSpec(m=m, h=h, polarity=polarity, noise_p=noise, seed=pair_seed)
                    try:
                        pair = generate_pair(g, spec)
                        run_cfg = replace(
                            cfg, h=h, seed=derive_pair_seed(pair_seed, "test")
                        )
                        result = test_correlation(g, pair.a, pair.b, index, run_cfg)
                        if result.decision == polarity:
                            detected += 1
                    except DegenerateTieError:
                        undetermined += 1
                    except (SimulationError, TescError):
                        errors += 1
                cells.append(
                    RecallCell(
                        h=h,
                        noise=noise,
                        polarity=polarity,
                        tested=pairs_per_cell,
                        detected=detected,
                        errors=errors,
                        undetermined=undetermined,
                    )
                )
    return cells


def perturb_graph(g: Graph, fraction: float, seed: int) -> Graph:
    """Randomly add (fraction > 0) or remove (fraction < 0) that share of edges."""
    if not -1 <= fraction <= 1:
        raise ValueError("fraction must lie in [-1, 1]")
    u, v = g.edges()
    edge_count = u.size
    rng = _rng(seed)
    k = int(round(abs(fraction) * edge_count))
    if k == 0:
        return Graph.from_edges(u, v, node_count=g.node_count)

    if fraction < 0:
        if k >= edge_count:
            raise ValueError("removal would leave no edges")
        keep = np.ones(edge_count, dtype=bool)
        drop = _uniform_nodes(rng, np.arange(edge_count, dtype=np.int64), k)
        keep[drop] = False
        return Graph.from_edges(u[keep], v[keep], node_count=g.node_count)

    existing = np.unique(np.minimum(u, v).astype(np.int64) * g.node_count + np.maximum(u, v))
    new_enc: list[int] = []
    need = k
    while need > 0:
        cand_u = rng.integers(0, g.node_count, size=2 * need)
        cand_v = rng.integers(0, g.node_count, size=2 * need)
        ok = cand_u != cand_v
        cand_u, cand_v = cand_u[ok], cand_v[ok]
        enc = np.minimum(cand_u, cand_v) * g.node_count + np.maximum(cand_u, cand_v)
        enc = np.unique(enc)
        enc = enc[~np.isin(enc, existing)]
        take = enc[: min(need, enc.size)]
        new_enc.append(take)
        existing = np.union1d(existing, take)
        need -= take.size
    enc = np.concatenate(new_enc)
    all_u = np.concatenate([u.astype(np.int64), enc // g.node_count])
    all_v = np.concatenate([v.astype(np.int64), enc % g.node_count])
    return Graph.from_edges(all_u, all_v, node_count=g.node_count)
