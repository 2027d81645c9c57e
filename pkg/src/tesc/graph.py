"""Graph representation, ingestion, bounded BFS and event densities.

The graph is an immutable, simple, undirected graph over dense integer node
ids ``0..node_count-1``, stored in compressed adjacency (CSR) form: node v's
neighbors are ``indices[indptr[v]:indptr[v+1]]``.  Self-loops are dropped and
parallel edges merged at construction, so hop distances are well defined.

BFS visited state lives in an epoch-stamped scratch buffer that is reused
across searches (no O(node_count) clearing per query).  Every BFS entry point
accepts an optional scratch; when omitted, a per-graph, per-thread scratch is
used, so concurrent searches on a shared Graph are safe by default.
"""

from __future__ import annotations

import io
import threading
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ._kernels import bfs_ball, bfs_multi
from .errors import ParseError

_EPOCH_MAX = 0xFFFFFFFF


class BfsScratch:
    """Reusable visited/queue buffers for BFS on one graph.

    A node is visited in the current search iff ``stamp[node] == epoch``.
    Advancing the epoch invalidates all stamps at once; the stamp array is
    zeroed only when the 32-bit epoch counter wraps.
    """

    __slots__ = ("stamp", "queue", "_epoch")

    def __init__(self, node_count: int):
        self.stamp = np.zeros(node_count, dtype=np.uint32)
        self.queue = np.empty(node_count, dtype=np.int32)
        self._epoch = 0

    def take(self, k: int = 1) -> int:
        """Reserve ``k`` fresh epochs; returns the first one."""
        if self._epoch + k > _EPOCH_MAX:
            self.stamp.fill(0)
            self._epoch = 0
        start = self._epoch + 1
        self._epoch += k
        return start


class Graph:
    """Immutable undirected graph in CSR form."""

    __slots__ = ("indptr", "indices", "self_loops_dropped", "duplicate_edges_merged", "_local")

    def __init__(self, indptr, indices, *, self_loops_dropped=0, duplicate_edges_merged=0):
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int32)
        if indptr.ndim != 1 or indptr.size < 1 or indptr[0] != 0:
            raise ValueError("indptr must be 1-D, non-empty and start at 0")
        if indptr[-1] != indices.size:
            raise ValueError("indptr/indices length mismatch")
        indptr.setflags(write=False)
        indices.setflags(write=False)
        self.indptr = indptr
        self.indices = indices
        self.self_loops_dropped = self_loops_dropped
        self.duplicate_edges_merged = duplicate_edges_merged
        self._local = threading.local()

    @property
    def node_count(self) -> int:
        return self.indptr.size - 1

    @property
    def edge_count(self) -> int:
        return self.indices.size // 2

    def degree(self, v: int) -> int:
        return int(self.indptr[v + 1] - self.indptr[v])

    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, v: int) -> np.ndarray:
        return self.indices[self.indptr[v] : self.indptr[v + 1]]

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """The unique undirected edges as two aligned arrays with u < v."""
        u = np.repeat(np.arange(self.node_count, dtype=np.int32), self.degrees())
        keep = u < self.indices
        return u[keep], self.indices[keep].copy()

    def new_scratch(self) -> BfsScratch:
        return BfsScratch(self.node_count)

    def scratch(self) -> BfsScratch:
        """The calling thread's cached scratch for this graph."""
        s = getattr(self._local, "scratch", None)
        if s is None:
            s = BfsScratch(self.node_count)
            self._local.scratch = s
        return s

    def check_node(self, v: int) -> int:
        v = int(v)
        if not 0 <= v < self.node_count:
            raise ValueError(f"node id {v} out of range [0, {self.node_count})")
        return v

    @classmethod
    def from_edges(cls, u, v, node_count: int | None = None) -> "Graph":
        """Build a graph from parallel endpoint arrays.

        Edges are symmetrized; self-loops are dropped and duplicates (in
        either orientation) merged, with counts recorded on the instance.
        """
        u = np.asarray(u, dtype=np.int64)
        v = np.asarray(v, dtype=np.int64)
        if u.shape != v.shape:
            raise ValueError("endpoint arrays must have equal length")
        if u.size and (u.min() < 0 or v.min() < 0):
            raise ValueError("negative node id")
        max_id = int(max(u.max(), v.max())) if u.size else -1
        if node_count is None:
            node_count = max_id + 1
        elif max_id >= node_count:
            raise ValueError(f"node id {max_id} exceeds declared node count {node_count}")
        if node_count < 1:
            raise ValueError("graph must have at least one node")

        loops = u == v
        self_loops = int(loops.sum())
        u, v = u[~loops], v[~loops]

        lo = np.minimum(u, v)
        hi = np.maximum(u, v)
        enc = lo * node_count + hi
        enc_unique = np.unique(enc)
        duplicates = enc.size - enc_unique.size
        lo = (enc_unique // node_count).astype(np.int32)
        hi = (enc_unique % node_count).astype(np.int32)

        src = np.concatenate([lo, hi])
        dst = np.concatenate([hi, lo])
        order = np.argsort(src, kind="stable")
        src, dst = src[order], dst[order]
        counts = np.bincount(src, minlength=node_count)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        return cls(
            indptr,
            dst,
            self_loops_dropped=self_loops,
            duplicate_edges_merged=duplicates,
        )


class EventSet:
    """A named set of nodes on which one event occurs."""

    __slots__ = ("name", "nodes", "_mask")

    def __init__(self, name: str, nodes):
        nodes = np.asarray(nodes, dtype=np.int64)
        nodes = np.sort(nodes)
        if nodes.size and nodes[0] < 0:
            raise ValueError("negative node id in event set")
        if nodes.size > 1 and (nodes[1:] == nodes[:-1]).any():
            raise ValueError(f"duplicate node id in event set {name!r}")
        nodes = nodes.astype(np.int32)
        nodes.setflags(write=False)
        self.name = name
        self.nodes = nodes
        self._mask = None

    @classmethod
    def from_iterable(cls, name: str, it) -> "EventSet":
        """Build an event set, silently absorbing duplicates."""
        return cls(name, np.unique(np.fromiter(it, dtype=np.int64)))

    def __len__(self) -> int:
        return self.nodes.size

    def __contains__(self, v) -> bool:
        i = np.searchsorted(self.nodes, v)
        return bool(i < self.nodes.size and self.nodes[i] == v)

    def member_mask(self, node_count: int) -> np.ndarray:
        """Boolean membership array of length ``node_count`` (cached)."""
        if self._mask is None or self._mask.size != node_count:
            if self.nodes.size and self.nodes[-1] >= node_count:
                raise ValueError(
                    f"event {self.name!r} references node {int(self.nodes[-1])} "
                    f">= node count {node_count}"
                )
            mask = np.zeros(node_count, dtype=np.uint8)
            mask[self.nodes] = 1
            self._mask = mask
        return self._mask

    def validate_for(self, graph: Graph) -> None:
        if self.nodes.size and self.nodes[-1] >= graph.node_count:
            raise ValueError(
                f"event {self.name!r} references node {int(self.nodes[-1])} "
                f"outside graph with {graph.node_count} nodes"
            )


def union_nodes(a: EventSet, b: EventSet) -> np.ndarray:
    """Sorted union of two event sets' nodes (all event nodes)."""
    return np.union1d(a.nodes, b.nodes).astype(np.int32)


def _open_text(source):
    """Normalize path / bytes / file-like input to an owned text handle."""
    if isinstance(source, (str, Path)):
        return open(source, "rt", encoding="utf-8"), True
    if isinstance(source, bytes):
        return io.StringIO(source.decode("utf-8")), True
    data = source.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return io.StringIO(data), True


def load_edge_list(source, *, node_count: int | None = None) -> Graph:
    """Parse a whitespace-separated edge list, one ``u v`` pair per line.

    Lines starting with ``#`` and blank lines are skipped.  Node count is
    1 + the largest id seen unless ``node_count`` declares trailing isolated
    nodes explicitly.  Self-loops are dropped and duplicate edges merged
    (counts are recorded on the returned Graph).
    """
    fh, owned = _open_text(source)
    us: list[int] = []
    vs: list[int] = []
    try:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError(f"expected two node ids, got {len(parts)} tokens", lineno)
            try:
                u, v = int(parts[0]), int(parts[1])
            except ValueError:
                raise ParseError(f"malformed node id in {line!r}", lineno) from None
            if u < 0 or v < 0:
                raise ParseError(f"negative node id in {line!r}", lineno)
            us.append(u)
            vs.append(v)
    finally:
        if owned:
            fh.close()
    if not us:
        raise ParseError("edge list is empty")
    return Graph.from_edges(np.array(us, dtype=np.int64), np.array(vs, dtype=np.int64), node_count)


def load_label_map(source) -> dict[str, int]:
    """Parse a ``label id`` map file (whitespace separated, '#' comments)."""
    fh, owned = _open_text(source)
    mapping: dict[str, int] = {}
    try:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise ParseError("expected 'label id'", lineno)
            label, tok = parts
            try:
                node = int(tok)
            except ValueError:
                raise ParseError(f"malformed node id {tok!r}", lineno) from None
            if label in mapping:
                raise ParseError(f"duplicate label {label!r}", lineno)
            mapping[label] = node
    finally:
        if owned:
            fh.close()
    return mapping


def load_event_set(
    source,
    *,
    name: str = "event",
    node_count: int | None = None,
    label_map: dict[str, int] | None = None,
) -> EventSet:
    """Parse an event file: one node id (or label, with a map) per line.

    Duplicate entries are rejected.  With ``node_count`` given, out-of-range
    ids are rejected here rather than at first use.
    """
    fh, owned = _open_text(source)
    nodes: list[int] = []
    seen: set[int] = set()
    try:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if label_map is not None:
                if line not in label_map:
                    raise ParseError(f"unknown label {line!r}", lineno)
                node = label_map[line]
            else:
                try:
                    node = int(line)
                except ValueError:
                    raise ParseError(f"malformed node id {line!r}", lineno) from None
            if node < 0:
                raise ParseError(f"negative node id {node}", lineno)
            if node_count is not None and node >= node_count:
                raise ParseError(f"node id {node} >= node count {node_count}", lineno)
            if node in seen:
                raise ParseError(f"duplicate node id {node}", lineno)
            seen.add(node)
            nodes.append(node)
    finally:
        if owned:
            fh.close()
    return EventSet(name, np.array(nodes, dtype=np.int64))


def h_hop_bfs(g: Graph, source: int, h: int, scratch: BfsScratch | None = None) -> np.ndarray:
    """All nodes at hop distance <= h from ``source`` (sorted, includes source)."""
    source = g.check_node(source)
    if h < 0:
        raise ValueError("h must be >= 0")
    s = scratch or g.scratch()
    count = bfs_ball(g.indptr, g.indices, source, h, s.stamp, s.queue, s.take())
    return np.sort(s.queue[:count])


def batch_bfs(g: Graph, sources, h: int, scratch: BfsScratch | None = None) -> np.ndarray:
    """All nodes within hop distance h of *any* source (sorted).

    Multi-source BFS with every source at depth 0: each adjacency list is
    examined at most once, so the cost is O(node_count + edge_count) however
    much the individual balls overlap.
    """
    sources = np.asarray(sources, dtype=np.int64)
    if sources.size == 0:
        raise ValueError("sources must be non-empty")
    if sources.min() < 0 or sources.max() >= g.node_count:
        raise ValueError("source id out of range")
    if h < 0:
        raise ValueError("h must be >= 0")
    s = scratch or g.scratch()
    count = bfs_multi(g.indptr, g.indices, sources.astype(np.int32), h, s.stamp, s.queue, s.take())
    return np.sort(s.queue[:count])


class VicinityDensity(NamedTuple):
    """Exact event density in one node's h-vicinity: ``count / size``."""

    count: int
    size: int

    @property
    def value(self) -> Fraction:
        return Fraction(self.count, self.size)


def vicinity_density(
    g: Graph, r: int, h: int, event: EventSet, scratch: BfsScratch | None = None
) -> VicinityDensity:
    """Fraction of nodes within distance h of ``r`` that carry ``event``.

    Returned as the exact integer pair (count, vicinity size) so that ties
    between reference nodes can be detected without float rounding.
    """
    r = g.check_node(r)
    if h < 0:
        raise ValueError("h must be >= 0")
    s = scratch or g.scratch()
    count = bfs_ball(g.indptr, g.indices, r, h, s.stamp, s.queue, s.take())
    ball = s.queue[:count]
    mask = event.member_mask(g.node_count)
    return VicinityDensity(int(np.count_nonzero(mask[ball])), int(count))
