"""Offline per-node vicinity-size index.

For every node v and level h = 1..h_max, the index stores |V_v^h|: the
number of nodes within hop distance h of v, including v itself.  These
counts drive the size-proportional event-node selection and the acceptance
discount of the rejection/importance samplers.  Space is O(node_count) per
level (one u32 each).

File format ``TESCIDX1`` (little-endian): 8 magic bytes, u64 node count,
u32 h_max, then h_max contiguous arrays of u32 sizes, level 1 first.  The
payload is memory-mappable.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ._kernels import vicinity_size_table
from .errors import TescError
from .graph import Graph

MAGIC = b"TESCIDX1"
_HEADER = struct.Struct("<8sQI")


class VicinityIndex:
    """Per-node h-vicinity node counts for levels 1..h_max."""

    __slots__ = ("sizes",)

    def __init__(self, sizes):
        sizes = np.ascontiguousarray(sizes, dtype=np.uint32)
        if sizes.ndim != 2 or sizes.shape[0] < 1:
            raise ValueError("sizes must be a (h_max, node_count) array with h_max >= 1")
        self.sizes = sizes

    @property
    def h_max(self) -> int:
        return self.sizes.shape[0]

    @property
    def node_count(self) -> int:
        return self.sizes.shape[1]

    def level(self, h: int) -> np.ndarray:
        """The |V_v^h| array for one level (h is 1-based)."""
        if not 1 <= h <= self.h_max:
            raise ValueError(f"level {h} outside index range 1..{self.h_max}")
        return self.sizes[h - 1]

    def vicinity_sum(self, h: int, nodes) -> int:
        """Sum of |V_v^h| over the given nodes (N_sum of the sampler math)."""
        return int(self.level(h)[np.asarray(nodes)].sum(dtype=np.int64))

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(_HEADER.pack(MAGIC, self.node_count, self.h_max))
            fh.write(self.sizes.astype("<u4", copy=False).tobytes())

    @classmethod
    def load(cls, path, mmap: bool = False) -> "VicinityIndex":
        path = Path(path)
        with open(path, "rb") as fh:
            header = fh.read(_HEADER.size)
            if len(header) < _HEADER.size:
                raise TescError(f"{path}: truncated index header")
            magic, node_count, h_max = _HEADER.unpack(header)
            if magic != MAGIC:
                raise TescError(f"{path}: bad magic {magic!r}, not a vicinity index")
            if h_max < 1:
                raise TescError(f"{path}: invalid h_max {h_max}")
            count = h_max * node_count
            if mmap:
                data = np.memmap(path, dtype="<u4", mode="r", offset=_HEADER.size, shape=(count,))
            else:
                data = np.fromfile(fh, dtype="<u4", count=count)
            if data.size != count:
                raise TescError(f"{path}: truncated index payload")
        return cls(data.reshape(h_max, node_count))


def build_vicinity_index(g: Graph, h_max: int) -> VicinityIndex:
    """Compute |V_v^h| for every node and h = 1..h_max (one BFS per node)."""
    if h_max < 1:
        raise ValueError("h_max must be >= 1")
    out = np.empty((h_max, g.node_count), dtype=np.uint32)
    vicinity_size_table(g.indptr, g.indices, h_max, out)
    return VicinityIndex(out)
