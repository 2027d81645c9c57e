"""Shared fixtures and oracle helpers."""

from __future__ import annotations

from fractions import Fraction
from itertools import permutations

import networkx as nx
import numpy as np
import pytest

from tesc import Graph


def nx_to_graph(G: nx.Graph) -> Graph:
    """Convert a networkx graph (integer nodes 0..n-1) to a tesc Graph."""
    n = G.number_of_nodes()
    if G.number_of_edges() == 0:
        return Graph(np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int32))
    edges = np.array(G.edges(), dtype=np.int64)
    return Graph.from_edges(edges[:, 0], edges[:, 1], node_count=n)


def graph_to_nx(g: Graph) -> nx.Graph:
    G = nx.Graph()
    G.add_nodes_from(range(g.node_count))
    u, v = g.edges()
    G.add_edges_from(zip(u.tolist(), v.tolist()))
    return G


def ball_oracle(G: nx.Graph, source: int, h: int) -> set[int]:
    """Reference h-ball via networkx shortest path lengths."""
    lengths = nx.single_source_shortest_path_length(G, source, cutoff=h)
    return set(lengths)


@pytest.fixture
def path6() -> Graph:
    return nx_to_graph(nx.path_graph(6))


@pytest.fixture
def cycle6() -> Graph:
    return nx_to_graph(nx.cycle_graph(6))


@pytest.fixture
def star4() -> Graph:
    # center 0, leaves 1..4
    return nx_to_graph(nx.star_graph(4))


# ---------------------------------------------------------------------------
# brute-force oracles for the concordance statistics
# ---------------------------------------------------------------------------


def brute_s(a_vals, b_vals) -> int:
    """Pairwise concordance sum by direct enumeration (any orderable values)."""
    n = len(a_vals)
    s = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            da = (a_vals[i] > a_vals[j]) - (a_vals[i] < a_vals[j])
            db = (b_vals[i] > b_vals[j]) - (b_vals[i] < b_vals[j])
            s += da * db
    return s


def realize_ties(tie_sizes) -> list[int]:
    """A value vector whose equal-value groups have exactly these sizes."""
    vals: list[int] = []
    for level, size in enumerate(tie_sizes):
        vals.extend([level] * size)
    return vals


def exact_variance_of_s(tie_sizes_a, tie_sizes_b) -> Fraction:
    """Exact null variance of S: enumerate every permutation of one vector.

    Uniform over all n! orderings of b against a fixed a; permutations that
    coincide as value sequences have equal S, so enumerating the distinct
    sequences (each arising from the same number of underlying orderings)
    gives the same distribution.
    """
    a_vals = realize_ties(tie_sizes_a)
    b_vals = realize_ties(tie_sizes_b)
    distinct = set(permutations(b_vals))
    ss = [brute_s(a_vals, perm) for perm in distinct]
    count = len(ss)
    mean = Fraction(sum(ss), count)
    mean_sq = Fraction(sum(x * x for x in ss), count)
    return mean_sq - mean * mean
