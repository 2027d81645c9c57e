"""Graph ingestion, bounded BFS and density evaluation."""

from __future__ import annotations

import io

import networkx as nx
import numpy as np
import pytest

from tesc import (
    EventSet,
    Graph,
    ParseError,
    batch_bfs,
    h_hop_bfs,
    load_edge_list,
    load_event_set,
    load_label_map,
    vicinity_density,
)

from conftest import ball_oracle, graph_to_nx, nx_to_graph


class TestLoadEdgeList:
    def test_two_edge_path(self):
        g = load_edge_list(b"0 1\n1 2\n")
        assert g.node_count == 3
        assert g.edge_count == 2
        assert set(g.neighbors(1).tolist()) == {0, 2}

    def test_self_loop_and_duplicate(self):
        g = load_edge_list(b"0 1\n1 0\n0 0\n")
        assert g.node_count == 2
        assert g.edge_count == 1
        assert g.self_loops_dropped == 1
        assert g.duplicate_edges_merged == 1

    def test_malformed_token(self):
        with pytest.raises(ParseError, match="line 1"):
            load_edge_list(b"0 x\n")

    def test_error_reports_line_number(self):
        with pytest.raises(ParseError, match="line 3"):
            load_edge_list(b"0 1\n1 2\n2\n")

    def test_empty_input(self):
        with pytest.raises(ParseError, match="empty"):
            load_edge_list(b"# only a comment\n\n")

    def test_comments_and_blank_lines(self):
        g = load_edge_list(b"# header\n\n0 1\n# mid\n1 2\n")
        assert g.edge_count == 2

    def test_negative_id(self):
        with pytest.raises(ParseError, match="negative"):
            load_edge_list(b"0 -1\n")

    def test_explicit_node_count_allows_isolated_tail(self):
        g = load_edge_list(b"0 1\n", node_count=5)
        assert g.node_count == 5
        assert g.degree(4) == 0

    def test_explicit_node_count_too_small(self):
        with pytest.raises(ValueError, match="exceeds"):
            load_edge_list(b"0 9\n", node_count=5)

    def test_accepts_path_and_file_handle(self, tmp_path):
        p = tmp_path / "g.txt"
        p.write_text("0 1\n1 2\n")
        assert load_edge_list(p).node_count == 3
        assert load_edge_list(str(p)).node_count == 3
        with open(p) as fh:
            assert load_edge_list(fh).node_count == 3

    def test_adjacency_is_immutable(self):
        g = load_edge_list(b"0 1\n")
        with pytest.raises(ValueError):
            g.indices[0] = 5
        with pytest.raises(ValueError):
            g.indptr[0] = 1

    def test_undirected_symmetry(self):
        g = load_edge_list(b"0 1\n2 1\n3 0\n2 3\n")
        for v in range(g.node_count):
            for u in g.neighbors(v):
                assert v in g.neighbors(u)


class TestEventSet:
    def test_duplicate_rejected(self):
        with pytest.raises(ValueError, match="duplicate"):
            EventSet("a", [1, 2, 2])

    def test_from_iterable_dedups(self):
        e = EventSet.from_iterable("a", [3, 1, 3, 2])
        assert e.nodes.tolist() == [1, 2, 3]

    def test_membership(self):
        e = EventSet("a", [1, 5, 9])
        assert 5 in e and 4 not in e

    def test_load_event_set(self):
        e = load_event_set(b"# c\n2\n0\n7\n", node_count=10)
        assert e.nodes.tolist() == [0, 2, 7]

    def test_load_rejects_duplicates(self):
        with pytest.raises(ParseError, match="duplicate"):
            load_event_set(b"1\n1\n")

    def test_load_range_check(self):
        with pytest.raises(ParseError, match="node count"):
            load_event_set(b"12\n", node_count=10)

    def test_label_map(self):
        mapping = load_label_map(b"# labels\nalpha 0\nbeta 3\n")
        e = load_event_set(b"beta\nalpha\n", label_map=mapping)
        assert e.nodes.tolist() == [0, 3]

    def test_label_map_unknown_label(self):
        mapping = load_label_map(b"alpha 0\n")
        with pytest.raises(ParseError, match="unknown label"):
            load_event_set(b"gamma\n", label_map=mapping)

    def test_mask_out_of_range(self):
        e = EventSet("a", [11])
        with pytest.raises(ValueError, match="node"):
            e.member_mask(5)


class TestHHopBfs:
    def test_path_distance(self):
        g = load_edge_list(b"0 1\n1 2\n2 3\n3 4\n")
        assert h_hop_bfs(g, 0, 2).tolist() == [0, 1, 2]

    def test_h_zero(self, cycle6):
        for v in range(6):
            assert h_hop_bfs(cycle6, v, 0).tolist() == [v]

    def test_cycle_two_hops(self, cycle6):
        # derived from all-pairs shortest paths on the 6-cycle
        assert h_hop_bfs(cycle6, 0, 2).tolist() == [0, 1, 2, 4, 5]

    def test_source_out_of_range(self, cycle6):
        with pytest.raises(ValueError, match="out of range"):
            h_hop_bfs(cycle6, 6, 1)

    def test_negative_h(self, cycle6):
        with pytest.raises(ValueError):
            h_hop_bfs(cycle6, 0, -1)

    def test_matches_shortest_path_oracle(self):
        G = nx.gnp_random_graph(50, 0.08, seed=11)
        g = nx_to_graph(G)
        for source in range(0, 50, 7):
            for h in range(4):
                assert set(h_hop_bfs(g, source, h).tolist()) == ball_oracle(G, source, h)

    def test_monotone_in_h(self):
        G = nx.gnp_random_graph(40, 0.1, seed=5)
        g = nx_to_graph(G)
        for v in (0, 13, 39):
            prev: set[int] = set()
            for h in range(5):
                ball = set(h_hop_bfs(g, v, h).tolist())
                assert v in ball
                assert prev <= ball
                prev = ball

    def test_diameter_covers_component(self):
        G = nx.random_labeled_tree(30, seed=3)
        g = nx_to_graph(G)
        d = nx.diameter(G)
        assert h_hop_bfs(g, 0, d).size == 30

    def test_disconnected_stays_in_component(self):
        g = load_edge_list(b"0 1\n2 3\n")
        assert h_hop_bfs(g, 0, 10).tolist() == [0, 1]


class TestBatchBfs:
    def test_two_disjoint_balls(self):
        g = load_edge_list(b"0 1\n1 2\n2 3\n3 4\n4 5\n")
        assert batch_bfs(g, [0, 5], 1).tolist() == [0, 1, 4, 5]

    def test_balls_cover_path(self):
        g = load_edge_list(b"0 1\n1 2\n2 3\n3 4\n4 5\n")
        assert batch_bfs(g, [0, 5], 3).tolist() == [0, 1, 2, 3, 4, 5]

    def test_empty_sources(self, cycle6):
        with pytest.raises(ValueError, match="non-empty"):
            batch_bfs(cycle6, [], 1)

    def test_out_of_range_source(self, cycle6):
        with pytest.raises(ValueError, match="range"):
            batch_bfs(cycle6, [0, 17], 1)

    def test_union_equivalence_oracle(self):
        # batch result must equal the union of per-source balls
        rng = np.random.default_rng(42)
        G = nx.gnp_random_graph(50, 0.06, seed=7)
        g = nx_to_graph(G)
        for _ in range(100):
            k = int(rng.integers(1, 8))
            sources = rng.choice(50, size=k, replace=False)
            h = int(rng.integers(0, 4))
            expected = set()
            for s in sources:
                expected |= set(h_hop_bfs(g, int(s), h).tolist())
            assert set(batch_bfs(g, sources, h).tolist()) == expected

    def test_duplicate_sources_ok(self, cycle6):
        assert batch_bfs(cycle6, [0, 0, 3], 1).tolist() == [0, 1, 2, 3, 4, 5]


class TestVicinityDensity:
    def test_star_center(self, star4):
        event = EventSet("a", [1, 2])
        d = vicinity_density(star4, 0, 1, event)
        assert (d.count, d.size) == (2, 5)
        assert float(d.value) == pytest.approx(0.4)

    def test_empty_event(self, star4):
        event = EventSet("a", [])
        for v in range(5):
            assert vicinity_density(star4, v, 1, event).count == 0

    def test_full_event(self, star4):
        event = EventSet("a", list(range(5)))
        for v in range(5):
            for h in range(3):
                d = vicinity_density(star4, v, h, event)
                assert d.count == d.size

    def test_density_bounds_random(self):
        G = nx.gnp_random_graph(30, 0.1, seed=9)
        g = nx_to_graph(G)
        event = EventSet("a", [0, 3, 17, 21])
        for v in range(30):
            d = vicinity_density(g, v, 2, event)
            assert 0 <= d.count <= d.size

    def test_full_density_iff_ball_subset(self):
        g = load_edge_list(b"0 1\n1 2\n")
        event = EventSet("a", [0, 1])
        assert vicinity_density(g, 0, 1, event).value == 1
        assert vicinity_density(g, 1, 1, event).value < 1


def test_scratch_reuse_is_isolated(cycle6):
    s = cycle6.new_scratch()
    a = h_hop_bfs(cycle6, 0, 1, s).tolist()
    b = h_hop_bfs(cycle6, 3, 1, s).tolist()
    assert a == [0, 1, 5]
    assert b == [2, 3, 4]


def test_concurrent_bfs_threads(cycle6):
    from concurrent.futures import ThreadPoolExecutor

    def run(v):
        return set(h_hop_bfs(cycle6, v, 2).tolist())

    with ThreadPoolExecutor(max_workers=4) as pool:
        results = list(pool.map(run, range(6)))
    for v, ball in enumerate(results):
        assert ball == ball_oracle(graph_to_nx(cycle6), v, 2)
