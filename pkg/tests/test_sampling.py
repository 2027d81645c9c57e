"""Reference-node samplers: uniformity, determinism, sight constraints."""

from __future__ import annotations

import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from tesc import (
    EventSet,
    TescError,
    batch_bfs,
    build_vicinity_index,
    h_hop_bfs,
    load_edge_list,
    reject_samp,
    sample_batch_bfs,
    sample_importance,
    sample_whole_graph,
)
from tesc.sampling import default_batch_k

from conftest import nx_to_graph


def rng_of(seed):
    return np.random.Generator(np.random.PCG64(seed))


@pytest.fixture
def gnp200():
    return nx_to_graph(nx.gnp_random_graph(200, 0.02, seed=31))


class TestBatchBfsSampler:
    def test_small_population_returned_whole(self):
        g = load_edge_list(b"0 1\n1 2\n2 3\n3 4\n4 5\n5 6\n6 7\n7 8\n8 9\n")
        sample = sample_batch_bfs(g, EventSet("e", [0]), h=1, n=10, seed=1)
        assert sample.nodes.tolist() == [0, 1]
        assert sample.exhausted
        assert sample.population_size == 2

    def test_exhaustion_returns_population_exactly(self, gnp200):
        events = EventSet("e", [0, 11])
        pop = batch_bfs(gnp200, events.nodes, 2)
        sample = sample_batch_bfs(gnp200, events, h=2, n=10_000, seed=3)
        assert sample.exhausted
        assert np.array_equal(np.sort(sample.nodes), pop)

    def test_population_too_small(self):
        g = load_edge_list(b"0 1\n", node_count=3)
        with pytest.raises(TescError, match="no pairs"):
            sample_batch_bfs(g, EventSet("e", [2]), h=1, n=5, seed=0)

    def test_sample_is_subset_without_replacement(self, gnp200):
        events = EventSet("e", [3, 50, 120])
        pop = set(batch_bfs(gnp200, events.nodes, 2).tolist())
        sample = sample_batch_bfs(gnp200, events, h=2, n=15, seed=9)
        assert len(set(sample.nodes.tolist())) == 15
        assert set(sample.nodes.tolist()) <= pop
        assert (sample.weights == 1).all()
        assert sample.mode == "uniform"

    def test_determinism(self, gnp200):
        events = EventSet("e", [3, 50, 120])
        s1 = sample_batch_bfs(gnp200, events, h=2, n=15, seed=77)
        s2 = sample_batch_bfs(gnp200, events, h=2, n=15, seed=77)
        assert np.array_equal(s1.nodes, s2.nodes)
        s3 = sample_batch_bfs(gnp200, events, h=2, n=15, seed=78)
        assert not np.array_equal(s1.nodes, s3.nodes)

    def test_member_frequencies_binomial(self):
        # every population member appears with frequency ~ n/N
        g = nx_to_graph(nx.gnp_random_graph(60, 0.05, seed=13))
        events = EventSet("e", [0, 7])
        pop = batch_bfs(g, events.nodes, 2)
        n_draw, reps = 8, 4000
        counts = {int(v): 0 for v in pop}
        for rep in range(reps):
            for v in sample_batch_bfs(g, events, h=2, n=n_draw, seed=1000 + rep).nodes:
                counts[int(v)] += 1
        p = n_draw / pop.size
        sd = math.sqrt(reps * p * (1 - p))
        for v, c in counts.items():
            assert abs(c - reps * p) < 4 * sd, f"node {v}: {c} vs {reps * p:.1f}"


class TestRejectSamp:
    def test_disjoint_vicinities_always_accept(self):
        # two separate components: N_sum == N, so no trial can fail
        g = load_edge_list(b"0 1\n1 2\n3 4\n4 5\n")
        events = EventSet("e", [1, 4])
        idx = build_vicinity_index(g, 1)
        rng = rng_of(5)
        for _ in range(200):
            assert reject_samp(g, events, idx, 1, rng) is not None

    def test_acceptance_rate_matches_overlap(self):
        # identical vicinities of size s for both event nodes: p_succ = 1/2
        g = load_edge_list(b"0 1\n0 2\n1 2\n")  # triangle
        events = EventSet("e", [0, 1])
        idx = build_vicinity_index(g, 1)
        rng = rng_of(17)
        hits = sum(reject_samp(g, events, idx, 1, rng) is not None for _ in range(8000))
        assert abs(hits / 8000 - 0.5) < 0.02

    def test_accepted_uniform_over_population(self):
        g = nx_to_graph(nx.gnp_random_graph(15, 0.25, seed=3))
        events = EventSet("e", [0, 4])
        idx = build_vicinity_index(g, 1)
        pop = batch_bfs(g, events.nodes, 1)
        rng = rng_of(23)
        counts = {int(v): 0 for v in pop}
        accepted = 0
        while accepted < 6000:
            node = reject_samp(g, events, idx, 1, rng)
            if node is not None:
                counts[int(node)] += 1
                accepted += 1
        p = 1 / pop.size
        sd = math.sqrt(6000 * p * (1 - p))
        for v, c in counts.items():
            assert abs(c - 6000 * p) < 4 * sd

    def test_branch_probabilities_exactly_uniform(self):
        """Enumerate every (event node, candidate, accept) branch as exact
        fractions: the resulting distribution is uniform over the population
        and the trial success probability is N / N_sum."""
        g = nx_to_graph(nx.gnp_random_graph(15, 0.3, seed=8))
        events = EventSet("e", [0, 2, 9])
        h = 1
        idx = build_vicinity_index(g, h)
        pop = batch_bfs(g, events.nodes, h)
        n_sum = idx.vicinity_sum(h, events.nodes)

        prob = {int(v): Fraction(0) for v in pop.tolist()}
        for v in events.nodes:
            ball = h_hop_bfs(g, int(v), h)
            p_v = Fraction(int(idx.level(h)[int(v)]), n_sum)
            for u in ball:
                c = int(np.intersect1d(h_hop_bfs(g, int(u), h), events.nodes).size)
                prob[int(u)] += p_v * Fraction(1, int(ball.size)) * Fraction(1, c)
        assert all(p == Fraction(1, n_sum) for p in prob.values())
        assert sum(prob.values()) == Fraction(int(pop.size), n_sum)


class TestImportanceSampler:
    def test_defaults_by_level(self):
        assert default_batch_k(1) == 1
        assert default_batch_k(2) == 3
        assert default_batch_k(3) == 6
        assert default_batch_k(5) == 6

    def test_distinct_nodes_and_weights(self, gnp200):
        events = EventSet("e", [3, 50, 120, 77])
        idx = build_vicinity_index(gnp200, 2)
        sample = sample_importance(gnp200, events, idx, h=2, n=40, batch_k=1, seed=5)
        assert len(set(sample.nodes.tolist())) == sample.n >= 40
        assert sample.n_prime == int(sample.weights.sum())
        assert sample.mode == "importance"
        assert sample.n_sum == idx.vicinity_sum(2, events.nodes)

    def test_determinism(self, gnp200):
        events = EventSet("e", [3, 50, 120, 77])
        idx = build_vicinity_index(gnp200, 2)
        s1 = sample_importance(gnp200, events, idx, h=2, n=40, batch_k=3, seed=9)
        s2 = sample_importance(gnp200, events, idx, h=2, n=40, batch_k=3, seed=9)
        assert np.array_equal(s1.nodes, s2.nodes)
        assert np.array_equal(s1.weights, s2.weights)

    def test_batch_iteration_arithmetic(self):
        # large vicinities, few duplicates: approximately n / batch_k searches
        g = nx_to_graph(nx.gnp_random_graph(4000, 0.003, seed=2))
        events = EventSet("e", list(range(0, 4000, 40)))
        idx = build_vicinity_index(g, 2)
        sample = sample_importance(g, events, idx, h=2, n=90, batch_k=6, seed=3)
        assert sample.bfs_calls <= math.ceil(90 / 6) + 4

    def test_first_draw_frequency_matches_size_bias(self):
        """The first draw lands on u with probability |V_u^h ∩ events|-weighted
        mass: sum over event nodes v containing u of 1/N_sum."""
        g = nx_to_graph(nx.gnp_random_graph(15, 0.25, seed=3))
        events = EventSet("e", [0, 4])
        idx = build_vicinity_index(g, 1)
        pop = batch_bfs(g, events.nodes, 1)
        n_sum = idx.vicinity_sum(1, events.nodes)
        mask = np.zeros(g.node_count, dtype=bool)
        mask[events.nodes] = True

        expected = {}
        for u in pop.tolist():
            c = int(np.count_nonzero(mask[h_hop_bfs(g, int(u), 1)]))
            expected[u] = c / n_sum

        reps = 20_000
        counts = dict.fromkeys(pop.tolist(), 0)
        for rep in range(reps):
            s = sample_importance(g, events, idx, h=1, n=2, batch_k=1, seed=rep)
            counts[int(s.nodes[0])] += 1
        for u in pop.tolist():
            p = expected[u]
            sd = math.sqrt(reps * p * (1 - p))
            assert abs(counts[u] - reps * p) < 4 * sd, f"node {u}"

    def test_overlap_fill(self, gnp200):
        from tesc.sampling import fill_probabilities

        events = EventSet("e", [3, 50, 120, 77])
        idx = build_vicinity_index(gnp200, 2)
        sample = sample_importance(gnp200, events, idx, h=2, n=30, batch_k=1, seed=4)
        assert sample.probabilities is None
        fill_probabilities(gnp200, sample, events)
        probs = sample.probabilities
        assert probs is not None and (probs > 0).all() and (probs <= 1).all()
        # spot check one node against its definition
        r = int(sample.nodes[0])
        c = int(np.intersect1d(h_hop_bfs(gnp200, r, 2), events.nodes).size)
        assert sample.overlap_counts[0] == c

    def test_population_too_small(self):
        g = load_edge_list(b"0 1\n", node_count=3)
        idx = build_vicinity_index(g, 1)
        with pytest.raises(TescError):
            sample_importance(g, EventSet("e", [2]), idx, h=1, n=5, batch_k=1, seed=0)


class TestWholeGraphSampler:
    def test_blanket_events_zero_discards(self, gnp200):
        events = EventSet("e", list(range(200)))
        sample = sample_whole_graph(gnp200, events, h=1, n=20, seed=6)
        assert sample.discarded == 0
        assert sample.n == 20

    def test_kept_uniform_over_population(self):
        g = nx_to_graph(nx.gnp_random_graph(300, 0.008, seed=19))
        events = EventSet("e", [5, 100, 200])
        pop = batch_bfs(g, events.nodes, 2)
        reps, n_draw = 3000, 5
        counts = {int(v): 0 for v in pop.tolist()}
        for rep in range(reps):
            s = sample_whole_graph(g, events, h=2, n=n_draw, seed=rep)
            for v in s.nodes:
                counts[int(v)] += 1
        p = n_draw / pop.size
        sd = math.sqrt(reps * p * (1 - p))
        for v, c in counts.items():
            assert abs(c - reps * p) < 4.5 * sd, f"node {v}"

    def test_exhaustion_collects_population(self):
        g = load_edge_list(b"0 1\n1 2\n3 4\n")
        events = EventSet("e", [1])
        sample = sample_whole_graph(g, events, h=1, n=50, seed=2)
        assert sample.exhausted
        assert sorted(sample.nodes.tolist()) == [0, 1, 2]
        assert sample.population_size == 3

    def test_too_few_eligible(self):
        g = load_edge_list(b"0 1\n", node_count=4)
        with pytest.raises(TescError, match="eligible"):
            sample_whole_graph(g, EventSet("e", [3]), h=2, n=5, seed=0)

    def test_discard_estimate_recorded(self):
        g = nx_to_graph(nx.gnp_random_graph(400, 0.004, seed=4))
        events = EventSet("e", [0])
        sample = sample_whole_graph(g, events, h=2, n=3, seed=11)
        assert sample.population_estimate is not None
        assert sample.discarded > 0


def test_no_sampler_returns_out_of_sight_nodes(gnp200):
    """Every returned reference node can see an event within h hops."""
    events = EventSet("e", [3, 50, 120])
    idx = build_vicinity_index(gnp200, 2)
    h = 2
    visible = set(batch_bfs(gnp200, events.nodes, h).tolist())
    samples = [
        sample_batch_bfs(gnp200, events, h, 25, seed=1),
        sample_importance(gnp200, events, idx, h, 25, batch_k=3, seed=2),
        sample_whole_graph(gnp200, events, h, 25, seed=3),
    ]
    for sample in samples:
        assert set(sample.nodes.tolist()) <= visible
    rng = rng_of(4)
    for _ in range(100):
        node = reject_samp(gnp200, events, idx, h, rng)
        if node is not None:
            assert node in visible


def test_uniform_samplers_distributionally_close():
    """batch-bfs and whole-graph draws agree with a chi-square test."""
    scipy_stats = pytest.importorskip("scipy.stats")
    g = nx_to_graph(nx.gnp_random_graph(80, 0.05, seed=21))
    events = EventSet("e", [0, 40])
    pop = batch_bfs(g, events.nodes, 1)
    reps, n_draw = 2500, 6
    table = np.zeros((2, pop.size))
    lookup = {int(v): i for i, v in enumerate(pop.tolist())}
    for rep in range(reps):
        for v in sample_batch_bfs(g, events, 1, n_draw, seed=rep).nodes:
            table[0, lookup[int(v)]] += 1
        for v in sample_whole_graph(g, events, 1, n_draw, seed=10_000 + rep).nodes:
            table[1, lookup[int(v)]] += 1
    _, p, _, _ = scipy_stats.chi2_contingency(table)
    assert p > 0.01
