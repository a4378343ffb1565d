from fractions import Fraction
from random import Random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from graphpir import (
    GraphQueryVector,
    IndependentPartition,
    ProtocolError,
    StorageGraph,
    alpha_first_partition,
    decode,
    exact_max_independent_set,
    expected_download,
    generate_family,
    generate_queries,
    graph_file_store,
    greedy_independent_partition,
    make_edge,
    multigraph_extend,
    null_query_probability,
    queries_from_coins,
    rate_bounds,
    run_graph_transcript,
    server_respond,
)
from graphpir.general import coin_keys

from test_graphs import storage_graphs


class TestQueryConstruction:
    def test_example_symbolic_queries(self, fig3, fig3_partition):
        # One distinguishable value per coin, applied as bit patterns: give
        # each coin its own position and check the slot wiring.
        keys = coin_keys(fig3, fig3_partition)
        assert keys == ((2, 1), (6, 1), (7, 1), (1, 1), (4, 1))
        for active in keys:
            coins = {key: int(key == active) for key in keys}
            qs = queries_from_coins(make_edge(2, 3), fig3, fig3_partition, coins)
            x2, x6, x7 = coins[(2, 1)], coins[(6, 1)], coins[(7, 1)]
            y1, y4 = coins[(1, 1)], coins[(4, 1)]
            assert qs[3].bits == (y1, x2 ^ 1, y4)
            assert qs[5].bits == (y4, x6, x7)
            assert qs[2].bits == (x2, x2, x2)
            assert qs[4].bits == (y4, y4, x2, x7)
            assert qs[1].bits == (y1, x2)

    def test_zero_coin_trace_single_nonnull(self, fig3, fig3_partition):
        coins = {key: 0 for key in coin_keys(fig3, fig3_partition)}
        qs = queries_from_coins(make_edge(2, 3), fig3, fig3_partition, coins)
        nonnull = {n for n, q in qs.items() if not q.is_null}
        assert nonnull == {3}
        assert qs[3].bits == (0, 1, 0)
        assert qs[3].slots[1] == make_edge(2, 3)

    def test_two_server_base_case(self):
        g = generate_family("path", 2)
        p = greedy_independent_partition(g)
        for c in (0, 1):
            qs = queries_from_coins(make_edge(1, 2), g, p, {(1, 1): c})
            assert qs[1].bits == (c,)
            assert qs[2].bits == (c ^ 1,)

    def test_non_edge_theta_rejected(self, fig3, fig3_partition):
        with pytest.raises(ValueError):
            generate_queries(make_edge(1, 7), fig3, fig3_partition, Random(0))

    @given(storage_graphs(), st.randoms(use_true_random=False), st.integers(0, 2**32))
    @settings(max_examples=60, deadline=None)
    def test_edge_slot_matching(self, g, rnd, seed):
        order = list(g.vertices)
        rnd.shuffle(order)
        p = greedy_independent_partition(g, order)
        rng = Random(seed)
        theta = g.edges[rng.randrange(g.n_files)]
        qs = generate_queries(theta, g, p, rng)
        for e in g.edges:
            # The two endpoint bits agree except on the desired edge.
            mismatch = qs[e.u].bit_for(e) ^ qs[e.v].bit_for(e)
            assert mismatch == (1 if e == theta else 0)

    @given(st.integers(0, 2**32), st.integers(1, 3))
    @settings(max_examples=40, deadline=None)
    def test_downstream_groups_constant(self, seed, r):
        g = multigraph_extend(generate_family("complete", 4), r)
        p = greedy_independent_partition(g)
        rng = Random(seed)
        theta = g.edges[rng.randrange(g.n_files)]
        qs = generate_queries(theta, g, p, rng)
        from graphpir import classify_edges

        for n, q in qs.items():
            down, _ = classify_edges(g, p, n)
            per_group: dict[int, set[int]] = {}
            for e in down:
                per_group.setdefault(e.k, set()).add(q.bit_for(e))
            for values in per_group.values():
                assert len(values) == 1


class TestRespond:
    def test_null_query_no_response(self, fig3, fig3_partition):
        fs = graph_file_store(fig3, Random(0))
        q = GraphQueryVector(6, (make_edge(5, 6),), (0,))
        assert server_respond(6, q, fs) is None

    def test_all_ones_xors_everything(self, fig3, fig3_partition):
        fs = graph_file_store(fig3, Random(0), 8)
        slots = fig3.incident_edges(4)
        q = GraphQueryVector(4, slots, (1, 1, 1, 1))
        expect = 0
        for e in slots:
            expect ^= fs[e]
        assert server_respond(4, q, fs) == expect

    def test_unit_vector_returns_file(self, fig3):
        fs = graph_file_store(fig3, Random(0), 8)
        slots = fig3.incident_edges(1)
        q = GraphQueryVector(1, slots, (1, 0))
        assert server_respond(1, q, fs) == fs[slots[0]]

    def test_foreign_edge_rejected(self, fig3):
        fs = graph_file_store(fig3, Random(0))
        q = GraphQueryVector(6, (make_edge(1, 2),), (1,))
        with pytest.raises(ProtocolError):
            server_respond(6, q, fs)

    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GraphQueryVector(1, (make_edge(1, 2),), (1, 0))


class TestDecode:
    def test_example_transcript(self, fig3, fig3_partition):
        fs = graph_file_store(fig3, Random(9), 16)
        theta = make_edge(2, 3)
        t = run_graph_transcript(theta, fig3, fig3_partition, fs, Random(5))
        assert t.decoded == fs[theta]

    def test_zero_coin_trace_decodes_from_one_server(self, fig3, fig3_partition):
        fs = graph_file_store(fig3, Random(9), 8)
        theta = make_edge(2, 3)
        coins = {key: 0 for key in coin_keys(fig3, fig3_partition)}
        qs = queries_from_coins(theta, fig3, fig3_partition, coins)
        responses = {
            n: server_respond(n, q, fs) for n, q in qs.items() if not q.is_null
        }
        assert list(responses) == [3]
        assert decode(responses) == fs[theta]

    def test_zero_payloads_decode_zero(self, fig3, fig3_partition):
        from graphpir import FileStore

        fs = FileStore({e: 0 for e in fig3.edges}, 4)
        t = run_graph_transcript(make_edge(4, 5), fig3, fig3_partition, fs, Random(1))
        assert t.decoded == 0

    @given(storage_graphs(), st.randoms(use_true_random=False), st.integers(0, 2**32),
           st.sampled_from([1, 64]))
    @settings(max_examples=60, deadline=None)
    def test_correctness_any_partition_any_seed(self, g, rnd, seed, l_bits):
        order = list(g.vertices)
        rnd.shuffle(order)
        p = greedy_independent_partition(g, order)
        rng = Random(seed)
        fs = graph_file_store(g, rng, l_bits)
        for theta in g.edges:
            t = run_graph_transcript(theta, g, p, fs, rng)
            assert t.decoded == fs[theta]


class TestNullProbability:
    def test_example_values(self, fig3, fig3_partition):
        want = {1: "1/4", 2: "1/2", 3: "1/8", 4: "1/8", 5: "1/8", 6: "1/2", 7: "1/2"}
        for n, txt in want.items():
            assert null_query_probability(n, fig3, fig3_partition) == Fraction(txt)

    def test_first_set_always_half(self):
        for name, args in [("complete", (6,)), ("star", (5,)), ("bipartite", (3, 3))]:
            g = generate_family(name, *args)
            p = greedy_independent_partition(g)
            for n in p.sets[0]:
                assert null_query_probability(n, g, p) == Fraction(1, 2)

    def test_doubled_triangle(self):
        g = multigraph_extend(generate_family("complete", 3), 2)
        p = greedy_independent_partition(g)
        assert [null_query_probability(n, g, p) for n in (1, 2, 3)] == [
            Fraction(1, 4),
            Fraction(1, 16),
            Fraction(1, 16),
        ]


class TestExpectedDownload:
    def test_example_graph(self, fig3, fig3_partition):
        assert expected_download(fig3, fig3_partition) == Fraction(39, 8)

    @pytest.mark.parametrize("n", range(3, 9))
    def test_complete_graphs(self, n):
        g = generate_family("complete", n)
        p = greedy_independent_partition(g)
        assert expected_download(g, p) == n - 1

    def test_balanced_bipartite(self):
        g = generate_family("bipartite", 3, 3)
        p = greedy_independent_partition(g)
        assert expected_download(g, p) == Fraction(33, 8)
        assert Fraction(33, 8) <= Fraction(6) - Fraction(3, 2)


class TestRateBounds:
    def test_complete_graph_meets_floor(self):
        g = generate_family("complete", 5)
        p = alpha_first_partition(g)
        report = rate_bounds(g, p, 1, alpha_exact=True)
        assert report.rate == Fraction(1, 4)
        assert max(b.value for b in report.bounds) == Fraction(1, 4)
        assert report.asserted_ok

    def test_bipartite_exceeds_independent_set_bound(self):
        g = generate_family("bipartite", 3, 3)
        p = alpha_first_partition(g)
        report = rate_bounds(g, p, 3, alpha_exact=True)
        assert report.rate == Fraction(8, 33)
        iset = next(b for b in report.bounds if b.name == "independent_set_lower")
        assert iset.value == Fraction(2, 9)
        assert report.asserted_ok

    def test_multigraph_r1_reduces_to_simple(self):
        g = generate_family("complete", 4)
        gr = multigraph_extend(g, 1)
        p = greedy_independent_partition(gr)
        assert expected_download(gr, p) == expected_download(g, p)

    def test_closed_form_not_asserted_for_r2(self):
        g = multigraph_extend(generate_family("complete", 3), 2)
        p = alpha_first_partition(g)
        report = rate_bounds(g, p, 1, alpha_exact=True)
        closed = next(b for b in report.bounds if b.name == "complete_family_lower")
        assert not closed.assertable
        assert not closed.satisfied  # the documented discrepancy: 8/21 < 1/2.5
        assert report.asserted_ok  # only the independent-set bound is asserted

    @given(storage_graphs())
    @settings(max_examples=40, deadline=None)
    def test_bound_chain_with_alpha_first_partition(self, g):
        p = alpha_first_partition(g)
        alpha = len(exact_max_independent_set(g))
        d = expected_download(g, p)
        if alpha >= 2:
            assert d <= Fraction(g.n_servers) - Fraction(alpha, 2)
        report = rate_bounds(g, p, alpha, alpha_exact=True)
        assert report.asserted_ok

    @pytest.mark.parametrize("n,r", [(3, 2), (3, 3), (4, 2)])
    def test_multigraph_bound_chain(self, n, r):
        g = multigraph_extend(generate_family("complete", n), r)
        p = alpha_first_partition(g)
        d = expected_download(g, p)
        assert d <= Fraction(n) - Fraction(1, 2**r)


class TestDegeneratePartition:
    def test_vertex_without_upstream_rejected(self):
        # On the path 1-2-3, putting {3} in a set after {1} leaves 3 with no
        # edge into earlier sets; equivalently {1} was not maximal. Such a
        # partition signals a caller bug and must be refused.
        g = StorageGraph(3, (make_edge(1, 2), make_edge(2, 3)))
        with pytest.raises(ValueError, match="maximal|upstream"):
            IndependentPartition(g, ((1,), (3,), (2,)))
