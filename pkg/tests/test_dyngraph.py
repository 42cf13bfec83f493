import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from dylink2vec.dyngraph import (DynamicNetwork, IngestSpec, Snapshot, adjacency_vector, collapse,
                                 format_snapshots, from_edge_sets, ingest, parse_snapshots,
                                 read_edge_list, read_snapshots, to_edge_records, write_edge_list,
                                 write_snapshots)

from conftest import random_net


def test_ingest_single_window():
    net = ingest([("a", "b", 0), ("b", "c", 5)], IngestSpec(10))
    assert (net.n, net.t) == (3, 1)
    assert net.snapshot(1).edges == {(0, 1), (1, 2)}


def test_ingest_two_windows():
    net = ingest([("a", "b", 0), ("a", "b", 15)], IngestSpec(10))
    assert net.t == 2
    assert [g.edges for g in net.snapshots] == [{(0, 1)}, {(0, 1)}]


def test_ingest_empty_records():
    with pytest.raises(ValueError):
        ingest([], IngestSpec(1))


def test_ingest_drops_self_loops_and_duplicates():
    net = ingest([("a", "a", 0), ("a", "b", 1), ("b", "a", 2)], IngestSpec(10))
    assert net.snapshot(1).edges == {(0, 1)}


def test_ingest_gap_snapshots_are_empty():
    net = ingest([(1, 2, 0), (1, 2, 35)], IngestSpec(10))
    assert [len(g) for g in net.snapshots] == [1, 0, 0, 1]


def test_ingest_filters_by_activity():
    # c is active in one snapshot only
    recs = [("a", "b", 0), ("a", "b", 10), ("b", "c", 10)]
    net = ingest(recs, IngestSpec(10, min_active_snapshots=2))
    assert net.n == 2
    assert all(g.edges == {(0, 1)} for g in net.snapshots)


def test_ingest_filters_by_collapsed_degree():
    recs = [("hub", "x", 0), ("hub", "y", 0), ("x", "y", 5), ("hub", "z", 5)]
    net = ingest(recs, IngestSpec(10, min_degree=2))
    # z has collapsed degree 1 and goes; ids re-densified over hub, x, y
    assert net.n == 3
    assert net.snapshot(1).edges == {(0, 1), (0, 2), (1, 2)}


def test_ingest_everything_filtered():
    with pytest.raises(ValueError, match="filtered"):
        ingest([("a", "b", 0)], IngestSpec(1, min_degree=5))


def test_ingest_spec_validation():
    with pytest.raises(ValueError):
        IngestSpec(0)
    with pytest.raises(ValueError):
        IngestSpec(1, min_degree=-1)


def test_adjacency_vector_examples():
    net = from_edge_sets(3, [[(0, 1), (1, 2)], []])
    assert adjacency_vector(net, 1, 1).tolist() == [1, 0, 1]
    assert adjacency_vector(net, 1, 0).tolist() == [0, 1, 0]
    assert adjacency_vector(net, 2, 2).tolist() == [0, 0, 0]


def test_adjacency_vector_range_errors():
    net = from_edge_sets(3, [[(0, 1)], []])
    with pytest.raises(IndexError):
        adjacency_vector(net, 3, 0)
    with pytest.raises(IndexError):
        adjacency_vector(net, 1, 3)


def test_collapse_union_and_identity():
    net = from_edge_sets(3, [[(0, 1)], [(1, 2)]])
    assert collapse(net, 1, 2).edges == {(0, 1), (1, 2)}
    assert collapse(net, 2, 2).edges == net.snapshot(2).edges
    with pytest.raises(ValueError):
        collapse(net, 2, 1)


def test_collapse_lists_each_edge_once():
    sets = [[(0, 1), (1, 2)], [(1, 2), (2, 3)], [(0, 1), (3, 4)]]
    net = from_edge_sets(5, sets)
    g = collapse(net, 1, 3)
    assert sorted(g.edges) == [(0, 1), (1, 2), (2, 3), (3, 4)]
    assert g.n == 5


def test_snapshot_rejects_bad_edges():
    with pytest.raises(ValueError):
        Snapshot(1, 3, frozenset({(1, 0)}))
    with pytest.raises(ValueError):
        Snapshot(1, 3, frozenset({(1, 1)}))
    with pytest.raises(ValueError):
        Snapshot(1, 3, frozenset({(0, 3)}))


def test_network_invariants():
    with pytest.raises(ValueError):
        DynamicNetwork(3, ())
    with pytest.raises(ValueError):
        DynamicNetwork(3, (Snapshot(2, 3, frozenset()),))
    with pytest.raises(ValueError):
        DynamicNetwork(3, (Snapshot(1, 4, frozenset()),))


def test_snapshot_file_roundtrip(tmp_path):
    net = random_net(12, 4, 0.2, seed=3)
    path = tmp_path / "net.txt"
    write_snapshots(net, path)
    back = read_snapshots(path)
    assert back == net
    assert format_snapshots(back) == path.read_text()


def test_snapshot_file_format():
    net = from_edge_sets(3, [[(0, 1)], [(1, 2), (0, 2)]])
    assert format_snapshots(net) == "3 2\n1 0 1\n2 0 2\n2 1 2\n"
    assert parse_snapshots("3 2\n1 0 1\n") == from_edge_sets(3, [[(0, 1)], []])


def test_snapshot_file_rejects_bad_lines():
    with pytest.raises(ValueError):
        parse_snapshots("3 2\n3 0 1\n")
    with pytest.raises(ValueError):
        parse_snapshots("3 2\n1 1 0\n")
    with pytest.raises(ValueError):
        parse_snapshots("")
    with pytest.raises(ValueError):
        parse_snapshots("3 2\n# note\n")


def test_edge_list_file(tmp_path):
    path = tmp_path / "edges.tsv"
    path.write_text("# u v time\nalice\tbob\t0\nbob\tcarol\t12.5\n")
    recs = read_edge_list(path)
    assert recs == [("alice", "bob", 0.0), ("bob", "carol", 12.5)]
    net = ingest(recs, IngestSpec(10))
    assert net.t == 2


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(1, 4), st.floats(0.0, 0.8), st.integers(0, 10_000))
def test_adjacency_rows_sum_to_degree(n, t, p, seed):
    net = random_net(n, t, p, seed)
    for g in net.snapshots:
        for u in range(n):
            vec = adjacency_vector(net, g.index, u)
            assert vec.sum() == len(g.neighbors[u]) == g.degrees[u]
            assert vec[u] == 0


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(1, 5), st.floats(0.0, 0.8), st.integers(0, 10_000),
       st.randoms(use_true_random=False))
def test_collapse_is_order_insensitive_union(n, t, p, seed, rnd):
    net = random_net(n, t, p, seed)
    order = list(net.snapshots)
    rnd.shuffle(order)
    union = frozenset().union(*(g.edges for g in order))
    g = collapse(net, 1, t)
    assert g.edges == union
    # collapsing a collapsed window again changes nothing
    again = collapse(from_edge_sets(n, [g.edges]), 1, 1)
    assert again.edges == g.edges


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 9), st.integers(1, 5), st.floats(0.05, 0.8), st.integers(0, 10_000))
def test_reingest_roundtrip(n, t, p, seed):
    net = random_net(n, t, p, seed)
    if not any(g.edges for g in net.snapshots):
        return
    # keep only vertices that appear somewhere, so relabeling is the identity
    used = sorted({x for g in net.snapshots for e in g.edges for x in e})
    remap = {old: new for new, old in enumerate(used)}
    sets = [[(remap[u], remap[v]) for u, v in g.edges] for g in net.snapshots]
    # trim empty trailing and leading snapshots, which carry no timestamps
    first = next(i for i, s in enumerate(sets) if s)
    last = max(i for i, s in enumerate(sets) if s)
    net = from_edge_sets(len(used), sets[first:last + 1])
    again = ingest(to_edge_records(net), IngestSpec(1))
    assert again == net


def test_edge_list_roundtrip_through_files(tmp_path):
    net = from_edge_sets(4, [[(0, 1), (2, 3)], [(1, 2)], [(0, 3)]])
    path = tmp_path / "e.tsv"
    write_edge_list(to_edge_records(net), path)
    assert ingest(read_edge_list(path), IngestSpec(1)) == net


def test_adjacency_matrix_matches_edges():
    net = random_net(15, 1, 0.3, seed=1)
    g = net.snapshot(1)
    A = g.adjacency.toarray()
    assert np.array_equal(A, A.T)
    assert int(A.sum()) == 2 * len(g.edges)
    for u, v in g.edges:
        assert A[u, v] == 1
