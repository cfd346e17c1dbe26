import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gifw.graph import (
    Graph,
    GraphFormatError,
    apply_permutation,
    as_permutation,
    choose_flip_pairs,
    degree_sequence,
    flip_edges,
    parse_edge_list,
    parse_graph6,
    perm_matrix,
    random_permutation,
    read_graph,
    write_edge_list,
    write_graph6,
)
from oracles import nx_graph6, random_adj


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(np.array([[0, 1], [0, 0]]))
    with pytest.raises(ValueError):
        Graph(np.array([[1, 0], [0, 0]]))
    with pytest.raises(ValueError):
        Graph(np.array([[0, 2], [2, 0]]))
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    assert g.m_directed == 4 and g.num_edges == 2
    with pytest.raises(ValueError):
        g.adj[0, 0] = 1


def test_k3_graph6_matches_networkx(k3):
    assert write_graph6(k3) == "Bw" == nx_graph6(k3.adj)
    assert parse_graph6("Bw") == k3


def test_small_graph6_cases():
    assert parse_graph6("A?") == Graph.empty(2)
    assert write_graph6(Graph.empty(1)) == "@"
    g = parse_graph6("D?{\n")
    assert g.n == 5
    assert parse_graph6(write_graph6(g)) == g
    assert write_graph6(g) == nx_graph6(g.adj)


@pytest.mark.parametrize("n", list(range(1, 63)) + [63, 100, 500])
def test_graph6_round_trip_against_networkx(n):
    rng = np.random.default_rng(n)
    g = Graph(random_adj(n, 0.3, rng))
    text = write_graph6(g)
    assert text == nx_graph6(g.adj)
    assert parse_graph6(text) == g
    if n > 62:
        assert text[0] == "~"


@pytest.mark.parametrize("bad", ["", "~~??????", "B", "Bww", "B\x7f", "C ", "\x3e"])
def test_graph6_rejects_malformed(bad):
    with pytest.raises(GraphFormatError):
        parse_graph6(bad)


def test_edge_list_parsing(k3):
    assert parse_edge_list("3 3\n0 1\n0 2\n1 2") == k3
    assert parse_edge_list("2 0") == Graph.empty(2)
    p3 = parse_edge_list("3 2\n0 1\n1 2")
    assert degree_sequence(p3) == (1, 1, 2)
    assert list(p3.degrees()) == [1, 2, 1]
    assert parse_edge_list("3 3\n0 1\n1 0\n1 2").num_edges == 2
    assert parse_edge_list(write_edge_list(k3)) == k3


@pytest.mark.parametrize("bad", ["3 1\n0 3", "3 1\n1 1", "3 1\n0 x", "3 2\n0 1", "x 1"])
def test_edge_list_rejects(bad):
    with pytest.raises(GraphFormatError):
        parse_edge_list(bad)


def test_read_graph_dispatch(tmp_path, petersen):
    p = tmp_path / "g.g6"
    p.write_text(write_graph6(petersen) + "\n")
    assert read_graph(p) == petersen
    q = tmp_path / "g.txt"
    q.write_text(write_edge_list(petersen))
    assert read_graph(q) == petersen


def test_apply_permutation_examples(k3, petersen):
    assert apply_permutation(petersen, np.arange(10)) == petersen
    assert apply_permutation(k3, [2, 0, 1]) == k3
    p3 = Graph.from_edges(3, [(0, 1), (1, 2)])
    b = apply_permutation(p3, [1, 2, 0])
    assert b == Graph.from_edges(3, [(1, 2), (2, 0)])
    assert b.degrees()[2] == 2
    with pytest.raises(ValueError):
        apply_permutation(k3, [0, 1])


def test_apply_permutation_is_conjugation(rng):
    g = Graph(random_adj(8, 0.4, rng))
    p = random_permutation(8, seed=3)
    P = perm_matrix(p)
    assert np.array_equal(P @ g.adj @ P.T, apply_permutation(g, p).adj)


def test_as_permutation_rejects_non_bijection():
    with pytest.raises(ValueError):
        as_permutation([0, 0, 1])


def test_flip_edges_k3_to_path(k3):
    seed = next(s for s in range(1000) if choose_flip_pairs(3, 1, s) == [(0, 1)])
    assert flip_edges(k3, 1, seed) == Graph.from_edges(3, [(0, 2), (1, 2)])
    assert flip_edges(k3, 0, 5) == k3
    with pytest.raises(ValueError):
        flip_edges(k3, 4, 0)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 2**32 - 1), data=st.data())
def test_flip_properties(n, seed, data):
    g = Graph(random_adj(n, 0.5, np.random.default_rng(seed)))
    count = data.draw(st.integers(1, n * (n - 1) // 2))
    h = flip_edges(g, count, seed)
    assert int(np.count_nonzero(h.adj != g.adj)) == 2 * count
    assert flip_edges(h, count, seed) == g
    assert flip_edges(g, count, seed) == h


def test_degree_sequence(k3, petersen):
    assert degree_sequence(k3) == (2, 2, 2)
    assert degree_sequence(petersen) == (3,) * 10


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(1, 15))
def test_permutation_preserves_invariants(seed, n):
    rng = np.random.default_rng(seed)
    g = Graph(random_adj(n, 0.4, rng))
    h = apply_permutation(g, rng.permutation(n))
    assert degree_sequence(h) == degree_sequence(g)
    assert h.m_directed == g.m_directed
    assert nx.is_isomorphic(nx.from_numpy_array(g.adj), nx.from_numpy_array(h.adj))
