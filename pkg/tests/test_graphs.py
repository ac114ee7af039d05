import io
import itertools
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from netdeploy.graphs import (Graph, degree, dumps_edge_list, loads_edge_list, make_barabasi_albert,
                              make_binary_tree, make_clique, make_erdos_renyi, read_edge_list)

DATA = Path(__file__).parent / "data"


def assert_simple_undirected(g: Graph):
    for v in range(g.node_count):
        nbrs = list(g.neighbors(v))
        assert v not in nbrs
        assert len(nbrs) == len(set(nbrs))
        for w in nbrs:
            assert v in g.adjacency(int(w))


# -- clique ------------------------------------------------------------------

def test_clique_four():
    g = make_clique(4)
    assert g.edge_count == 6
    assert [g.degree(v) for v in range(4)] == [3, 3, 3, 3]
    assert degree(g, 2) == 3


def test_clique_single_node():
    g = make_clique(1)
    assert g.edge_count == 0
    assert g.degree(0) == 0


def test_clique_large_is_implicit():
    g = make_clique(10000)
    assert g.implicit
    assert g.edge_count == 49_995_000
    assert g.degree(9999) == 9999


def test_clique_matches_explicit_enumeration():
    g = make_clique(7)
    expected = set(itertools.combinations(range(7), 2))
    assert set(g.edges()) == expected
    assert g.edge_count == len(expected)
    assert_simple_undirected(g)


def test_clique_rejects_zero():
    with pytest.raises(ValueError):
        make_clique(0)


# -- Erdos-Renyi -------------------------------------------------------------

def test_er_zero_probability():
    assert make_erdos_renyi(100, 0.0, 1).edge_count == 0


def test_er_certain_edges_give_complete_graph():
    g = make_erdos_renyi(100, 1.0, 1)
    assert g.edge_count == 4950
    assert np.all(g.degrees() == 99)
    assert_simple_undirected(g)


@pytest.mark.parametrize("p", [-0.1, 1.5])
def test_er_rejects_bad_probability(p):
    with pytest.raises(ValueError):
        make_erdos_renyi(10, p, 0)


def test_er_expected_edges_small():
    # expectation p * n(n-1)/2 = 4995
    counts = [make_erdos_renyi(1000, 0.01, s).edge_count for s in range(30)]
    assert abs(np.mean(counts) - 4995) / 4995 < 0.05


def test_er_expected_edges_full_scale():
    graphs = [make_erdos_renyi(10000, 0.001, s) for s in range(30)]
    mean_edges = np.mean([g.edge_count for g in graphs])
    assert abs(mean_edges - 49_995) / 49_995 < 0.02
    mean_degree = np.mean([g.degrees().mean() for g in graphs])
    assert abs(mean_degree - 9.999) / 9.999 < 0.02


def test_er_pairs_are_uniform():
    # every one of the 15 pairs on 6 nodes should appear with frequency ~ p
    n, p, trials = 6, 0.3, 4000
    freq = np.zeros((n, n))
    for s in range(trials):
        freq += make_erdos_renyi(n, p, s).adjacency_matrix().toarray()
    est = freq[np.triu_indices(n, 1)] / trials
    se = np.sqrt(p * (1 - p) / trials)
    assert np.all(np.abs(est - p) < 4 * se)


# -- Barabasi-Albert ---------------------------------------------------------

def test_ba_ring_only():
    g = make_barabasi_albert(100, 100, 1, 0)
    assert g.edge_count == 100
    assert np.all(g.degrees() == 2)
    assert g.adjacency(0) == {1, 99}


def test_ba_single_attachment():
    g = make_barabasi_albert(101, 100, 1, 0)
    assert g.edge_count == 101
    assert g.degree(100) == 1


@pytest.mark.parametrize("n,ring,m", [(50, 10, 1), (60, 10, 3), (30, 5, 5)])
def test_ba_edge_count_law(n, ring, m):
    g = make_barabasi_albert(n, ring, m, 7)
    assert g.edge_count == ring + m * (n - ring)
    assert_simple_undirected(g)


def test_ba_rejects_bad_parameters():
    with pytest.raises(ValueError):
        make_barabasi_albert(50, 100, 1, 0)
    with pytest.raises(ValueError):
        make_barabasi_albert(200, 10, 11, 0)
    with pytest.raises(ValueError):
        make_barabasi_albert(200, 2, 1, 0)


def test_ba_heavy_tail_at_full_scale():
    maxima = np.array([make_barabasi_albert(10000, 100, 1, s).degrees().max() for s in range(30)])
    assert np.mean(maxima > 50) >= 0.9


def test_ba_attachment_is_degree_proportional():
    # Ring of 3, then node 3 attaches; keep seeds where it picked node 0, so
    # node 4 sees degrees [3, 2, 2, 1] and should pick v with prob deg(v) / 8.
    hits = np.zeros(4)
    for s in range(6000):
        g = make_barabasi_albert(5, 3, 1, s)
        if g.adjacency(3) - {4} != {0}:
            continue
        (target,) = g.adjacency(4)
        hits[target] += 1
    freq = hits / hits.sum()
    expected = np.array([3, 2, 2, 1]) / 8
    se = np.sqrt(expected * (1 - expected) / hits.sum())
    assert np.all(np.abs(freq - expected) < 4 * se)


# -- binary tree -------------------------------------------------------------

def test_tree_seven():
    g = make_binary_tree(7)
    assert [g.depth_of(v) for v in range(7)] == [0, 1, 1, 2, 2, 2, 2]
    assert g.edge_count == 6
    assert degree(g, 0) == 2
    assert degree(g, 3) == 1


def test_tree_single_node():
    g = make_binary_tree(1)
    assert g.depth_of(0) == 0
    assert g.edge_count == 0


def test_tree_full_scale_depth_census():
    g = make_binary_tree(10000)
    # census by walking parents, independent of the bit-length formula
    depth = [0] * 10000
    for k in range(1, 10000):
        depth[k] = depth[(k - 1) // 2] + 1
    assert max(depth) == 13
    assert depth.count(13) == 1809
    assert list(g.depth) == depth


def test_tree_rejects_zero():
    with pytest.raises(ValueError):
        make_binary_tree(0)


@given(st.integers(1, 300))
def test_tree_structure(n):
    g = make_binary_tree(n)
    assert g.edge_count == n - 1
    for u, v in g.edges():
        parent, child = (u, v) if g.depth_of(u) < g.depth_of(v) else (v, u)
        assert g.depth_of(child) == g.depth_of(parent) + 1
        assert child in (2 * parent + 1, 2 * parent + 2)
    children = np.bincount([(c - 1) // 2 for c in range(1, n)], minlength=n) if n > 1 else [0]
    assert max(children) <= 2
    # n - 1 edges and every non-root node linked to its parent: a spanning tree
    assert all((c - 1) // 2 in g.adjacency(c) for c in range(1, n))
    assert g.depth_of(0) == 0


def test_depth_on_non_tree_rejected():
    with pytest.raises(ValueError):
        make_clique(3).depth_of(0)


def test_degree_out_of_range():
    g = make_binary_tree(7)
    with pytest.raises(IndexError):
        degree(g, 7)
    with pytest.raises(IndexError):
        degree(g, -1)


# -- properties --------------------------------------------------------------

@settings(max_examples=40, deadline=None)
@given(kind=st.sampled_from(["er", "ba", "tree", "clique"]), n=st.integers(5, 60), seed=st.integers(0, 2**32))
def test_symmetry_and_determinism(kind, n, seed):
    def build():
        if kind == "er":
            return make_erdos_renyi(n, 0.2, seed)
        if kind == "ba":
            return make_barabasi_albert(n, 5, 2, seed)
        if kind == "tree":
            return make_binary_tree(n)
        return make_clique(n)

    a, b = build(), build()
    assert_simple_undirected(a)
    assert list(a.edges()) == list(b.edges())
    mat = a.adjacency_matrix().toarray()
    assert np.array_equal(mat, mat.T)
    assert np.all(np.diag(mat) == 0)


def test_graph_is_immutable():
    g = make_binary_tree(7)
    with pytest.raises(ValueError):
        g.indices[0] = 3
    with pytest.raises(AttributeError):
        g.node_count = 8


# -- edge-list format --------------------------------------------------------

def test_tree_golden_file():
    text = (DATA / "tree7.edges").read_text()
    assert dumps_edge_list(make_binary_tree(7)) == text
    g = loads_edge_list(text)
    assert g.kind == "binary_tree"
    assert list(g.depth) == [0, 1, 1, 2, 2, 2, 2]


def test_ba_golden_file():
    text = (DATA / "ba12_ring4_m2_seed5.edges").read_text()
    assert dumps_edge_list(make_barabasi_albert(12, 4, 2, 5)) == text


@pytest.mark.parametrize("build", [
    lambda: make_erdos_renyi(30, 0.2, 3),
    lambda: make_barabasi_albert(30, 5, 2, 3),
    lambda: make_binary_tree(30),
    lambda: make_clique(6),
])
def test_edge_list_round_trip(build):
    g = build()
    h = read_edge_list(io.StringIO(dumps_edge_list(g)))
    assert h.kind == g.kind
    assert h.node_count == g.node_count
    assert list(h.edges()) == list(g.edges())


def test_edge_list_first_line_and_rejections():
    assert dumps_edge_list(make_clique(3)).splitlines()[0] == "n 3"
    with pytest.raises(ValueError):
        loads_edge_list("3\n0 1\n", kind="erdos_renyi")
    with pytest.raises(ValueError):
        loads_edge_list("n 3\n1 1\n", kind="erdos_renyi")
    with pytest.raises(ValueError):
        loads_edge_list("n 3\n0 1\n1 0\n", kind="erdos_renyi")
    with pytest.raises(ValueError):
        loads_edge_list("n 3\n0 5\n", kind="erdos_renyi")
